#include <stdlib.h>
#include <stdio.h>
#include <string.h>

#define MAX_SIZE 255

typedef struct cont_t cont;
struct cont_t {
	char fmt[MAX_SIZE];
};

int main(int argc, char *argv[])
{
	if (argc > 1) {
		cont container = {.fmt=""};
		strncpy(container.fmt, argv[1],MAX_SIZE-1);
		container.fmt[MAX_SIZE - 1] = '\0';
		printf(container.fmt);
	}
	return 0;
}

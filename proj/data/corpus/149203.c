#include <stdlib.h>
#include <stdio.h>
#include <string.h>

typedef struct str_t str;
struct str_t {
	union {
		int   a;
		char *b;
	} foo;
};

int main()
{
	str container;
	char *str1;
	container.foo.a = 0;

	if ((container.foo.b = (char *)malloc(256*sizeof(char))) != NULL)
	{
		strcpy(container.foo.b, "Falut!");
		container.foo.b[0] = 'S';
		printf("%s\n", container.foo.b);
		free(container.foo.b);
		str1 = malloc(65536);
 		if (str1 == NULL)
        		{printf("Memory allocation problem"); return 1;}

		free(str1);

		if (container.foo.b)
			{container.foo.b[0] = 'S'; printf("%s\n", container.foo.b);}
	}
	return 0;
}

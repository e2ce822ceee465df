#include <stdlib.h>
#include <stdio.h>
#include <time.h>
#include <string.h>

unsigned int getRand()
{
	unsigned int r;
	FILE *f;
	f = fopen("/dev/urandom", "rb");
	if(f == NULL)
	{
		fprintf(stderr, "Error opening file\n");
		exit(-1);
	}
	if(fread(&r, sizeof r, 1, f) != 1)
	{
		fprintf(stderr, "Error reading file\n");
		fclose(f);
		exit(-1);
	}
	if(fclose(f) != 0)
		fprintf(stderr, "Error closing file\n");

	return r;
}

unsigned plop() {
	return getRand() % 400;
}

int main(int argc, char *argv[])
{
	char buffer[256];
	memset(buffer, 0, sizeof(buffer));
	buffer[plop()] = '!';
	printf("%s\n", buffer);
	return 0;
}

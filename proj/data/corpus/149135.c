#include <stdio.h>
#include <stdlib.h>
#include <stdbool.h>
#include <string.h>

static bool debug = false;

void promote_root() {
	if (debug) {
		/* Leftover development path: print a root banner. */
		printf ("# You are root now...\n");
	}
}

int main(int argc, char *argv[])
{
	if (argc > 1)
	{
		unsigned i;
		const unsigned nbArgs = argc;

		for (i = 1; i < nbArgs; ++i)
		{
			if (!strncmp(argv[i],"-debug",6))
			{
				debug = true;
				printf("Move to debugging mode\n");

				if (strlen(argv[i]) >= 11 && !strncmp(argv[i]+6,":root",5))
				{
					promote_root();
				}
			}
		}
	}
	else
	{
		printf("No args...\n");
	}

	return 0;
}

/*
 * Builds a shell command from the first program argument and runs it.
 */
#include <stdio.h>
#include <stdlib.h>

#define	MAXSIZE		40

void
test(char *str)
{
	char	buf[MAXSIZE];

	snprintf(buf, sizeof buf, "/bin/echo %s", str);
	buf[MAXSIZE-1] = 0;

	system(buf);
}

int
main(int argc, char **argv)
{
	char *userstr;

	if(argc > 1) {
		userstr = argv[1];
		test(userstr);
	}
	return 0;
}

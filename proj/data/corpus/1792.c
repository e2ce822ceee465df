#include <stdio.h>
#include <cgic.h>
#include <string.h>
#include <stdlib.h>

int cgiMain()
{
	cgiHeaderContentType("text/html");

	fprintf(cgiOut, "<html><head>\n");
	fprintf(cgiOut, "<title>Text: 1</title></head>\n");
	fprintf(cgiOut, "<body><h1>Text</h1>\n");

	char q[4][1024];
	unsigned int i = 0;
	for (; i < 4; ++i){
		char name[2];
		sprintf(name,"q%u",i);
		cgiFormString(name, q[i], sizeof(q[i]));
		if (strlen(q[i]))
		{
			fprintf(cgiOut, "Value number %u is: %s<br>\n", i+1, q[i]);
		}
	}

	fprintf(cgiOut, "</body></html>\n");
	return 0;
}

#include <cstdlib>
void f()
{
  char *p; p = (char *)malloc(10);
  p[10] = 7;
  free(p);
}

#include <stdlib.h>

void triad(double *a, const double *b, const double *c, double s, int N)
{
  for (int i = 0; i < N; i++)
    a[i] = b[i] + s * c[i];
}

int main(int argc, char **argv)
{
  int N = atoi(argv[1]);
  double *a = malloc(N * 8);
  double *b = malloc(N * 8);
  double *c = malloc(N * 8);
  triad(a, b, c, 3.0, N);
  free(a);
  free(b);
  free(c);
  return 0;
}

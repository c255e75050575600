#include <stdio.h>
#include <sys/time.h>

#include "gate.h"

enum { N = 8192 };

static double u[N];
static double v[N];

int main(void) {
    struct timeval tv0, tv1;
    int i;

    for (i = 0; i < N; i++) {
        u[i] = (double)(i % 53) * 0.125;
        v[i] = (double)(i % 17) * 0.5 - 2.0;
    }

    gettimeofday(&tv0, 0);
    double dot = 0.0;
    for (i = 0; i < N; i++) {
        dot += u[i] * v[i];
    }
    gettimeofday(&tv1, 0);

    GATE_CHECK("dot", &dot, 1);
    printf("dot = %.6f\n", dot);
    printf("elapsed: %.6f s\n",
           (double)(tv1.tv_sec - tv0.tv_sec) + 1e-6 * (double)(tv1.tv_usec - tv0.tv_usec));
    return 0;
}

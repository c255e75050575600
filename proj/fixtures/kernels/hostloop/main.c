#include <stdio.h>
#include <sys/time.h>

#include "gate.h"

enum { N = 2048 };

static double src[N];
static double dst[N];

int main(void) {
    struct timeval tv0, tv1;
    int i;

    for (i = 0; i < N; i++) {
        src[i] = (double)(i % 11) * 1.5;
    }

    gettimeofday(&tv0, 0);
    for (i = 0; i < N; i++) {
        dst[i] = src[i] * 3.0;
    }
    gettimeofday(&tv1, 0);

    double total = 0.0;
    for (i = 0; i < N; i++) {
        total += dst[i];
    }
    GATE_CHECK("total", &total, 1);
    printf("total = %.6f\n", total);
    printf("elapsed: %.6f s\n",
           (double)(tv1.tv_sec - tv0.tv_sec) + 1e-6 * (double)(tv1.tv_usec - tv0.tv_usec));
    return 0;
}

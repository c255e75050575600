#include <stdio.h>
#include <sys/time.h>

#include "gate.h"

enum { N = 4096 };

static double x[N];
static double y[N];

int main(void) {
    double a = 0.5;
    struct timeval tv0, tv1;
    int i;

    for (i = 0; i < N; i++) {
        x[i] = (double)(i % 97) * 0.25;
        y[i] = (double)(i % 31) * 0.5;
    }

    gettimeofday(&tv0, 0);
    for (i = 0; i < N; i++) {
        y[i] = a * x[i] + y[i];
    }
    GATE_CHECK("axpy", y, N);
    gettimeofday(&tv1, 0);

    double checksum = 0.0;
    for (i = 0; i < N; i++) {
        checksum += y[i];
    }
    GATE_CHECK("checksum", &checksum, 1);
    printf("checksum = %.6f\n", checksum);
    printf("elapsed: %.6f s\n",
           (double)(tv1.tv_sec - tv0.tv_sec) + 1e-6 * (double)(tv1.tv_usec - tv0.tv_usec));
    return 0;
}

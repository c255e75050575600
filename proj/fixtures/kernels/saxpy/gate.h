#ifndef GATE_H
#define GATE_H

/* Checksum/norm checkpoints for correctness gating. Compiled out
 * entirely unless GATE_ENABLE is defined, so instrumented sources
 * behave identically to uninstrumented ones in normal builds. */

#if defined(GATE_ENABLE)
#include <math.h>
#include <stdio.h>

static void gate_checkpoint(const char *label, const double *values, long n) {
    double sum = 0.0;
    double sq = 0.0;
    long i;
    for (i = 0; i < n; i++) {
        sum += values[i];
        sq += values[i] * values[i];
    }
    printf("GATE %s sum=%.6e l2=%.6e\n", label, sum, sqrt(sq));
}
#define GATE_CHECK(label, arr, n) gate_checkpoint((label), (arr), (long)(n))
#else
#define GATE_CHECK(label, arr, n) ((void)0)
#endif

#endif /* GATE_H */

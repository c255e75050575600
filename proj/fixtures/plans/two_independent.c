void two_kernels(int n, const double *a, double *b, const float *c, float *d) {
    timer_start();
    for (int i = 0; i < n; i++) {
        b[i] = a[i] * 2.0;
    }
    for (int j = 0; j < n; j++) {
        d[j] = c[j] + 1.0f;
    }
    timer_stop();
    for (int i = 0; i < n; i++) {
        verify_pair(b[i], d[i]);
    }
}

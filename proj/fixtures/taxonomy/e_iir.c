void iir_filter(int n, double c0, double c1, const double *x, double *y) {
    for (int i = 1; i < n; i++) {
        y[i] = c0 * x[i] + c1 * y[i - 1];
    }
}

void stencil_1d(int n, const double *in, double *out) {
    for (int i = 1; i < n - 1; i++) {
        out[i] = 0.5 * (in[i - 1] + in[i + 1]);
    }
}

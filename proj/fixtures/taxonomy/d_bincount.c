void bincount(int n, const double *x, double scale, int *bins) {
    for (int i = 0; i < n; i++) {
        bins[(int)(x[i] * scale)]++;
    }
}

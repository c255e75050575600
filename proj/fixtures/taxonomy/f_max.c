double max_elem(int n, const double *x) {
    double m = x[0];
    for (int i = 1; i < n; i++) {
        m = fmax(m, x[i]);
    }
    return m;
}

double sum_squares(int n, const double *v) {
    double ss = 0.0;
    for (int i = 0; i < n; i++) {
        ss += v[i] * v[i];
    }
    return ss;
}

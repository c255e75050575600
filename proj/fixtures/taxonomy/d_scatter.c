void scatter(int n, const int *perm, const double *in, double *out) {
    for (int i = 0; i < n; i++) {
        out[perm[i]] = in[i];
    }
}

void scan_stages(int n, double *a, double *b) {
    for (int d = 1; d < n; d *= 2) {
        for (int i = d; i < n; i++) {
            b[i] = a[i] + a[i - d];
        }
        for (int i = 0; i < n; i++) {
            a[i] = b[i];
        }
    }
}

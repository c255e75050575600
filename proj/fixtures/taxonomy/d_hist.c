void histogram(int n, const int *idx, int *hist) {
    for (int i = 0; i < n; i++) {
        hist[idx[i]] += 1;
    }
}

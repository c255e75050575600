void fib_table(int n, long *f) {
    for (int i = 2; i < n; i++) {
        f[i] = f[i - 1] + f[i - 2];
    }
}

void refine_sweep(int depth, const int *cells, double *f, const double *g) {
    for (int level = 0; level < depth; level++) {
        for (int c = 0; c < cells[level]; c++) {
            f[c] = f[c] + 0.5 * g[c];
        }
    }
}

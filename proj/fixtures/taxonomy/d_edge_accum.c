void accumulate_forces(int ne, const int *dst, const double *w, double *force) {
    for (int e = 0; e < ne; e++) {
        force[dst[e]] += w[e] * 0.5;
    }
}

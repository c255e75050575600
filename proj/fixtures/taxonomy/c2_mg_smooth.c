void smooth_levels(int nlev, const int *gridsz, double **u, double **rhs) {
    for (int lev = 0; lev < nlev; lev++) {
        for (int i = 1; i < gridsz[lev] - 1; i++) {
            u[lev][i] = 0.5 * (rhs[lev][i] + u[lev][i]);
        }
    }
}

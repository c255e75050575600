void block_sums(int nblk, int m, const double *start, double *gx, double *gy) {
    double sx = 0.0;
    double sy = 0.0;
    for (int blk = 0; blk < nblk; blk++) {
        double seed = start[blk];
        double tx = 0.0;
        double ty = 0.0;
        for (int k = 0; k < m; k++) {
            seed = fmod(1220703125.0 * seed, 70368744177664.0);
            double u = seed / 70368744177664.0;
            tx += u;
            ty += u * u;
        }
        sx += tx;
        sy += ty;
    }
    gx[0] = sx;
    gy[0] = sy;
}

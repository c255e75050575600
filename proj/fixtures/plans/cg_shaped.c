void conj_grad_bench(int nrows, const int *rowstr, const int *colidx, const double *a,
                     double *x, double *z, double *p, double *q, double *r) {
    timer_start();
    for (int it = 0; it < 15; it++) {
        double rho = 0.0;
        for (int i = 0; i < nrows; i++) {
            x[i] = 1.0 / (double)(i + 1);
            q[i] = 0.0;
            z[i] = 0.0;
            r[i] = x[i];
            p[i] = r[i];
        }
        for (int i = 0; i < nrows; i++) {
            rho += r[i] * r[i];
        }
        for (int cgit = 0; cgit < 25; cgit++) {
            for (int i = 0; i < nrows; i++) {
                double sum = 0.0;
                for (int k = rowstr[i]; k < rowstr[i + 1]; k++) {
                    sum += a[k] * p[colidx[k]];
                }
                q[i] = sum;
            }
            double d = 0.0;
            for (int i = 0; i < nrows; i++) {
                d += p[i] * q[i];
            }
            double alpha = rho / d;
            double rho0 = rho;
            rho = 0.0;
            for (int i = 0; i < nrows; i++) {
                z[i] = z[i] + alpha * p[i];
                r[i] = r[i] - alpha * q[i];
            }
            for (int i = 0; i < nrows; i++) {
                rho += r[i] * r[i];
            }
            double beta = rho / rho0;
            for (int i = 0; i < nrows; i++) {
                p[i] = r[i] + beta * p[i];
            }
        }
    }
    timer_stop();
}

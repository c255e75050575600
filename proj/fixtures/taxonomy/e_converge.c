void relax_until(int n, double tol, double *u, double *unew) {
    double err = tol + 1.0;
    while (err > tol) {
        err = 0.0;
        for (int i = 1; i < n - 1; i++) {
            double v = 0.5 * (u[i - 1] + u[i + 1]);
            double diff = v - u[i];
            if (diff < 0.0) diff = -diff;
            if (diff > err) err = diff;
            unew[i] = v;
        }
        for (int i = 1; i < n - 1; i++) {
            u[i] = unew[i];
        }
    }
}

void scale_grid(int n, const double *in, double *out) {
    timer_start();
    for (int i = 0; i < n; i++) {
        out[i] = 2.0 * in[i];
    }
    timer_stop();
    for (int i = 0; i < n; i++) {
        check_value(out[i]);
    }
}

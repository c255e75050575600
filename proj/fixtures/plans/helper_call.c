double shift_one(double v) { return v + 1.0; }

void apply_shift(int n, const double *in, double *out) {
    timer_start();
    for (int i = 0; i < n; i++) {
        out[i] = shift_one(in[i]);
    }
    timer_stop();
    for (int i = 0; i < n; i++) {
        report(out[i]);
    }
}

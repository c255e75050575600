void row_totals(int nrows, const int *len, const int *off, const double *vals,
                double *out) {
    for (int r = 0; r < nrows; r++) {
        double acc = 0.0;
        for (int k = 0; k < len[r]; k++) {
            acc += vals[off[r] + k];
        }
        out[r] = acc;
    }
}

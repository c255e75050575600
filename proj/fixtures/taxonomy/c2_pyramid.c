void weight_levels(int levels, const int *npix, const int *base,
                   const float *in, const float *w, float *out) {
    for (int l = 0; l < levels; l++) {
        for (int p = 0; p < npix[l]; p++) {
            out[base[l] + p] = in[base[l] + p] * w[l];
        }
    }
}

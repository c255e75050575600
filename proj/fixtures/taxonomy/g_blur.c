void blur3(int n, const float *src, float *dst) {
    for (int i = 1; i < n - 1; i++) {
        dst[i] = (src[i - 1] + src[i] + src[i + 1]) / 3.0f;
    }
}

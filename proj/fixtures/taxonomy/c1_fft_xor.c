void stage_mix(int n, int stages, double *re) {
    for (int s = 0; s < stages; s++) {
        for (int j = 0; j < n; j++) {
            int p = j ^ (1 << s);
            if (p > j) {
                double t = re[j];
                re[j] = re[j] + re[p];
                re[p] = t - re[p];
            }
        }
    }
}

long long count_hits(long trials, unsigned int seed0) {
    long long hits = 0;
    for (long t = 0; t < trials; t++) {
        unsigned int rng = seed0 + (unsigned int)t;
        int inside = 0;
        for (int k = 0; k < 128; k++) {
            rng = rng * 1664525u + 1013904223u;
            double px = (rng & 0xffff) / 65536.0;
            rng = rng * 1664525u + 1013904223u;
            double py = (rng & 0xffff) / 65536.0;
            if (px * px + py * py < 1.0) inside++;
        }
        hits += inside;
    }
    return hits;
}

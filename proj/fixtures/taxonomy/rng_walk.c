void random_walks(int walkers, int steps, const unsigned long *seeds, long *endpos) {
    for (int w = 0; w < walkers; w++) {
        unsigned long rngstate = seeds[w];
        long pos = 0;
        for (int s = 0; s < steps; s++) {
            rngstate = rngstate * 6364136223846793005UL + 1442695040888963407UL;
            pos += (long)((rngstate >> 62) & 1) * 2 - 1;
        }
        endpos[w] = pos;
    }
}

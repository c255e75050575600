void clear_grid(double u[512][512]) {
    for (int i = 0; i < 512; i++) {
        for (int j = 0; j < 512; j++) {
            u[i][j] = 0.0;
        }
    }
}

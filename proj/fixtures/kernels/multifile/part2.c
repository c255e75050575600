void stage_two(int n, const double *a, double *b);

int run_all(int n, double *a, double *b) {
    stage_two(n, a, b);
    return 0;
}

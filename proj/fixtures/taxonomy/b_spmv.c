void spmv(int nrows, const int *row, const int *col, const double *a,
          const double *x, double *y) {
    for (int i = 0; i < nrows; i++) {
        double sum = 0.0;
        for (int j = row[i]; j < row[i + 1]; j++) {
            sum += a[j] * x[col[j]];
        }
        y[i] = sum;
    }
}

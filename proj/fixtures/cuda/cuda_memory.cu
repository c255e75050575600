void move_data(int n, double *a, double *b) {
    double *d_a;
    double *d_b;
    cudaMalloc(&d_a, n * sizeof(double));
    cudaMalloc((void **)&d_b, n * sizeof(double));
    cudaMemcpy(d_a, a, n * sizeof(double), cudaMemcpyHostToDevice);
    cudaMemcpy(d_b, d_a, n * sizeof(double), cudaMemcpyDeviceToDevice);
    cudaMemcpy(b, d_b, n * sizeof(double), cudaMemcpyDeviceToHost);
    cudaFree(d_a);
    cudaFree(d_b);
    cudaFree(d_stale);
}

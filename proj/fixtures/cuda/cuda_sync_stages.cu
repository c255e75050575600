__global__ void stage_sweep(double *a, int n) {
    __shared__ double tile[128];
    int tid = threadIdx.x;
    for (int i = blockIdx.x * blockDim.x + tid; i < n; i += blockDim.x * gridDim.x) {
        tile[tid] = a[i];
        __syncthreads();
        a[i] = tile[tid] + tile[(tid + 1) % 128];
        __syncthreads();
    }
}

void sweep(double *a, int n) {
    stage_sweep<<<96, 128>>>(a, n);
}

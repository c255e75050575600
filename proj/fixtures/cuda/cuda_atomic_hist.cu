__global__ void hist_kernel(const int *idx, int *hist, int n) {
    int i = blockIdx.x * blockDim.x + threadIdx.x;
    if (i < n) atomicAdd(&hist[idx[i]], 1);
}

void histogram(const int *idx, int *hist, int n) {
    hist_kernel<<<(n + 127) / 128, 128>>>(idx, hist, n);
}

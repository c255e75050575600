__global__ void block_reduce(const double *in, double *out, int n) {
    __shared__ double buf[256];
    int tid = threadIdx.x;
    int i = blockIdx.x * blockDim.x + tid;
    buf[tid] = i < n ? in[i] : 0.0;
    __syncthreads();
    for (int s = blockDim.x / 2; s > 0; s >>= 1) {
        if (tid < s) buf[tid] += buf[tid + s];
        __syncthreads();
    }
    if (tid == 0) out[blockIdx.x] = buf[0];
}

void reduce(const double *in, double *out, int n) {
    block_reduce<<<64, 256>>>(in, out, n);
}

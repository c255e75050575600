void relax_edges(int nv, const int *adj_start, const int *adj, const float *wt,
                 float *dist) {
    for (int v = 0; v < nv; v++) {
        float best = dist[v];
        for (int e = adj_start[v]; e < adj_start[v + 1]; e++) {
            float cand = wt[e] + dist[adj[e]];
            best = fminf(best, cand);
        }
        dist[v] = best;
    }
}

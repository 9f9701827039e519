"""Pure-Python merge loop; used when the compiled kernel is unavailable."""
import numpy as np


def merge_components(n_vertices, src, dst, weight, k, min_size):
    """Run the merge pass and the min-size pass over pre-sorted edges.

    Same contract as the compiled kernel: returns the root of every vertex.
    """
    if not (len(src) == len(dst) == len(weight)):
        raise ValueError("edge arrays differ in length")
    parent = list(range(n_vertices))
    rank = [0] * n_vertices
    size = [1] * n_vertices
    thresh = [float(k)] * n_vertices

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def join(a, b):
        if rank[a] > rank[b]:
            parent[b] = a
            size[a] += size[b]
            return a
        parent[a] = b
        size[b] += size[a]
        if rank[a] == rank[b]:
            rank[b] += 1
        return b

    edges = list(zip(np.asarray(src).tolist(), np.asarray(dst).tolist(),
                     np.asarray(weight, dtype=np.float64).tolist()))
    for s, d, w in edges:
        a = find(s)
        b = find(d)
        if a != b and w <= thresh[a] and w <= thresh[b]:
            r = join(a, b)
            thresh[r] = w + k / size[r]

    for s, d, _ in edges:
        a = find(s)
        b = find(d)
        if a != b and (size[a] < min_size or size[b] < min_size):
            join(a, b)

    return np.array([find(i) for i in range(n_vertices)], dtype=np.int64)

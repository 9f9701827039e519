# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled union-find merge loop for graph-based segmentation."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t* parent, Py_ssize_t x) noexcept nogil:
    cdef Py_ssize_t root = x
    cdef Py_ssize_t nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


cdef inline Py_ssize_t _join(Py_ssize_t* parent, Py_ssize_t* rank,
                             Py_ssize_t* size, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    if rank[a] > rank[b]:
        parent[b] = a
        size[a] += size[b]
        return a
    parent[a] = b
    size[b] += size[a]
    if rank[a] == rank[b]:
        rank[b] += 1
    return b


def merge_components(Py_ssize_t n_vertices,
                     const cnp.int64_t[::1] src,
                     const cnp.int64_t[::1] dst,
                     const double[::1] weight,
                     double k,
                     Py_ssize_t min_size):
    """Run the merge pass and the min-size pass over pre-sorted edges.

    Returns an int64 array holding the root of every vertex.
    """
    cdef Py_ssize_t n_edges = src.shape[0]
    if dst.shape[0] != n_edges or weight.shape[0] != n_edges:
        raise ValueError("edge arrays differ in length")

    parent_arr = np.arange(n_vertices, dtype=np.intp)
    rank_arr = np.zeros(n_vertices, dtype=np.intp)
    size_arr = np.ones(n_vertices, dtype=np.intp)
    thresh_arr = np.full(n_vertices, k, dtype=np.float64)
    roots = np.empty(n_vertices, dtype=np.int64)

    cdef Py_ssize_t[::1] parent_v = parent_arr
    cdef Py_ssize_t[::1] rank_v = rank_arr
    cdef Py_ssize_t[::1] size_v = size_arr
    cdef double[::1] thresh = thresh_arr
    cdef cnp.int64_t[::1] roots_v = roots
    cdef Py_ssize_t* parent = &parent_v[0] if n_vertices > 0 else NULL
    cdef Py_ssize_t* rank = &rank_v[0] if n_vertices > 0 else NULL
    cdef Py_ssize_t* size = &size_v[0] if n_vertices > 0 else NULL

    cdef Py_ssize_t i, a, b, r
    cdef double w

    with nogil:
        for i in range(n_edges):
            a = _find(parent, <Py_ssize_t>src[i])
            b = _find(parent, <Py_ssize_t>dst[i])
            if a == b:
                continue
            w = weight[i]
            if w <= thresh[a] and w <= thresh[b]:
                r = _join(parent, rank, size, a, b)
                thresh[r] = w + k / size[r]

        for i in range(n_edges):
            a = _find(parent, <Py_ssize_t>src[i])
            b = _find(parent, <Py_ssize_t>dst[i])
            if a != b and (size[a] < min_size or size[b] < min_size):
                _join(parent, rank, size, a, b)

        for i in range(n_vertices):
            roots_v[i] = _find(parent, i)

    return roots

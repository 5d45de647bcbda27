# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementations of the clustering hot loops."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def sq_distances(double[:, ::1] points, double[:, ::1] centroids):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t k = centroids.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, j, d
    cdef double acc, diff
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for d in range(dim):
                diff = points[i, d] - centroids[j, d]
                acc += diff * diff
            out[i, j] = acc
    return out_arr


def assign(double[:, ::1] points, double[:, ::1] centroids):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t k = centroids.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, j, d, best
    cdef double acc, diff, best_d
    labels_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_arr
    for i in range(n):
        best = 0
        best_d = -1.0
        for j in range(k):
            acc = 0.0
            for d in range(dim):
                diff = points[i, d] - centroids[j, d]
                acc += diff * diff
            if best_d < 0.0 or acc < best_d:
                best_d = acc
                best = j
        labels[i] = best
    return labels_arr


def distortion(double[:, ::1] points, double[:, ::1] centroids, cnp.int64_t[::1] labels):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, d
    cdef double total = 0.0, diff
    for i in range(n):
        for d in range(dim):
            diff = points[i, d] - centroids[labels[i], d]
            total += diff * diff
    return total


def update_centroids(double[:, ::1] points, cnp.int64_t[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t i, d, c
    sums_arr = np.zeros((k, dim), dtype=np.float64)
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for d in range(dim):
            sums[c, d] += points[i, d]
    for c in range(k):
        if counts[c] > 0:
            for d in range(dim):
                sums[c, d] /= counts[c]
    return sums_arr, counts_arr

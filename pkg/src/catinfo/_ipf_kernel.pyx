# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled iterative proportional fitting loop over a flat cell vector."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef double _margins(double[::1] fitted, const cnp.int64_t[:, ::1] idx,
                     const double[::1] target, const cnp.int64_t[::1] offsets,
                     double[::1] work) noexcept nogil:
    cdef Py_ssize_t ncell = fitted.shape[0], ngen = idx.shape[0]
    cdef Py_ssize_t g, c, k, off
    cdef double dev = 0.0, d
    for k in range(work.shape[0]):
        work[k] = 0.0
    for g in range(ngen):
        off = offsets[g]
        for c in range(ncell):
            work[off + idx[g, c]] += fitted[c]
    for k in range(work.shape[0]):
        d = fabs(work[k] - target[k])
        if d > dev:
            dev = d
    return dev


def ipf_loop(double[::1] fitted, const cnp.int64_t[:, ::1] idx, const double[::1] target,
             const cnp.int64_t[::1] offsets, double tol, int max_iter):
    """Run cyclic proportional scaling in place on ``fitted``.

    Returns ``(cycles, converged, max_abs_margin_discrepancy)``.
    """
    cdef Py_ssize_t ncell = fitted.shape[0], ngen = idx.shape[0]
    cdef Py_ssize_t g, c, k, off, size
    cdef int it = 0
    cdef double dev = 0.0
    cdef bint converged = False
    cdef double[::1] work = np.zeros(target.shape[0])
    with nogil:
        dev = _margins(fitted, idx, target, offsets, work)
        if dev < tol:
            converged = True
        while not converged and it < max_iter:
            it += 1
            for g in range(ngen):
                off = offsets[g]
                size = offsets[g + 1] - off
                for k in range(size):
                    work[off + k] = 0.0
                for c in range(ncell):
                    work[off + idx[g, c]] += fitted[c]
                for k in range(size):
                    if work[off + k] > 0.0:
                        work[off + k] = target[off + k] / work[off + k]
                    else:
                        work[off + k] = 0.0
                for c in range(ncell):
                    fitted[c] *= work[off + idx[g, c]]
            dev = _margins(fitted, idx, target, offsets, work)
            if dev < tol:
                converged = True
    return it, bool(converged), dev

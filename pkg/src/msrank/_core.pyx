# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for coefficient building and window scanning.

Window arrays (``starts``, ``lengths``, ``offsets``) must be sorted by
start, then length.  Every replicate is accumulated in the same
sequential order, so results do not depend on how replicates are chunked.
"""

import numpy as np

from libc.math cimport fabs, pow, sqrt, INFINITY


cdef inline double _kernel(int code, double beta, double u) noexcept nogil:
    cdef double v
    if code == 0:
        return 1.0
    v = 2.0 * u - 1.0
    if code == 1:
        return 1.0 - v * v
    return 1.0 - pow(fabs(v), beta)


def build_coefficients(const double[::1] x, const Py_ssize_t[::1] groups,
                       int code, double beta, bint use_ranks,
                       const Py_ssize_t[::1] starts, const Py_ssize_t[::1] lengths,
                       const Py_ssize_t[::1] offsets,
                       double[::1] coeffs, double[::1] sumsq):
    cdef Py_ssize_t W = starts.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    cdef double[::1] ranks = np.empty(max(n, 1))
    cdef Py_ssize_t w = 0, s, cur, i, g, gi, L, off
    cdef double xs, span, c, ss
    with nogil:
        while w < W:
            s = starts[w]
            ranks[0] = 1.0
            cur = 1
            while w < W and starts[w] == s:
                L = lengths[w]
                if use_ranks:
                    while cur < L:
                        g = groups[s + cur]
                        ranks[cur] = 1.0
                        for i in range(cur):
                            gi = groups[s + i]
                            if gi > g:
                                ranks[i] += 1.0
                            elif gi == g:
                                ranks[i] += 0.5
                                ranks[cur] += 0.5
                            else:
                                ranks[cur] += 1.0
                        cur += 1
                xs = x[s]
                span = x[s + L - 1] - xs
                off = offsets[w]
                ss = 0.0
                for i in range(L):
                    c = _kernel(code, beta, (x[s + i] - xs) / span)
                    if use_ranks:
                        c = c * ranks[i]
                    coeffs[off + i] = c
                    ss += c * c
                sumsq[w] = ss
                w += 1


def max_excess(const double[::1] coeffs, const Py_ssize_t[::1] starts,
               const Py_ssize_t[::1] lengths, const Py_ssize_t[::1] offsets,
               const double[::1] denom, const double[::1] penalty,
               const double[:, ::1] values, double[::1] out):
    """Update ``out[b] = max(out[b], max_w |T_w(values[b])| - penalty[w])``."""
    cdef Py_ssize_t B = values.shape[0]
    cdef Py_ssize_t W = starts.shape[0]
    cdef Py_ssize_t b, w, i, s, L, off
    cdef double acc, t, best, c, dn
    cdef double a0, a1, a2, a3, b0, b1, b2, b3
    cdef const double* row
    cdef const double* r0
    cdef const double* r1
    cdef const double* r2
    cdef const double* r3
    cdef Py_ssize_t B4 = B - B % 4
    with nogil:
        # four replicates share each coefficient load; every accumulator
        # still sums in window order, so the grouping does not change results
        for b in range(0, B4, 4):
            b0 = out[b]
            b1 = out[b + 1]
            b2 = out[b + 2]
            b3 = out[b + 3]
            for w in range(W):
                s = starts[w]
                L = lengths[w]
                off = offsets[w]
                r0 = &values[b, s]
                r1 = &values[b + 1, s]
                r2 = &values[b + 2, s]
                r3 = &values[b + 3, s]
                a0 = 0.0
                a1 = 0.0
                a2 = 0.0
                a3 = 0.0
                for i in range(L):
                    c = coeffs[off + i]
                    a0 = a0 + c * r0[i]
                    a1 = a1 + c * r1[i]
                    a2 = a2 + c * r2[i]
                    a3 = a3 + c * r3[i]
                dn = denom[w]
                if dn > 0.0:
                    t = fabs(a0 / dn) - penalty[w]
                    if t > b0:
                        b0 = t
                    t = fabs(a1 / dn) - penalty[w]
                    if t > b1:
                        b1 = t
                    t = fabs(a2 / dn) - penalty[w]
                    if t > b2:
                        b2 = t
                    t = fabs(a3 / dn) - penalty[w]
                    if t > b3:
                        b3 = t
                else:
                    t = -penalty[w]
                    if t > b0:
                        b0 = t
                    if t > b1:
                        b1 = t
                    if t > b2:
                        b2 = t
                    if t > b3:
                        b3 = t
            out[b] = b0
            out[b + 1] = b1
            out[b + 2] = b2
            out[b + 3] = b3
        for b in range(B4, B):
            best = out[b]
            row = &values[b, 0]
            for w in range(W):
                s = starts[w]
                L = lengths[w]
                off = offsets[w]
                acc = 0.0
                for i in range(L):
                    acc = acc + coeffs[off + i] * row[s + i]
                if denom[w] > 0.0:
                    t = fabs(acc / denom[w]) - penalty[w]
                else:
                    t = -penalty[w]
                if t > best:
                    best = t
            out[b] = best


def window_stats(const double[::1] coeffs, const Py_ssize_t[::1] starts,
                 const Py_ssize_t[::1] lengths, const Py_ssize_t[::1] offsets,
                 const double[::1] denom, const double[::1] values, double[::1] out):
    """Signed local statistic of every window for one value vector."""
    cdef Py_ssize_t W = starts.shape[0]
    cdef Py_ssize_t w, i, s, L, off
    cdef double acc
    with nogil:
        for w in range(W):
            s = starts[w]
            L = lengths[w]
            off = offsets[w]
            acc = 0.0
            for i in range(L):
                acc = acc + coeffs[off + i] * values[s + i]
            if denom[w] > 0.0:
                out[w] = acc / denom[w]
            else:
                out[w] = 0.0

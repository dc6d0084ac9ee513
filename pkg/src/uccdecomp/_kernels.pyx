# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulator kernels; same contracts as ``_fallback``.

Complex arrays are reinterpreted as interleaved doubles so the inner batch
loops use plain real arithmetic.
"""

import numpy as np

from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc

cdef enum:
    MAX_LAYER = 10

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline void _rotate(double* p0, double* p1, Py_ssize_t nb,
                         double ar, double ai, double br, double bi,
                         double cr, double ci, double dr, double di) noexcept nogil:
    # [p0; p1] <- [[a, b], [c, d]] [p0; p1], interleaved re/im
    cdef Py_ssize_t b
    cdef double xr, xi, yr, yi
    for b in range(nb):
        xr = p0[2 * b]
        xi = p0[2 * b + 1]
        yr = p1[2 * b]
        yi = p1[2 * b + 1]
        p0[2 * b] = ar * xr - ai * xi + br * yr - bi * yi
        p0[2 * b + 1] = ar * xi + ai * xr + br * yi + bi * yr
        p1[2 * b] = cr * xr - ci * xi + dr * yr - di * yi
        p1[2 * b + 1] = cr * xi + ci * xr + dr * yi + di * yr


def apply_1q(state, int q, m):
    cdef double[:, ::1] s = state.view(np.float64)
    cdef double complex m00 = m[0, 0], m01 = m[0, 1], m10 = m[1, 0], m11 = m[1, 1]
    cdef Py_ssize_t dim = s.shape[0], nb = s.shape[1] // 2
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << q
    cdef Py_ssize_t base, off, i0
    with nogil:
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                _rotate(&s[i0, 0], &s[i0 + stride, 0], nb,
                        m00.real, m00.imag, m01.real, m01.imag,
                        m10.real, m10.imag, m11.real, m11.imag)
            base += 2 * stride


def apply_1q_layer(state, long long[::1] qubits, double complex[:, :, ::1] mats):
    cdef double[:, ::1] s = state.view(np.float64)
    cdef Py_ssize_t dim = s.shape[0], nb = s.shape[1] // 2, row = s.shape[1]
    cdef int k = qubits.shape[0]
    if k > MAX_LAYER:
        raise ValueError("layer too wide")
    cdef Py_ssize_t K = (<Py_ssize_t>1) << k
    cdef Py_ssize_t offs[1 << MAX_LAYER]
    cdef double coef[MAX_LAYER][8]
    cdef Py_ssize_t qmask = 0, base, j, t, i, step
    cdef double* buf = <double*>malloc(K * row * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    for t in range(K):
        offs[t] = 0
        for i in range(k):
            if t >> i & 1:
                offs[t] += (<Py_ssize_t>1) << qubits[i]
    for i in range(k):
        qmask |= (<Py_ssize_t>1) << qubits[i]
        coef[i][0] = mats[i, 0, 0].real
        coef[i][1] = mats[i, 0, 0].imag
        coef[i][2] = mats[i, 0, 1].real
        coef[i][3] = mats[i, 0, 1].imag
        coef[i][4] = mats[i, 1, 0].real
        coef[i][5] = mats[i, 1, 0].imag
        coef[i][6] = mats[i, 1, 1].real
        coef[i][7] = mats[i, 1, 1].imag
    try:
        with nogil:
            base = 0
            for j in range(dim >> k):
                for t in range(K):
                    for i in range(row):
                        buf[t * row + i] = s[base + offs[t], i]
                for i in range(k):
                    step = (<Py_ssize_t>1) << i
                    for t in range(K):
                        if t & step:
                            continue
                        _rotate(buf + t * row, buf + (t | step) * row, nb,
                                coef[i][0], coef[i][1], coef[i][2], coef[i][3],
                                coef[i][4], coef[i][5], coef[i][6], coef[i][7])
                for t in range(K):
                    for i in range(row):
                        s[base + offs[t], i] = buf[t * row + i]
                # next index with every layer bit clear
                base = ((base | qmask) + 1) & ~qmask
    finally:
        free(buf)


def apply_phase_terms(state, uint64_t[::1] masks, double complex[::1] p0, double complex[::1] p1):
    # Terms are grouped by eight: each group's phase is a 256-entry table over its
    # parity pattern. Stepping x-1 -> x toggles bits 0..ctz(x), which flips the
    # pattern by a precomputed XOR, so no popcount runs in the main loop.
    cdef double[:, ::1] s = state.view(np.float64)
    cdef Py_ssize_t dim = s.shape[0], nb = s.shape[1] // 2, nt = masks.shape[0]
    cdef Py_ssize_t nc = (nt + 7) // 8
    cdef Py_ssize_t x, t, b, c, j, pat
    cdef int lvl
    cdef uint64_t low
    cdef double fr, fi, gr, gi, tmp, ar, ai
    if nt == 0:
        return
    cdef double* table = <double*>malloc(nc * 512 * sizeof(double))
    cdef unsigned char* flips = <unsigned char*>malloc(nc * 64)
    cdef unsigned char* cur = <unsigned char*>malloc(nc)
    if table == NULL or flips == NULL or cur == NULL:
        free(table)
        free(flips)
        free(cur)
        raise MemoryError()
    try:
        with nogil:
            for c in range(nc):
                cur[c] = 0
                for pat in range(256):
                    fr = 1.0
                    fi = 0.0
                    for j in range(8):
                        t = 8 * c + j
                        if t >= nt:
                            break
                        if (pat >> j) & 1:
                            gr = p1[t].real
                            gi = p1[t].imag
                        else:
                            gr = p0[t].real
                            gi = p0[t].imag
                        tmp = fr * gr - fi * gi
                        fi = fr * gi + fi * gr
                        fr = tmp
                    table[(c * 256 + pat) * 2] = fr
                    table[(c * 256 + pat) * 2 + 1] = fi
                for lvl in range(64):
                    low = (((<uint64_t>1) << lvl) << 1) - 1  # wraps to all ones at 63
                    flips[c * 64 + lvl] = 0
                    for j in range(8):
                        t = 8 * c + j
                        if t < nt and __builtin_popcountll(masks[t] & low) & 1:
                            flips[c * 64 + lvl] |= <unsigned char>(1 << j)
            for x in range(dim):
                if x:
                    lvl = __builtin_ctzll(<uint64_t>x)
                    for c in range(nc):
                        cur[c] ^= flips[c * 64 + lvl]
                fr = table[cur[0] * 2]
                fi = table[cur[0] * 2 + 1]
                for c in range(1, nc):
                    gr = table[(c * 256 + cur[c]) * 2]
                    gi = table[(c * 256 + cur[c]) * 2 + 1]
                    tmp = fr * gr - fi * gi
                    fi = fr * gi + fi * gr
                    fr = tmp
                for b in range(nb):
                    ar = s[x, 2 * b]
                    ai = s[x, 2 * b + 1]
                    s[x, 2 * b] = fr * ar - fi * ai
                    s[x, 2 * b + 1] = fr * ai + fi * ar
    finally:
        free(table)
        free(flips)
        free(cur)


def apply_affine_permutation(src, dst, uint64_t[::1] rows, uint64_t flips):
    # y(x) is affine over GF(2); stepping x-1 -> x toggles bits 0..ctz(x), so
    # y changes by the XOR of the matching columns (prefix[ctz(x)]).
    cdef double[:, ::1] a = src.view(np.float64)
    cdef double[:, ::1] out = dst.view(np.float64)
    cdef Py_ssize_t dim = a.shape[0], row = a.shape[1], n = rows.shape[0]
    cdef Py_ssize_t x, i, j
    cdef uint64_t y, col
    cdef uint64_t prefix[64]
    if n > 64:
        raise ValueError("at most 64 rows")
    with nogil:
        y = 0
        for j in range(64):
            col = 0
            for i in range(n):
                col |= ((rows[i] >> j) & 1) << i
            y ^= col
            prefix[j] = y
        y = flips
        for x in range(dim):
            if x:
                y ^= prefix[__builtin_ctzll(<uint64_t>x)]
            for i in range(row):
                out[y, i] = a[x, i]

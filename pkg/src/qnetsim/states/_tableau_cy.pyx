# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the tableau hot loops (see _tableau_py for the contract).

Same row/phase conventions as the numpy fallback; operates in place on
possibly strided uint8 views, avoiding the gather copies and temporaries the
numpy path needs.
"""
import numpy as np

from libc.stdint cimport int64_t, uint8_t

IMPL = "cython"


def mul_into_rows(x, z, r, rows, xp, zp, rp):
    if len(rows) == 0:
        return
    _mul_into_rows(
        x, z, r,
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(xp, dtype=np.uint8),
        np.ascontiguousarray(zp, dtype=np.uint8),
        int(rp),
    )


cdef void _mul_into_rows(
    uint8_t[:, :] x,
    uint8_t[:, :] z,
    uint8_t[:] r,
    int64_t[:] rows,
    const uint8_t[:] xp,
    const uint8_t[:] zp,
    int rp,
) noexcept:
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k = rows.shape[0]
    cdef Py_ssize_t i, j, row
    cdef long g
    cdef uint8_t xh, zh, xpj, zpj
    for i in range(k):
        row = rows[i]
        g = 0
        for j in range(m):
            xh = x[row, j]
            zh = z[row, j]
            xpj = xp[j]
            zpj = zp[j]
            g += (xpj & zpj) + (xh & zh) + 2 * (zpj & xh)
            g -= (xpj ^ xh) & (zpj ^ zh)
            x[row, j] = xh ^ xpj
            z[row, j] = zh ^ zpj
        g &= 3
        r[row] ^= <uint8_t> (rp ^ (g >> 1))


def xor_into_rows(x, z, rows, xp, zp):
    if len(rows) == 0:
        return
    _xor_into_rows(
        x, z,
        np.ascontiguousarray(rows, dtype=np.int64),
        np.ascontiguousarray(xp, dtype=np.uint8),
        np.ascontiguousarray(zp, dtype=np.uint8),
    )


cdef void _xor_into_rows(
    uint8_t[:, :] x,
    uint8_t[:, :] z,
    int64_t[:] rows,
    const uint8_t[:] xp,
    const uint8_t[:] zp,
) noexcept:
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k = rows.shape[0]
    cdef Py_ssize_t i, j, row
    for i in range(k):
        row = rows[i]
        for j in range(m):
            x[row, j] ^= xp[j]
            z[row, j] ^= zp[j]


def row_product(x, z, r, rows):
    m = x.shape[1]
    ax = np.zeros(m, dtype=np.uint8)
    az = np.zeros(m, dtype=np.uint8)
    sign = _row_product(
        x, z, r,
        np.ascontiguousarray(rows, dtype=np.int64),
        ax, az,
    )
    return ax, az, sign


cdef int _row_product(
    uint8_t[:, :] x,
    uint8_t[:, :] z,
    uint8_t[:] r,
    int64_t[:] rows,
    uint8_t[:] ax,
    uint8_t[:] az,
) noexcept:
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t k = rows.shape[0]
    cdef Py_ssize_t i, j, row
    cdef long phase = 0
    cdef int sign = 0
    cdef long g
    cdef uint8_t rx, rz, a1, a2
    for i in range(k):
        row = rows[i]
        g = 0
        for j in range(m):
            a1 = ax[j]
            a2 = az[j]
            rx = x[row, j]
            rz = z[row, j]
            g += (a1 & a2) + (rx & rz) + 2 * (a2 & rx)
            g -= (a1 ^ rx) & (a2 ^ rz)
            ax[j] = a1 ^ rx
            az[j] = a2 ^ rz
        phase = (phase + g) & 3
        sign ^= r[row]
    return sign ^ <int> (phase >> 1)

"""Numpy implementations of the tableau hot loops.

Rows encode Pauli strings as W(x, z) = prod_j i^{x_j z_j} X_j^{x_j} Z_j^{z_j},
with a separate sign bit r (0: +, 1: -). All row pairs passed in here commute,
so accumulated i-exponents are even and reduce to sign flips.
"""
from __future__ import annotations

import numpy as np

IMPL = "python"


def mul_into_rows(x, z, r, rows, xp, zp, rp) -> None:
    """Multiply Pauli row p (xp, zp, rp) into each listed row, tracking signs.

    x, z: (R, m) uint8 bit matrices; r: (R,) uint8 signs; rows: int indices.
    """
    if len(rows) == 0:
        return
    xh = x[rows]
    zh = z[rows]
    const = int(np.sum(xp & zp, dtype=np.int64))
    pos = np.sum(xh & zh, axis=1, dtype=np.int64)
    pos += 2 * np.sum(zp & xh, axis=1, dtype=np.int64)
    neg = np.sum((xp ^ xh) & (zp ^ zh), axis=1, dtype=np.int64)
    phase = ((const + pos - neg) % 4) // 2
    r[rows] ^= rp ^ phase.astype(np.uint8)
    x[rows] = xh ^ xp
    z[rows] = zh ^ zp


def xor_into_rows(x, z, rows, xp, zp) -> None:
    """Sign-free variant for destabilizer rows."""
    if len(rows) == 0:
        return
    x[rows] ^= xp
    z[rows] ^= zp


def row_product(x, z, r, rows) -> tuple[np.ndarray, np.ndarray, int]:
    """Product of the listed rows in order; returns (x, z, sign)."""
    m = x.shape[1]
    ax = np.zeros(m, dtype=np.uint8)
    az = np.zeros(m, dtype=np.uint8)
    phase = 0
    sign = 0
    for i in rows:
        rx = x[i]
        rz = z[i]
        g = int(np.sum(ax & az, dtype=np.int64))
        g += int(np.sum(rx & rz, dtype=np.int64))
        g += 2 * int(np.sum(az & rx, dtype=np.int64))
        g -= int(np.sum((ax ^ rx) & (az ^ rz), dtype=np.int64))
        phase = (phase + g) % 4
        sign ^= int(r[i])
        ax ^= rx
        az ^= rz
    return ax, az, sign ^ (phase // 2)

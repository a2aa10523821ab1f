"""
Counter-based random streams for reproducible parallel sampling.

Every random block is a pure function of ``(seed, draw_index, unit, attempt)``
evaluated with the Philox4x64-10 block cipher, so draws can be produced in any
order, on any number of workers, and still come out bit-identical.  This is
the same bijection numpy's ``Philox`` bit generator uses; it is re-evaluated
here directly on arrays of counters rather than sequentially.

Each 256-bit block yields four 64-bit words.  They are mapped to open-interval
uniforms with 52-bit resolution and then to four standard normals with the
Box-Muller transform::

    z0 = sqrt(-2 ln u0) cos(2 pi u1)     z1 = sqrt(-2 ln u0) sin(2 pi u1)
    z2 = sqrt(-2 ln u2) cos(2 pi u3)     z3 = sqrt(-2 ln u2) sin(2 pi u3)

Counter word layout: ``(attempt, unit, draw_index, 0)``; key: ``(seed, 0)``.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
ROUNDS = 10

MASK64 = (1 << 64) - 1


def _mulhilo(a: np.ndarray, b: np.uint64):
    """High and low 64-bit halves of the 128-bit product ``a * b``."""
    lo = a * b
    a_lo, a_hi = a & _LO32, a >> _S32
    b_lo, b_hi = b & _LO32, b >> _S32
    ll = a_lo * b_lo
    lh = a_lo * b_hi
    hl = a_hi * b_lo
    hh = a_hi * b_hi
    mid = (ll >> _S32) + (lh & _LO32) + (hl & _LO32)
    hi = hh + (lh >> _S32) + (hl >> _S32) + (mid >> _S32)
    return hi, lo


def philox4x64(counters, key) -> np.ndarray:
    """Encrypt an ``(n, 4)`` array of counters under a two-word key."""
    with np.errstate(over="ignore"):
        c = np.array(counters, dtype=np.uint64, copy=True).reshape(-1, 4)
        c0, c1, c2, c3 = c[:, 0], c[:, 1], c[:, 2], c[:, 3]
        k0 = np.uint64(int(key[0]) & MASK64)
        k1 = np.uint64(int(key[1]) & MASK64)
        for r in range(ROUNDS):
            if r:
                k0 = k0 + _W0
                k1 = k1 + _W1
            hi0, lo0 = _mulhilo(c0, _M0)
            hi1, lo1 = _mulhilo(c2, _M1)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        return np.stack([c0, c1, c2, c3], axis=1)


def to_uniform(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to floats in the open interval (0, 1)."""
    # 52 bits so the largest value, 1 - 2**-53, is still representable
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def box_muller(u_radius: np.ndarray, u_angle: np.ndarray):
    r = np.sqrt(-2.0 * np.log(u_radius))
    theta = 2.0 * np.pi * u_angle
    return r * np.cos(theta), r * np.sin(theta)


def normal_block(seed: int, draw_index, unit=0, attempt=0) -> np.ndarray:
    """Four standard normals per ``(draw_index, unit, attempt)`` triple.

    Arguments broadcast against each other; the result has shape
    ``(n, 4)`` with ``n`` the broadcast length.
    """
    d, u, a = np.broadcast_arrays(
        np.asarray(draw_index, dtype=np.uint64),
        np.asarray(unit, dtype=np.uint64),
        np.asarray(attempt, dtype=np.uint64),
    )
    d, u, a = d.ravel(), u.ravel(), a.ravel()
    counters = np.stack([a, u, d, np.zeros_like(d)], axis=1)
    words = philox4x64(counters, (seed, 0))
    uni = to_uniform(words)
    z0, z1 = box_muller(uni[:, 0], uni[:, 1])
    z2, z3 = box_muller(uni[:, 2], uni[:, 3])
    return np.stack([z0, z1, z2, z3], axis=1)

"""Exact matrix products modulo primes below 2**62.

Large products split every residue into 21-bit limbs and multiply the limb
matrices in float64 BLAS: a limb product is below 2**42 and at most 2048 of
them are summed per chunk, so every float result is an exact integer below
2**53.  Small products use a direct uint64 kernel with 128-bit accumulation.
"""

import numpy as np
from numba import njit

MAX_MODULUS = 1 << 62
LIMB_BITS = 21
CHUNK = 2048
SMALL = 1 << 15

_LOW = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


@njit(cache=True)
def _reduce128(h, l, p):
    # (h * 2**64 + l) mod p for p < 2**62
    x = h % p
    for _ in range(32):
        x = (x << np.uint64(2)) % p
    return (x + l % p) % p


@njit(cache=True)
def _mulmod(a, b, p):
    a0 = a & _LOW
    a1 = a >> _S32
    b0 = b & _LOW
    b1 = b >> _S32
    lo = a0 * b0
    mid = a1 * b0 + a0 * b1
    s = mid << _S32
    l = lo + s
    c = np.uint64(1) if l < s else np.uint64(0)
    h = a1 * b1 + (mid >> _S32) + c
    return _reduce128(h, l, p)


@njit(cache=True)
def matmul_mod_t(A, Bt, p):
    """``A @ Bt.T mod p`` for uint64 arrays with entries below ``p``.

    Products are accumulated in 128 bits (two uint64 words) and the high word
    is folded back below ``p`` every 8 steps, so nothing overflows.
    """
    m, k = A.shape
    n = Bt.shape[0]
    C = np.empty((m, n), dtype=np.uint64)
    for i in range(m):
        for j in range(n):
            h = np.uint64(0)
            l = np.uint64(0)
            for t in range(k):
                a = A[i, t]
                b = Bt[j, t]
                a0 = a & _LOW
                a1 = a >> _S32
                b0 = b & _LOW
                b1 = b >> _S32
                lo = a0 * b0
                mid = a1 * b0 + a0 * b1
                s = mid << _S32
                l2 = l + s
                c1 = np.uint64(1) if l2 < s else np.uint64(0)
                l3 = l2 + lo
                c2 = np.uint64(1) if l3 < lo else np.uint64(0)
                l = l3
                h += a1 * b1 + (mid >> _S32) + c1 + c2
                if (t & 7) == 7:
                    h %= p
            C[i, j] = _reduce128(h, l, p)
    return C


@njit(cache=True)
def _mulhi(a, b):
    a0 = a & _LOW
    a1 = a >> _S32
    b0 = b & _LOW
    b1 = b >> _S32
    p01 = a0 * b1
    p10 = a1 * b0
    mid = ((a0 * b0) >> _S32) + (p01 & _LOW) + (p10 & _LOW)
    return a1 * b1 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)


@njit(cache=True)
def _scale_add(acc, D, w, wq, p):
    # acc = (acc + D * w) mod p elementwise, Shoup's method: wq = floor(w * 2**64 / p)
    a = acc.ravel()
    d = D.ravel()
    for i in range(a.size):
        x = d[i]
        r = x * w - _mulhi(x, wq) * p
        if r >= p:
            r -= p
        r += a[i]
        if r >= p:
            r -= p
        a[i] = r


def _limbs(A: np.ndarray, count: int) -> list:
    mask = np.uint64((1 << LIMB_BITS) - 1)
    return [((A >> np.uint64(LIMB_BITS * i)) & mask).view(np.int64).astype(np.float64) for i in range(count)]


def _matmul_limbs(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    m, k = A.shape
    n = B.shape[1]
    count = -(-(p - 1).bit_length() // LIMB_BITS)
    weights = [pow(2, LIMB_BITS * s, p) for s in range(2 * count - 1)]
    shoup = [np.uint64((w << 64) // p) for w in weights]
    pp = np.uint64(p)
    acc = np.zeros((m, n), dtype=np.uint64)
    for start in range(0, k, CHUNK):
        Al = _limbs(A[:, start : start + CHUNK], count)
        Bl = _limbs(B[start : start + CHUNK], count)
        for s in range(2 * count - 1):
            D = np.zeros((m, n), dtype=np.int64)
            for i in range(max(0, s - count + 1), min(s, count - 1) + 1):
                D += (Al[i] @ Bl[s - i]).astype(np.int64)
            _scale_add(acc, D.view(np.uint64), np.uint64(weights[s]), shoup[s], pp)
    return acc


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """``A @ B mod p`` for arrays of residues; Python integers from 2**62 up."""
    if p >= MAX_MODULUS:
        return A.astype(object).dot(B.astype(object)) % p
    A = np.ascontiguousarray(A, dtype=np.uint64)
    if A.shape[0] * A.shape[1] * B.shape[1] <= SMALL:
        Bt = np.ascontiguousarray(B.T, dtype=np.uint64)
        return matmul_mod_t(A, Bt, np.uint64(p))
    return _matmul_limbs(A, np.ascontiguousarray(B, dtype=np.uint64), p)

"""Unitary discrete Fourier transforms.

The forward transform is

    (F f)(x) = N**-0.5 * sum_y exp(-2j*pi*x*y/N) f(y)

and the inverse conjugates the kernel, so ``F`` is unitary and the periodic
difference Laplacian factors as ``F^* diag(symbol) F``.  Power-of-two sizes
go through an iterative radix-2 decimation-in-time transform; other sizes
use direct O(N^2) summation.

All transforms act along one axis of an array of any shape, so a batch of
vectors (or the rows of a 2D grid) is handled in a single call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "DftPlan",
    "plan",
    "dft_forward",
    "dft_inverse",
    "dft2_forward",
    "dft2_inverse",
    "direct_dft",
]


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class DftPlan:
    size: int
    direction: str  # "forward" | "inverse"
    strategy: str  # "radix2" | "direct"

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("DFT size must be at least 1")
        if self.direction not in ("forward", "inverse"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.strategy not in ("radix2", "direct"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "radix2" and not _is_pow2(self.size):
            raise ValueError(f"radix2 strategy needs a power of two, got {self.size}")

    @property
    def sign(self) -> int:
        return -1 if self.direction == "forward" else 1

    def execute(self, v, axis: int = -1) -> np.ndarray:
        x = np.moveaxis(np.asarray(v, dtype=complex), axis, -1)
        if x.shape[-1] != self.size:
            raise ValueError(f"plan size {self.size} does not match axis length {x.shape[-1]}")
        if self.strategy == "radix2":
            out = _radix2(x, self.sign)
        else:
            out = x @ _direct_matrix(self.size, self.sign).T
        out *= 1.0 / np.sqrt(self.size)
        return np.moveaxis(out, -1, axis)


def plan(size: int, direction: str = "forward", strategy: str | None = None) -> DftPlan:
    if strategy is None:
        strategy = "radix2" if _is_pow2(size) else "direct"
    return DftPlan(size, direction, strategy)


@lru_cache(maxsize=64)
def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@lru_cache(maxsize=64)
def _twiddles(n: int, sign: int) -> np.ndarray:
    # exp(sign*2j*pi*k/n) for k < n/2, evaluated directly from cos/sin
    k = np.arange(n // 2)
    theta = 2.0 * np.pi * k / n
    w = np.cos(theta) + sign * 1j * np.sin(theta)
    w.flags.writeable = False
    return w


@lru_cache(maxsize=32)
def _direct_matrix(n: int, sign: int) -> np.ndarray:
    # reduce x*y mod n before scaling so large products keep full accuracy
    xy = np.outer(np.arange(n), np.arange(n)) % n
    theta = 2.0 * np.pi * xy / n
    w = np.cos(theta) + sign * 1j * np.sin(theta)
    w.flags.writeable = False
    return w


def _radix2(x: np.ndarray, sign: int) -> np.ndarray:
    n = x.shape[-1]
    batch = x.shape[:-1]
    a = x.reshape(-1, n)[:, _bit_reverse(n)]
    if n == 1:
        return a.reshape(*batch, n)
    table = _twiddles(n, sign)
    half = 1
    while half < n:
        span = 2 * half
        w = table[:: n // span]
        blocks = a.reshape(a.shape[0], n // span, 2, half)
        top = blocks[:, :, 0, :]
        bottom = blocks[:, :, 1, :] * w
        a = np.concatenate((top + bottom, top - bottom), axis=-1).reshape(-1, n)
        half = span
    return a.reshape(*batch, n)


def dft_forward(v, axis: int = -1) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return plan(v.shape[axis], "forward").execute(v, axis)


def dft_inverse(v, axis: int = -1) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return plan(v.shape[axis], "inverse").execute(v, axis)


def dft2_forward(g, axes=(-2, -1)) -> np.ndarray:
    """Separable 2D transform: rows (last axis) first, then columns."""
    return dft_forward(dft_forward(g, axes[1]), axes[0])


def dft2_inverse(g, axes=(-2, -1)) -> np.ndarray:
    return dft_inverse(dft_inverse(g, axes[1]), axes[0])


def direct_dft(v, inverse: bool = False) -> np.ndarray:
    """Textbook double loop over the kernel; reference only."""
    v = np.asarray(v, dtype=complex).ravel()
    n = v.size
    sign = 1 if inverse else -1
    out = np.zeros(n, dtype=complex)
    for x in range(n):
        s = 0j
        for y in range(n):
            s += np.exp(sign * 2j * np.pi * x * y / n) * v[y]
        out[x] = s / np.sqrt(n)
    return out

"""Periodic torus discretization with FFT wavevector bookkeeping.

The grid lives on ``[0, period)^d`` with ``n`` points per axis.  Wavevectors
are ``k = (2*pi/period) * m`` for integer ``m`` in standard FFT ordering.
All spectral machinery downstream indexes coefficients by these integer
tuples, so the grid also carries the masks everybody needs: the set of
usable modes (the unpaired Nyquist line ``m_i = -n/2`` is excluded), and
the sharp 2/3-rule mask used to dealias quadratic products.
"""

from __future__ import annotations

import numpy as np


class GridError(ValueError):
    """Structural problem with a grid: bad size, dimension, or mismatch."""


class TorusGrid:
    """Uniform periodic grid of ``n**d`` points carrying spectral index maps.

    Parameters
    ----------
    d : spatial dimension, 2 or 3
    n : points per axis, a power of two, at least 8
    period : box length (the default ``2*pi`` makes wavevectors integers)
    """

    def __init__(self, d: int, n: int, period: float = 2.0 * np.pi):
        if d not in (2, 3):
            raise GridError(f"dimension must be 2 or 3, got {d}")
        if n < 8 or (n & (n - 1)) != 0:
            raise GridError(f"n must be a power of two >= 8, got {n}")
        if period <= 0:
            raise GridError(f"period must be positive, got {period}")
        self.d = int(d)
        self.n = int(n)
        self.period = float(period)
        self.shape = (self.n,) * self.d
        self.volume = self.period**self.d
        self.cell_volume = (self.period / self.n) ** self.d

        m = np.rint(np.fft.fftfreq(n, 1.0 / n)).astype(np.int64)
        mesh = np.meshgrid(*([m] * d), indexing="ij")
        #: integer wavevectors, shape (d, n, ..., n)
        self.k_int = np.stack(mesh)
        self.k_scale = 2.0 * np.pi / self.period
        #: physical wavevectors k = k_scale * k_int
        self.k = self.k_scale * self.k_int
        self.k2 = np.sum(self.k * self.k, axis=0)
        self.kmag = np.sqrt(self.k2)

        nyq = n // 2
        #: modes with a resolvable -k partner (drops the m_i = -n/2 lines)
        self.mode_mask = np.all(np.abs(self.k_int) != nyq, axis=0)
        #: sharp 2/3-rule mask for quadratic products
        self.dealias_mask = (
            np.all(np.abs(self.k_int) <= n // 3, axis=0) & self.mode_mask
        )
        # index map realizing m -> -m per axis
        self._neg = (n - np.arange(n)) % n

    def coords(self) -> tuple[np.ndarray, ...]:
        """Physical coordinate meshes, one array per axis."""
        x = np.arange(self.n) * (self.period / self.n)
        return tuple(np.meshgrid(*([x] * self.d), indexing="ij"))

    def reflect(self, coeffs: np.ndarray) -> np.ndarray:
        """Reindex a coefficient array from k to -k (spatial axes last)."""
        out = coeffs
        for ax in range(-self.d, 0):
            out = np.take(out, self._neg, axis=ax)
        return out

    @property
    def k_nyquist(self) -> float:
        """Largest resolved per-axis wavenumber, in units of k_scale."""
        return self.n / 2.0

    @property
    def kmag_max(self) -> float:
        """Largest resolved |k| (corner mode), in units of k_scale."""
        return float(np.sqrt(self.d) * (self.n // 2 - 1))

    def same_as(self, other: "TorusGrid") -> bool:
        return (
            self.d == other.d
            and self.n == other.n
            and np.isclose(self.period, other.period, rtol=0, atol=1e-15)
        )

    def require_same(self, other: "TorusGrid") -> None:
        if not self.same_as(other):
            raise GridError(
                f"grid mismatch: ({self.d},{self.n},{self.period}) vs "
                f"({other.d},{other.n},{other.period})"
            )

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and self.same_as(other)

    def __hash__(self):
        return hash((self.d, self.n, self.period))

    def __repr__(self):
        return f"TorusGrid(d={self.d}, n={self.n}, period={self.period:g})"

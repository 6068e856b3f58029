"""Grids and field containers on the unit torus [0,1]^2.

Conventions used throughout the package:

* collocation points x = (a/n, b/n), 0 <= a, b < n; ``values[a, b]`` holds
  f(x1=a/n, x2=b/n).
* Fourier expansion f(x) = sum_j fhat(j) exp(2*pi*i j.x) over the integer
  lattice j in [-n/2, n/2)^2.  ``coeffs`` is stored in numpy's wrapped fft2
  order, so ``coeffs[k1, k2]`` is fhat(j) with j_i = k_i for k_i < n/2 and
  j_i = k_i - n otherwise.
* the physical wavevector is xi = 2*pi*j; multiplier operators act on
  (2*pi*|j|) unless stated otherwise.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NonFiniteFieldError, SymmetryError

HERMITIAN_TOL = 1e-10


@lru_cache(maxsize=32)
def _tables(n: int):
    j = np.fft.fftfreq(n, d=1.0 / n)  # integer frequencies, wrapped order
    j1 = j[:, None] * np.ones((1, n))
    j2 = np.ones((n, 1)) * j[None, :]
    rho2 = j1 * j1 + j2 * j2
    rho = np.sqrt(rho2)
    nyquist = (np.abs(j1) == n // 2) | (np.abs(j2) == n // 2)
    for a in (j1, j2, rho, rho2, nyquist):
        a.setflags(write=False)
    return j1, j2, rho, rho2, nyquist


@dataclass(frozen=True)
class TorusGrid:
    """An n x n collocation grid on [0,1]^2 with unit Lebesgue measure."""

    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be an even integer >= 8, got {self.n}")

    @property
    def j1(self):
        return _tables(self.n)[0]

    @property
    def j2(self):
        return _tables(self.n)[1]

    @property
    def rho(self):
        """Euclidean lattice norm |j| of each frequency."""
        return _tables(self.n)[2]

    @property
    def rho2(self):
        return _tables(self.n)[3]

    @property
    def nyquist_mask(self):
        """True on modes with j1 or j2 equal to -n/2 (no conjugate partner)."""
        return _tables(self.n)[4]

    @property
    def wavevector_norm(self):
        """2*pi*|j|, the physical wavevector magnitude."""
        return 2.0 * np.pi * self.rho

    def collocation(self):
        """Meshgrid (x1, x2) of the collocation points."""
        x = np.arange(self.n) / self.n
        return x[:, None] * np.ones((1, self.n)), np.ones((self.n, 1)) * x[None, :]


@dataclass(frozen=True)
class PhysicalField:
    """Real samples of a scalar at the grid's collocation points."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"values shape {v.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteFieldError("physical field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients of a real scalar, wrapped fft2 order."""

    grid: TorusGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"coeffs shape {c.shape} does not match grid n={self.grid.n}")
        if not np.all(np.isfinite(c)):
            raise NonFiniteFieldError("spectral field contains non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def mean(self):
        return self.coeffs[0, 0]

    def has_zero_mean(self, tol: float = 1e-13) -> bool:
        amp = np.max(np.abs(self.coeffs))
        return abs(self.mean) <= tol * max(amp, 1.0)


def conj_reverse(c: np.ndarray) -> np.ndarray:
    """conj(c) evaluated at the reflected frequency -j (wrapped indexing)."""
    out = c[::-1, ::-1]
    out = np.roll(out, 1, axis=0)
    out = np.roll(out, 1, axis=1)
    return np.conj(out)


def hermitian_defect(c: np.ndarray) -> float:
    """Max abs deviation from the real-field symmetry fhat(-j) = conj(fhat(j))."""
    return float(np.max(np.abs(c - conj_reverse(c))))


def check_hermitian(F: SpectralField, tol: float = HERMITIAN_TOL):
    amp = float(np.max(np.abs(F.coeffs)))
    if hermitian_defect(F.coeffs) > tol * max(amp, 1.0):
        raise SymmetryError(
            "spectral field violates Hermitian symmetry beyond tolerance "
            f"(defect {hermitian_defect(F.coeffs):.3e}, amplitude {amp:.3e})"
        )


def hermitian_part(c: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian-symmetric subspace (real physical fields)."""
    return 0.5 * (c + conj_reverse(c))


def pad_spectrum(c: np.ndarray, m: int) -> np.ndarray:
    """Embed an n x n wrapped spectrum into an m x m one (m >= n), zero-filled.

    Frequencies keep their identity; the Nyquist row/column of the source is
    placed at index m - n/2 (i.e. still frequency -n/2).
    """
    n = c.shape[0]
    out = np.zeros((m, m), dtype=complex)
    h = n // 2
    out[:h, :h] = c[:h, :h]
    out[:h, m - h:] = c[:h, h:]
    out[m - h:, :h] = c[h:, :h]
    out[m - h:, m - h:] = c[h:, h:]
    return out


def truncate_spectrum(c: np.ndarray, n: int) -> np.ndarray:
    """Restrict an m x m wrapped spectrum to the n x n lattice (m >= n)."""
    m = c.shape[0]
    h = n // 2
    out = np.empty((n, n), dtype=complex)
    out[:h, :h] = c[:h, :h]
    out[:h, h:] = c[:h, m - h:]
    out[h:, :h] = c[m - h:, :h]
    out[h:, h:] = c[m - h:, m - h:]
    return out


def half_spectrum(c: np.ndarray) -> np.ndarray:
    """The rfft-layout half of a wrapped full spectrum (columns 0..n/2)."""
    n = c.shape[0]
    return c[:, : n // 2 + 1]


def half_to_full(ch: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full wrapped spectrum from a Hermitian half-spectrum."""
    h = n // 2
    full = np.zeros((n, n), dtype=complex)
    full[:, : h + 1] = ch
    rows_reflected = np.roll(ch[::-1, :], 1, axis=0)
    full[:, h + 1:] = np.conj(rows_reflected[:, 1:h][:, ::-1])
    return full


def dealias_cutoff(n: int) -> int:
    """Largest per-axis frequency K with n - 2K > K, the 2/3-rule band.

    The strict inequality guarantees that aliases of quadratic products of
    K-band-limited fields land outside the band, so an unpadded product plus
    truncation is exact on the retained modes.
    """
    return (n - 1) // 3


def two_thirds_mask(n: int) -> np.ndarray:
    """Square dealiasing mask keeping |j1|, |j2| <= dealias_cutoff(n)."""
    j1, j2, _, _, _ = _tables(n)
    k = dealias_cutoff(n)
    return (np.abs(j1) <= k) & (np.abs(j2) <= k)

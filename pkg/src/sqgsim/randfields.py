"""Seeded random spectral fields for experiments and inequality trials.

All randomness is drawn once on a fixed 512-point reference lattice and then
restricted to the requested grid, so the same seed gives *identical*
coefficients on shared modes across resolutions.  Refinement comparisons
(n -> 2n) then only add new high modes instead of reshuffling everything,
which is what makes "stable under refinement" a meaningful numerical check.
"""

from functools import lru_cache

import numpy as np

from .grid import SpectralField, TorusGrid, conj_reverse, truncate_spectrum

REFERENCE_N = 512


@lru_cache(maxsize=128)
def _reference_phases(seed: int):
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-np.pi, np.pi, size=(REFERENCE_N, REFERENCE_N))
    # antisymmetric phases give exactly Hermitian unit-modulus factors
    phi = 0.5 * (phi + conj_reverse(-phi).real)
    phi.setflags(write=False)
    return phi


@lru_cache(maxsize=128)
def _reference_gaussian(seed: int):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((REFERENCE_N, REFERENCE_N)) + 1j * rng.standard_normal(
        (REFERENCE_N, REFERENCE_N)
    )
    z = 0.5 * (z + conj_reverse(z))
    z.setflags(write=False)
    return z


def _restricted(ref: np.ndarray, n: int) -> np.ndarray:
    if n > REFERENCE_N:
        raise ValueError(f"grid n={n} exceeds the random reference lattice {REFERENCE_N}")
    return truncate_spectrum(ref, n) if n < REFERENCE_N else ref.copy()


def _cleanup(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    c[0, 0] = 0.0
    c[n // 2, :] = 0.0
    c[:, n // 2] = 0.0
    return c


def rough_field(seed: int, slope: float, n: int, amplitude: float) -> SpectralField:
    """Borderline-regular data: |fhat(j)| = A (1+|j|)^{-(1+slope)}, random phases.

    The field lies in the homogeneous Sobolev space of order b exactly for
    b < slope (2D lattice sum), is real, zero-mean, and bit-reproducible from
    the seed.
    """
    grid = TorusGrid(n)
    phases = _restricted(np.exp(1j * _reference_phases(seed)), n)
    modulus = amplitude * (1.0 + grid.rho) ** (-(1.0 + slope))
    return SpectralField(grid, _cleanup(modulus * phases))


def envelope_field(seed: int, n: int, alpha: float, amplitude: float = 1.0) -> SpectralField:
    """Gaussian field with spectral envelope |j|^{-alpha} (white for alpha=0)."""
    grid = TorusGrid(n)
    z = _restricted(np.array(_reference_gaussian(seed)), n)
    rho = grid.rho.copy()
    rho[0, 0] = 1.0
    env = rho ** (-alpha) if alpha != 0 else np.ones_like(rho)
    return SpectralField(grid, _cleanup(amplitude * env * z))


def single_mode(n: int, j1: int, j2: int, amplitude: float = 1.0) -> SpectralField:
    """Coefficients of amplitude * cos(2 pi (j1 x1 + j2 x2))."""
    grid = TorusGrid(n)
    c = np.zeros((n, n), dtype=complex)
    c[j1 % n, j2 % n] = 0.5 * amplitude
    c[(-j1) % n, (-j2) % n] = 0.5 * amplitude
    return SpectralField(grid, c)


def sine_field(n: int, amplitude: float = 1.0, axis: int = 0) -> SpectralField:
    """Coefficients of amplitude * sin(2 pi x_axis)."""
    grid = TorusGrid(n)
    c = np.zeros((n, n), dtype=complex)
    idx = (1, 0) if axis == 0 else (0, 1)
    neg = ((-idx[0]) % n, (-idx[1]) % n)
    c[idx] = -0.5j * amplitude
    c[neg] = 0.5j * amplitude
    return SpectralField(grid, c)

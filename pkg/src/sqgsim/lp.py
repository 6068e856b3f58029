"""Discrete Littlewood-Paley calculus: dyadic projections, Bony paraproducts,
remainders, and commutators, all built from one concrete smooth bump.

Dyadic bands are measured against the physical wavevector 2*pi*|j|; band j
covers the annulus 2^{j-1} <= 2*pi*|j| <= 2^{j+1}.  The mean mode is excluded
from every projection (the homogeneous decomposition lives modulo constants),
and bilinear objects are evaluated alias-free through 2x zero-padded
transforms.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

from .errors import MeanModeError
from .grid import SpectralField, TorusGrid, pad_spectrum, truncate_spectrum
from .spectral import fft_workers


def _h(s):
    """exp(-1/s) for s > 0, else 0; the standard smooth cutoff ingredient."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi(r):
    """Smooth radial cutoff: 1 for r <= 1, 0 for r >= 2, monotone between."""
    r = np.asarray(r, dtype=float)
    a = _h(2.0 - r)
    b = _h(r - 1.0)
    out = np.zeros_like(r)
    mid = (a + b) > 0
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[r <= 1.0] = 1.0
    out[r >= 2.0] = 0.0
    return out


def phi_hat(r):
    """Dyadic bump chi(r) - chi(2r); supported in 1/2 <= r <= 2, peak 1 at r=1."""
    return chi(r) - chi(2.0 * np.asarray(r, dtype=float))


@dataclass(frozen=True)
class DyadicBump:
    """Handle bundling the concrete cutoff/bump pair used everywhere."""

    def chi(self, r):
        return chi(r)

    def phi_hat(self, r):
        return phi_hat(r)


@dataclass(frozen=True)
class BandRange:
    """Dyadic indices whose annuli meet the grid's nonzero frequencies."""

    j_min: int
    j_max: int

    def __iter__(self):
        return iter(range(self.j_min, self.j_max + 1))

    def __len__(self):
        return self.j_max - self.j_min + 1

    def __contains__(self, j):
        return self.j_min <= j <= self.j_max


def active_bands(grid: TorusGrid) -> BandRange:
    """Bands intersecting (0, sqrt(2)*pi*n], i.e. every resolved frequency.

    The lowest nonzero wavevector is 2*pi, reached first by band 2; the top
    band index is chosen so that the telescoped sum of bumps is exactly 1 up
    to the lattice's corner modes.
    """
    rmax = np.sqrt(2.0) * np.pi * grid.n
    return BandRange(2, int(np.floor(np.log2(rmax))) + 1)


@lru_cache(maxsize=512)
def _delta_symbol(n: int, j: int):
    grid = TorusGrid(n)
    sym = phi_hat(2.0 ** (-j) * grid.wavevector_norm)
    sym.setflags(write=False)
    return sym


@lru_cache(maxsize=512)
def _lowpass_symbol(n: int, j: int):
    """Symbol of S_j = sum_{k <= j-3} Delta_k on the torus, mean excluded.

    Telescoping collapses the sum over all resolved k to a single cutoff
    chi(2^{-(j-3)} * 2*pi*|k|); see the tests for the band-sum cross-check.
    """
    grid = TorusGrid(n)
    sym = chi(2.0 ** (-(j - 3)) * grid.wavevector_norm)
    sym[0, 0] = 0.0
    sym.setflags(write=False)
    return sym


def lp_project(v: SpectralField, j: int, kind: str = "delta") -> SpectralField:
    """Littlewood-Paley projection of one of the four standard kinds.

    kind: "delta" (band j), "S" (low-pass below j-2), "tilde" (bands j-1..j+1),
    "check" (bands j-2..j+2).  Out-of-range deltas are zero fields.
    """
    n = v.grid.n
    if kind == "delta":
        sym = _delta_symbol(n, j)
    elif kind == "S":
        sym = _lowpass_symbol(n, j)
    elif kind == "tilde":
        sym = sum(_delta_symbol(n, k) for k in range(j - 1, j + 2))
    elif kind == "check":
        sym = sum(_delta_symbol(n, k) for k in range(j - 2, j + 3))
    else:
        raise ValueError(f"unknown projection kind {kind!r}")
    return SpectralField(v.grid, v.coeffs * sym)


def _zero_nyquist(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    out = c.copy()
    out[n // 2, :] = 0.0
    out[:, n // 2] = 0.0
    return out


def _pad_phys(c: np.ndarray, m: int) -> np.ndarray:
    """Physical samples of a spectrum on the m x m refinement grid."""
    return _fft.ifft2(pad_spectrum(c, m), workers=fft_workers()) * (m * m)


def _phys_to_trunc(vals: np.ndarray, n: int) -> np.ndarray:
    """Back to coefficients on the n-lattice, asymmetric Nyquist row dropped."""
    m = vals.shape[0]
    c = truncate_spectrum(_fft.fft2(vals, workers=fft_workers()) / (m * m), n)
    return _zero_nyquist(c)


def dealiased_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product, exact on all retained (non-Nyquist) frequencies.

    Both inputs are transformed on a 2x zero-padded grid, so every product
    mode up to twice the band limit is represented exactly and the truncation
    back to the original lattice commits no aliasing error.  The unpaired
    Nyquist modes are dropped on input and output to preserve Hermitian
    symmetry.
    """
    if f.grid.n != g.grid.n:
        raise ValueError(f"grid mismatch: {f.grid.n} vs {g.grid.n}")
    n = f.grid.n
    m = 2 * n
    pf = _pad_phys(_zero_nyquist(f.coeffs), m)
    pg = _pad_phys(_zero_nyquist(g.coeffs), m)
    return SpectralField(f.grid, _phys_to_trunc(pf * pg, n))


def bony_paraproducts(f: SpectralField, g: SpectralField):
    """Bony decomposition (T_f g, T_g f, R(f, g)) of the product fg.

    T_f g = sum_j S_j f Delta_j g, R(f, g) = sum_{|i-j|<=2} Delta_i f Delta_j g;
    the three terms add up to the dealiased product exactly on retained modes
    (mean mode excluded, as every projection is).
    """
    for name, v in (("f", f), ("g", g)):
        if not v.has_zero_mean():
            raise MeanModeError(f"paraproducts need zero-mean {name}")
    if f.grid.n != g.grid.n:
        raise ValueError(f"grid mismatch: {f.grid.n} vs {g.grid.n}")
    n = f.grid.n
    m = 2 * n
    bands = list(active_bands(f.grid))
    fc = _zero_nyquist(f.coeffs)
    gc = _zero_nyquist(g.coeffs)
    df = [_pad_phys(fc * _delta_symbol(n, j), m) for j in bands]
    dg = [_pad_phys(gc * _delta_symbol(n, j), m) for j in bands]

    # running low-pass sums: S_{bands[i]} needs deltas up to bands[i]-3
    def lowpass(deltas, upto_exclusive):
        if upto_exclusive <= 0:
            return 0.0
        return np.sum(deltas[:upto_exclusive], axis=0)

    tfg = np.zeros((m, m), dtype=complex)
    tgf = np.zeros((m, m), dtype=complex)
    rem = np.zeros((m, m), dtype=complex)
    for i, j in enumerate(bands):
        cut = j - 3 - bands[0] + 1  # deltas with k <= j-3
        sf = lowpass(df, cut)
        sg = lowpass(dg, cut)
        tfg += sf * dg[i]
        tgf += sg * df[i]
        lo, hi = max(0, i - 2), min(len(bands), i + 3)
        rem += np.sum(df[lo:hi], axis=0) * dg[i]
    grid = f.grid
    return (
        SpectralField(grid, _phys_to_trunc(tfg, n)),
        SpectralField(grid, _phys_to_trunc(tgf, n)),
        SpectralField(grid, _phys_to_trunc(rem, n)),
    )


def commutator(f: SpectralField, j: int, g: SpectralField, localized: bool = False) -> SpectralField:
    """[f, Delta_j]g = f Delta_j g - Delta_j(fg), products evaluated alias-free.

    With localized=True the result is post-projected by the fattened band
    Delta_tilde_j, the frequency-localized object the sharpest estimates use.
    A constant f is accepted (the commutator then vanishes identically).
    """
    fg = dealiased_product(f, g)
    fdg = dealiased_product(f, lp_project(g, j, "delta"))
    out = SpectralField(f.grid, fdg.coeffs - lp_project(fg, j, "delta").coeffs)
    if localized:
        out = lp_project(out, j, "tilde")
    return out


def localized_commutators(f: SpectralField, g: SpectralField, bands=None):
    """Delta_tilde_j [f, Delta_j] g for every band, sharing the fg product.

    Equivalent to calling commutator(..., localized=True) per band but does
    the expensive padded transforms of f and fg only once.
    """
    n = f.grid.n
    m = 2 * n
    if bands is None:
        bands = list(active_bands(f.grid))
    fc = _zero_nyquist(f.coeffs)
    gc = _zero_nyquist(g.coeffs)
    pf = _pad_phys(fc, m)
    fg = _phys_to_trunc(pf * _pad_phys(gc, m), n)
    out = {}
    for j in bands:
        dsym = _delta_symbol(n, j)
        fdg = _phys_to_trunc(pf * _pad_phys(gc * dsym, m), n)
        comm = fdg - fg * dsym
        tsym = sum(_delta_symbol(n, k) for k in range(j - 1, j + 2))
        out[j] = SpectralField(f.grid, comm * tsym)
    return out

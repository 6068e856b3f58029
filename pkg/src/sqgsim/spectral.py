"""Transforms, Fourier-multiplier operators, and norms on the torus grid.

All multipliers act on the physical wavevector 2*pi*j.  The one deliberate
exception is the analyticity diagnostic, which weights coefficients by the
bare lattice norm |j|; both conventions are kept side by side on purpose and
reported as such.
"""

import os

import numpy as np
import scipy.fft as _fft

from .errors import MeanModeError, NonFiniteFieldError, UnresolvedSpectrumError
from .grid import PhysicalField, SpectralField, TorusGrid, check_hermitian

#: noise-floor factor for spectrum fits: shells whose peak modulus falls
#: below NOISE_FLOOR_FACTOR * eps * amplitude are treated as roundoff.
NOISE_FLOOR_FACTOR = 1e3


def fft_workers() -> int:
    """Worker cap for FFTs, from SQG_THREADS (default: machine cores)."""
    try:
        w = int(os.environ.get("SQG_THREADS", 0))
    except ValueError:
        w = 0
    return w if w > 0 else (os.cpu_count() or 1)


def forward_transform(f: PhysicalField) -> SpectralField:
    """Collocation samples -> Fourier coefficients of sum fhat(j) e^{2 pi i j.x}."""
    n = f.grid.n
    coeffs = _fft.fft2(f.values, workers=fft_workers()) / (n * n)
    return SpectralField(f.grid, coeffs)


def inverse_transform(F: SpectralField, tol: float = 1e-10) -> PhysicalField:
    """Fourier coefficients -> real samples; rejects non-Hermitian input."""
    check_hermitian(F, tol)
    n = F.grid.n
    vals = _fft.ifft2(F.coeffs, workers=fft_workers()) * (n * n)
    return PhysicalField(F.grid, vals.real)


def apply_multiplier(F: SpectralField, symbol: np.ndarray) -> SpectralField:
    """Apply a tabulated Fourier multiplier m(j) to the coefficients."""
    if not np.all(np.isfinite(symbol)):
        raise NonFiniteFieldError("multiplier symbol contains non-finite entries")
    return SpectralField(F.grid, F.coeffs * symbol)


def fractional_power_symbol(grid: TorusGrid, s: float) -> np.ndarray:
    """Symbol of Lambda^s = (-Delta)^{s/2}: (2 pi |j|)^s, 0 at the mean mode."""
    if s == 0:
        return np.ones((grid.n, grid.n))
    w = grid.wavevector_norm
    sym = np.zeros_like(w)
    nz = w > 0
    sym[nz] = w[nz] ** s
    return sym


def apply_fractional_power(F: SpectralField, s: float) -> SpectralField:
    """Lambda^s applied spectrally; negative s requires a zero-mean field."""
    if s < 0 and not F.has_zero_mean():
        raise MeanModeError(f"Lambda^{s} needs a zero-mean field (mean={F.mean:.3e})")
    if s == 0:
        return F
    out = F.coeffs * fractional_power_symbol(F.grid, s)
    out[0, 0] = 0.0
    return SpectralField(F.grid, out)


def riesz_velocity(theta: SpectralField):
    """Velocity u = (-R2 theta, R1 theta); spectrally i(-j2, j1)/|j| * thetahat.

    The Riesz symbol is odd in j, so the unpaired Nyquist modes are zeroed to
    keep the output Hermitian.
    """
    if not theta.has_zero_mean():
        raise MeanModeError(f"Riesz velocity needs zero-mean input (mean={theta.mean:.3e})")
    g = theta.grid
    rho = g.rho.copy()
    rho[0, 0] = 1.0
    q = theta.coeffs / rho
    q[g.nyquist_mask] = 0.0
    q[0, 0] = 0.0
    u1 = SpectralField(g, -1j * g.j2 * q)
    u2 = SpectralField(g, 1j * g.j1 * q)
    return u1, u2

def gradient(F: SpectralField):
    """Spectral gradient (d/dx1, d/dx2); odd symbol, Nyquist zeroed."""
    g = F.grid
    c = F.coeffs.copy()
    c[g.nyquist_mask] = 0.0
    return (
        SpectralField(g, 2j * np.pi * g.j1 * c),
        SpectralField(g, 2j * np.pi * g.j2 * c),
    )


def sobolev_norm(theta: SpectralField, s: float) -> float:
    """Homogeneous Sobolev norm (sum_j (2 pi |j|)^{2s} |thetahat(j)|^2)^{1/2}.

    s = 0 reduces to the L2 norm (mean mode included, Parseval); s != 0 sums
    over j != 0 and negative s requires a zero-mean field.
    """
    c2 = np.abs(theta.coeffs) ** 2
    if s == 0:
        return float(np.sqrt(np.sum(c2)))
    if s < 0 and not theta.has_zero_mean():
        raise MeanModeError("negative-order Sobolev norm needs a zero-mean field")
    w = theta.grid.wavevector_norm
    nz = w > 0
    return float(np.sqrt(np.sum(c2[nz] * w[nz] ** (2.0 * s))))


def lp_norm(f: PhysicalField, p: float) -> float:
    """L^p norm by collocation-grid quadrature (unit measure); p = inf -> max."""
    if p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(np.max(a))
    n2 = f.grid.n ** 2
    return float((np.sum(a ** p) / n2) ** (1.0 / p))


def shell_max_moduli(theta: SpectralField):
    """Peak |thetahat| on integer shells r = round(|j|), r = 1..n/2."""
    g = theta.grid
    r = np.rint(g.rho).astype(int)
    a = np.abs(theta.coeffs)
    rmax = g.n // 2
    out = np.zeros(rmax + 1)
    mask = (r >= 1) & (r <= rmax)
    np.maximum.at(out, r[mask], a[mask])
    return np.arange(1, rmax + 1), out[1:]


def spectrum_decay_radius(theta: SpectralField) -> float:
    """Exponential decay rate of the coefficient envelope (analyticity radius).

    Negative slope of a least-squares fit of log(shell max |thetahat|)
    against the shell radius, over shells above the roundoff floor.
    """
    radii, peaks = shell_max_moduli(theta)
    amp = float(np.max(np.abs(theta.coeffs)))
    floor = NOISE_FLOOR_FACTOR * np.finfo(float).eps * amp
    keep = peaks > floor
    above = int(np.count_nonzero(keep))
    if above == 0:
        raise UnresolvedSpectrumError(
            "no shells above the noise floor; spectrum is unresolved"
        )
    if above == 1:
        return 0.0  # a single shell carries no measurable decay
    x = radii[keep].astype(float)
    y = np.log(peaks[keep])
    slope = np.polyfit(x, y, 1)[0]
    return float(max(-slope, 0.0))


def analyticity_diagnostics(theta: SpectralField, t: float, t0: float):
    """(y, radius) per the exponentially weighted coefficient sum.

    y = sum_{j != 0} |thetahat(j)| e^{(t - t0)|j|/2} with the *lattice* norm
    |j| (this diagnostic is the one place the 2 pi factor is deliberately
    absent).  Coefficients below the roundoff floor (the same
    NOISE_FLOOR_FACTOR * eps * amplitude rule the radius fit uses) are
    excluded: the quadratic term deposits relative-roundoff dust across the
    whole lattice, and the exponential weight would otherwise amplify that
    dust past any bound at large t - t0.  Computed in log space so decayed
    modes under huge weights cannot overflow to NaN.
    """
    g = theta.grid
    a = np.abs(theta.coeffs).ravel()
    rho = g.rho.ravel()
    floor = NOISE_FLOOR_FACTOR * np.finfo(float).eps * float(np.max(a, initial=0.0))
    nz = (rho > 0) & (a > floor)
    if not np.any(nz):
        y = 0.0
    else:
        logterms = np.log(a[nz]) + 0.5 * (t - t0) * rho[nz]
        m = float(np.max(logterms))
        if m - 700.0 > 0:  # genuinely overflowing sum
            y = float(np.inf)
        else:
            y = float(np.exp(m) * np.sum(np.exp(logterms - m)))
    return y, spectrum_decay_radius(theta)

"""Randomized numerical verification of the functional inequalities.

Each verify_* routine measures one inequality on concrete fields and reports
the observed constants; no external reference values exist to assert against.  "The constant is finite" is operationalized as
refinement stability: the ensemble maximum of the measured ratio must grow
by less than REFINEMENT_TOL when the grid is refined dyadically.  Random
ensembles share their low modes across resolutions (see randfields), so the
comparison is a true refinement and not a statistical reshuffle.
"""

from dataclasses import dataclass, field as dfield

import numpy as np

from .errors import HypothesisError, TrialSkipped
from .grid import PhysicalField, SpectralField
from .lp import active_bands, bony_paraproducts, dealiased_product, localized_commutators, commutator, lp_project
from .randfields import envelope_field
from .solver import semigroup_apply
from .spectral import apply_fractional_power, inverse_transform, lp_norm, sobolev_norm

REFINEMENT_TOL = 0.10
#: analytically forced sandwich constants from the band support [2^{j-1}, 2^{j+1}]
def sandwich_constants(gamma: float):
    return 2.0 ** (-gamma - 1.0), 2.0 ** (gamma - 1.0)


@dataclass
class InequalityTrial:
    inequality_id: str
    params: dict
    seed: int | None
    lhs: float
    rhs: float
    ratio: float
    details: dict = dfield(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.ratio) and self.ratio >= 0):
            raise ValueError(f"trial ratio must be finite and >= 0, got {self.ratio}")


@dataclass
class ConstantReport:
    inequality_id: str
    ensemble_size: int
    max_ratio: float
    refinement_growth: float | None
    verdict: str
    details: dict = dfield(default_factory=dict)


def _hdot(v: SpectralField, s: float) -> float:
    """Homogeneous Sobolev norm modulo constants (mean mode dropped)."""
    if s != 0 and not v.has_zero_mean():
        c = v.coeffs.copy()
        c[0, 0] = 0.0
        v = SpectralField(v.grid, c)
    return sobolev_norm(v, s)


def verify_semigroup_block(v: SpectralField, j: int, gamma: float, t_list) -> InequalityTrial:
    """Two-sided decay bound for the semigroup on one dyadic block.

    e^{-2^{gamma j + 1} lambda' t} ||D_j v|| <= ||G(t) D_j v|| <=
    e^{-2^{gamma j + 1} lambda t} ||D_j v|| with the support-forced pair
    lambda = 2^{-gamma-1}, lambda' = 2^{gamma-1}.  ratio is the worst
    relative violation over t_list (0 when the sandwich holds).
    """
    if any(t < 0 for t in t_list):
        raise HypothesisError("semigroup sandwich needs t >= 0")
    dj = lp_project(v, j, "delta")
    base = sobolev_norm(dj, 0.0)
    if base == 0.0:
        raise TrialSkipped(f"band {j} carries no energy")
    lam, lamp = sandwich_constants(gamma)
    scale = 2.0 ** (gamma * j + 1.0)
    worst = 0.0
    emp = []
    for t in t_list:
        mid = sobolev_norm(semigroup_apply(dj, gamma, t), 0.0)
        lower = np.exp(-scale * lamp * t) * base
        upper = np.exp(-scale * lam * t) * base
        worst = max(worst, (lower - mid) / base, (mid - upper) / base)
        if t > 0 and mid > 0:
            emp.append(-np.log(mid / base) / (scale * t))
    return InequalityTrial(
        inequality_id="semigroup-sandwich",
        params={"j": j, "gamma": gamma, "t_list": list(t_list)},
        seed=None,
        lhs=lam,
        rhs=lamp,
        ratio=max(worst, 0.0),
        details={"empirical_lambda": (min(emp), max(emp)) if emp else None},
    )


def verify_linear_smoothing(v: SpectralField, gamma: float, s: float, t_grid) -> InequalityTrial:
    """Smoothing of the semigroup out of L2.

    Measures sup_t t^{s/gamma} ||G(t) v||_{H^s} / ||v||_{L2}, the discrete
    L^{gamma/s} time norm of ||G(t) v||_{H^s} (log-uniform quadrature) when
    0 < s <= gamma/2, and whether the weighted norm decreases toward t -> 0.
    """
    if s < 0:
        raise HypothesisError("linear smoothing needs s >= 0")
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if t_grid.size == 0:
        raise ValueError("empty t_grid")
    w = v.grid.wavevector_norm.ravel()
    c2 = np.abs(v.coeffs).ravel() ** 2
    nz = w > 0
    l2 = np.sqrt(np.sum(c2))
    if l2 == 0.0:
        raise TrialSkipped("zero field")
    pw = w[nz] ** (2.0 * s) if s != 0 else np.ones(nz.sum())
    with np.errstate(under="ignore"):
        hs = np.sqrt(
            np.array([np.sum(pw * c2[nz] * np.exp(-2.0 * t * w[nz] ** gamma)) for t in t_grid])
        )
    weighted = t_grid ** (s / gamma) * hs / l2
    sup_ratio = float(np.max(weighted))
    timenorm = None
    if 0 < s <= gamma / 2.0:
        p = gamma / s
        # integral in d(log t): integrand h(t)^p * t
        integrand = hs ** p * t_grid
        timenorm = float(np.trapezoid(integrand, np.log(t_grid)) ** (1.0 / p) / l2)
    trend_ok = bool(s == 0 or (weighted[0] <= weighted[1] <= weighted[2])) if t_grid.size >= 3 else True
    return InequalityTrial(
        inequality_id="linear-smoothing",
        params={"gamma": gamma, "s": s, "t_min": float(t_grid[0]), "t_max": float(t_grid[-1])},
        seed=None,
        lhs=sup_ratio,
        rhs=1.0,
        ratio=sup_ratio,
        details={"timenorm_ratio": timenorm, "small_t_trend_ok": trend_ok},
    )


def besov_w_norm(v: SpectralField, s: float, p: float) -> float:
    """Square-function Sobolev norm: || (sum_k |2^{ks} D_k v|^2)^{1/2} ||_{L^p}."""
    sq = np.zeros((v.grid.n, v.grid.n))
    for k in active_bands(v.grid):
        dk = lp_project(v, k, "delta")
        if not np.any(dk.coeffs):
            continue
        vals = inverse_transform(dk).values
        sq += (2.0 ** (k * s) * vals) ** 2
    return lp_norm(PhysicalField(v.grid, np.sqrt(sq)), p)


def verify_product_estimates(f: SpectralField, g: SpectralField, params: dict) -> InequalityTrial:
    """One of the bilinear estimates; params["which"] picks it.

    Tfg:     ||T_f g||_{H^{s+t-1}} <= C ||f||_{H^s} ||g||_{H^t}   (s < 1)
    R:       same for the remainder R(f, g)                       (s + t > 0)
    product: same for fg                                          (s, t < 1, s + t > 0)
    leibniz: ||fg||_{W^{s,p}} <= C(||f||_{W^{s,p1}} ||g||_{L^{p2}}
                                   + ||f||_{L^{p1'}} ||g||_{W^{s,p2'}})
    """
    which = params["which"]
    s, t = float(params.get("s", 0.0)), float(params.get("t", 0.0))
    if which == "Tfg" and not s < 1:
        raise HypothesisError(f"T_f g estimate needs s < 1, got s={s}")
    if which == "R" and not s + t > 0:
        raise HypothesisError(f"remainder estimate needs s + t > 0, got {s + t}")
    if which == "product" and not (s < 1 and t < 1 and s + t > 0):
        raise HypothesisError(f"product estimate needs s, t < 1 and s + t > 0, got ({s}, {t})")

    if which == "leibniz":
        p, p1, p2, p1p, p2p = (float(params[k]) for k in ("p", "p1", "p2", "p1p", "p2p"))
        if s < 0:
            raise HypothesisError("fractional Leibniz needs s >= 0")
        for name, val in (("p", p), ("p1", p1), ("p2", p2), ("p1p", p1p), ("p2p", p2p)):
            if not 1.0 < val < np.inf:
                raise HypothesisError(f"Leibniz exponent {name} must be in (1, inf), got {val}")
        if abs(1 / p1 + 1 / p2 - 1 / p) > 1e-12 or abs(1 / p1p + 1 / p2p - 1 / p) > 1e-12:
            raise HypothesisError("Leibniz exponents must satisfy 1/p = 1/p1+1/p2 = 1/p1'+1/p2'")
        fg = dealiased_product(f, g)
        lhs = besov_w_norm(fg, s, p)
        rhs = besov_w_norm(f, s, p1) * lp_norm(inverse_transform(g), p2) + lp_norm(
            inverse_transform(f), p1p
        ) * besov_w_norm(g, s, p2p)
        if rhs == 0.0:
            raise TrialSkipped("degenerate Leibniz right-hand side")
        return InequalityTrial(
            "fractional-leibniz", dict(params), params.get("seed"), lhs, rhs, lhs / rhs
        )

    rhs = _hdot(f, s) * _hdot(g, t)
    if rhs == 0.0:
        raise TrialSkipped("zero right-hand side")
    if which == "product":
        num = dealiased_product(f, g)
    else:
        tfg, tgf, rem = bony_paraproducts(f, g)
        num = tfg if which == "Tfg" else rem
    lhs = _hdot(num, s + t - 1.0)
    ident = {"Tfg": "paraproduct-Tfg", "R": "paraproduct-R", "product": "product-sobolev"}[which]
    return InequalityTrial(ident, dict(params), params.get("seed"), lhs, rhs, lhs / rhs)


def commutator_hypotheses_ok(m: float, s: float, t: float, localized: bool) -> bool:
    base = s < 2 and t < 1 and m + s + t > 0
    if localized:
        return base
    return base and m >= 0 and s >= 1


def verify_commutator_estimate(
    f: SpectralField, g: SpectralField, m: float, s: float, t: float, localized: bool = True
) -> InequalityTrial:
    """Band-wise commutator estimate; reports the l2 aggregate of

    a_j = 2^{(s+t-1) j} ||D~_j [f, D_j] g||_{H^m}
          / (||f||_{H^{m+s}} ||g||_{H^t} + ||f||_{H^s} ||g||_{H^{m+t}})

    which measures the product C * ||c_j||_{l2} of the estimate (the two
    factors are not separable).  localized=False uses the unlocalized
    commutator and the stricter hypothesis set (m >= 0, 1 <= s).
    """
    if not commutator_hypotheses_ok(m, s, t, localized):
        raise HypothesisError(
            f"commutator hypotheses violated: m={m}, s={s}, t={t}, localized={localized}"
        )
    den = _hdot(f, m + s) * _hdot(g, t) + _hdot(f, s) * _hdot(g, m + t)
    if den == 0.0:
        raise TrialSkipped("zero denominator: f or g vanishes")
    bands = list(active_bands(f.grid))
    if localized:
        comms = localized_commutators(f, g, bands)
    else:
        comms = {j: commutator(f, j, g, localized=False) for j in bands}
    a = np.array([2.0 ** ((s + t - 1.0) * j) * _hdot(comms[j], m) / den for j in bands])
    agg = float(np.sqrt(np.sum(a * a)))
    return InequalityTrial(
        inequality_id="commutator-localized" if localized else "commutator",
        params={"m": m, "s": s, "t": t},
        seed=None,
        lhs=agg,
        rhs=1.0,
        ratio=agg,
        details={"a_j": {int(j): float(v) for j, v in zip(bands, a)}},
    )


def verify_bernstein(ensemble, p: float, q: float, s: float) -> ConstantReport:
    """Bernstein multiplier bound and L^p -> L^q embedding on dyadic blocks.

    Collects, over all fields and active bands, the ratios
      ||Lambda^s D_j v||_{L^p} / (2^{js} ||D_j v||_{L^p})           (two-sided)
      ||D_j v||_{L^q} / (2^{(2/p - 2/q) j} ||D_j v||_{L^p})         (one-sided)
    The verdict checks the two-sided ratio stays in a positive interval of
    spread at most 2^{2|s|} (the band support width).
    """
    if not (1 <= p <= q):
        raise HypothesisError(f"Bernstein needs 1 <= p <= q, got p={p}, q={q}")
    ratios_mult, ratios_embed = [], []
    count = 0
    for v in ensemble:
        count += 1
        for j in active_bands(v.grid):
            dj = lp_project(v, j, "delta")
            if not np.any(dj.coeffs):
                continue
            dj_p = lp_norm(inverse_transform(dj), p)
            if dj_p == 0.0:
                continue
            lam_s = apply_fractional_power(dj, s)
            ratios_mult.append(lp_norm(inverse_transform(lam_s), p) / (2.0 ** (j * s) * dj_p))
            dj_q = lp_norm(inverse_transform(dj), q)
            ratios_embed.append(dj_q / (2.0 ** ((2.0 / p - 2.0 / q) * j) * dj_p))
    ratios_mult = np.array(ratios_mult)
    ratios_embed = np.array(ratios_embed)
    spread = float(ratios_mult.max() / ratios_mult.min())
    ok = ratios_mult.min() > 0 and spread <= 2.0 ** (2.0 * abs(s)) + 1e-9 and np.isfinite(ratios_embed.max())
    return ConstantReport(
        inequality_id="bernstein",
        ensemble_size=count,
        max_ratio=float(ratios_embed.max()),
        refinement_growth=None,
        verdict="pass" if ok else "fail",
        details={
            "p": p, "q": q, "s": s,
            "multiplier_interval": (float(ratios_mult.min()), float(ratios_mult.max())),
            "multiplier_spread": spread,
            "spread_bound": 2.0 ** (2.0 * abs(s)),
            "embedding_max": float(ratios_embed.max()),
        },
    )


def _sample_admissible_tuples(rng, count):
    """Random (m, s, t) satisfying the localized commutator hypotheses, with
    envelope-compatible bounds (m+s and m+t stay integrable against the
    battery's fixed field envelopes)."""
    out = []
    while len(out) < count:
        m = rng.uniform(0.0, 0.6)
        s = rng.uniform(0.9, 1.9)
        t = rng.uniform(-0.3, 0.9)
        if m + s + t > 0.3 and m + s <= 2.2 and m + t <= 1.4 and s < 2 and t < 1:
            out.append((round(m, 3), round(s, 3), round(t, 3)))
    return out


def commutator_stability_report(
    n_list, tuples, n_pairs: int, seed: int, envelopes=(3.6, 2.8)
) -> list:
    """ConstantReport per (m, s, t): ensemble max of ||a_j||_{l2} at each grid
    size, with growth measured across consecutive refinements."""
    alpha_f, alpha_g = envelopes
    reports = []
    per_tuple = {tup: [] for tup in tuples}
    for n in n_list:
        agg = {tup: [] for tup in tuples}
        for k in range(n_pairs):
            f = envelope_field(seed + k, n, alpha_f)
            g = envelope_field(seed + 5000 + k, n, alpha_g)
            bands = list(active_bands(f.grid))
            comms = localized_commutators(f, g, bands)
            norms_cache = {}
            for (m, s, t) in tuples:
                den = _hdot(f, m + s) * _hdot(g, t) + _hdot(f, s) * _hdot(g, m + t)
                a2 = 0.0
                for j in bands:
                    key = (j, m)
                    if key not in norms_cache:
                        norms_cache[key] = _hdot(comms[j], m)
                    a_j = 2.0 ** ((s + t - 1.0) * j) * norms_cache[key] / den
                    a2 += a_j * a_j
                agg[(m, s, t)].append(np.sqrt(a2))
        for tup in tuples:
            per_tuple[tup].append(max(agg[tup]))
    for tup, maxima in per_tuple.items():
        growths = [b / a - 1.0 for a, b in zip(maxima, maxima[1:])]
        worst = max(growths) if growths else 0.0
        reports.append(
            ConstantReport(
                inequality_id="commutator-localized",
                ensemble_size=n_pairs,
                max_ratio=float(maxima[-1]),
                refinement_growth=float(worst),
                verdict="pass" if worst < REFINEMENT_TOL else "fail",
                details={
                    "m": tup[0], "s": tup[1], "t": tup[2],
                    "grids": list(n_list),
                    "maxima": [float(v) for v in maxima],
                },
            )
        )
    return reports


def run_battery(n: int = 128, seed: int = 0, gammas=(0.6, 1.0, 1.5), n_pairs: int = 10,
                commutator_grids=(64, 128), extra_tuples: int = 2) -> list:
    """The full inequality battery at grid size n (refining from n/2).

    Returns a list of ConstantReports; every verdict must be "pass" for the
    battery to count as clean.  Sizes are modest by default; the acceptance
    suite runs the heavier desk-scale variant.
    """
    reports = []

    # Bernstein, both halves, p in {2, inf}
    for p, q, s in ((2.0, np.inf, 0.5), (np.inf, np.inf, 0.5), (2.0, np.inf, 1.0)):
        ens = [envelope_field(seed + 100 + i, n, 1.0) for i in range(n_pairs)]
        rep = verify_bernstein(ens, p, q, s)
        coarse = verify_bernstein(
            [envelope_field(seed + 100 + i, n // 2, 1.0) for i in range(n_pairs)], p, q, s
        )
        growth = rep.max_ratio / coarse.max_ratio - 1.0
        rep.refinement_growth = float(growth)
        if not (growth < REFINEMENT_TOL) or coarse.verdict != "pass":
            rep.verdict = "fail"
        reports.append(rep)

    # semigroup sandwich: zero violations allowed (up to roundoff)
    worst = 0.0
    trials = 0
    for gamma in gammas:
        v = envelope_field(seed + 300, n, 0.8)
        for j in active_bands(v.grid):
            try:
                tr = verify_semigroup_block(v, j, gamma, (0.01, 0.1, 1.0))
            except TrialSkipped:
                continue
            trials += 1
            worst = max(worst, tr.ratio)
    reports.append(
        ConstantReport(
            inequality_id="semigroup-sandwich",
            ensemble_size=trials,
            max_ratio=float(worst),
            refinement_growth=None,
            verdict="pass" if worst <= 1e-12 else "fail",
            details={"gammas": list(gammas), "worst_relative_violation": float(worst)},
        )
    )

    # linear smoothing at gamma = 1
    t_grid = np.geomspace(1e-4, 1.0, 64 * 4 + 1)  # >= 64 nodes per decade
    for s in (0.25, 0.5):
        sups, trends, timenorms = [], [], []
        for sz in (n // 2, n):
            v = envelope_field(seed + 400, sz, 0.0)
            tr = verify_linear_smoothing(v, 1.0, s, t_grid)
            sups.append(tr.ratio)
            trends.append(tr.details["small_t_trend_ok"])
            timenorms.append(tr.details["timenorm_ratio"])
        growth = sups[1] / sups[0] - 1.0
        tn_growth = timenorms[1] / timenorms[0] - 1.0
        ok = growth < REFINEMENT_TOL and abs(tn_growth) < REFINEMENT_TOL and all(trends)
        reports.append(
            ConstantReport(
                inequality_id="linear-smoothing",
                ensemble_size=2,
                max_ratio=float(sups[1]),
                refinement_growth=float(growth),
                verdict="pass" if ok else "fail",
                details={"s": s, "timenorm": timenorms[1], "timenorm_growth": float(tn_growth),
                         "trend_ok": all(trends)},
            )
        )

    # bilinear estimates at (s, t) = (0.9, 0.5)
    s, t = 0.9, 0.5
    for which in ("Tfg", "R", "product"):
        maxima = []
        for sz in (n // 2, n):
            ratios = []
            for k in range(n_pairs):
                f = envelope_field(seed + 500 + k, sz, 2.4)
                g = envelope_field(seed + 5500 + k, sz, 2.0)
                ratios.append(
                    verify_product_estimates(f, g, {"which": which, "s": s, "t": t}).ratio
                )
            maxima.append(max(ratios))
        growth = maxima[1] / maxima[0] - 1.0
        reports.append(
            ConstantReport(
                inequality_id={"Tfg": "paraproduct-Tfg", "R": "paraproduct-R",
                               "product": "product-sobolev"}[which],
                ensemble_size=n_pairs,
                max_ratio=float(maxima[1]),
                refinement_growth=float(growth),
                verdict="pass" if growth < REFINEMENT_TOL else "fail",
                details={"s": s, "t": t},
            )
        )

    # fractional Leibniz
    maxima = []
    lparams = {"which": "leibniz", "s": 0.5, "p": 2.0, "p1": 4.0, "p2": 4.0, "p1p": 4.0, "p2p": 4.0}
    for sz in (n // 2, n):
        ratios = []
        for k in range(max(n_pairs // 2, 3)):
            f = envelope_field(seed + 700 + k, sz, 2.0)
            g = envelope_field(seed + 7700 + k, sz, 2.0)
            ratios.append(verify_product_estimates(f, g, lparams).ratio)
        maxima.append(max(ratios))
    growth = maxima[1] / maxima[0] - 1.0
    reports.append(
        ConstantReport(
            inequality_id="fractional-leibniz",
            ensemble_size=max(n_pairs // 2, 3),
            max_ratio=float(maxima[1]),
            refinement_growth=float(growth),
            verdict="pass" if growth < REFINEMENT_TOL else "fail",
            details={k: v for k, v in lparams.items() if k != "which"},
        )
    )

    # commutator: the two canonical tuples at gamma=1 plus random admissible ones
    tuples = [(0.0, 1.0, 0.25), (0.5, 4.0 / 3.0, 1.0 / 3.0)]
    tuples += _sample_admissible_tuples(np.random.default_rng(seed + 900), extra_tuples)
    reports.extend(
        commutator_stability_report(commutator_grids, tuples, n_pairs, seed + 1000)
    )
    return reports

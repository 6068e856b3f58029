"""Configuration parsing, binary snapshots, CSV time series, JSON reports.

Everything here is bit-faithful: snapshots round-trip byte-for-byte, CSV
columns carry 17 significant digits (exact for doubles), and JSON bodies are
deterministic functions of (config, seed) with timestamps segregated into
metadata.
"""

import json
import struct
from dataclasses import dataclass, field as dfield
from datetime import datetime, timezone

import numpy as np

from .errors import (
    BadMagicError,
    ConfigError,
    TruncatedSnapshotError,
    VersionMismatchError,
)
from .grid import SpectralField, TorusGrid, half_spectrum, half_to_full
from .solver import NormTrajectory, SimulationState

SNAPSHOT_MAGIC = b"SQGF"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIdd")  # magic, version, n, gamma, t
SCHEMA_VERSION = 1


# ---------------------------------------------------------------- run config

_INITIAL_KINDS = ("rough", "sine", "zero")

_TOP_KEYS = {
    "gamma": float,
    "n": int,
    "dt": float,
    "t_end": float,
    "seed": int,
    "initial": dict,
    "beta_list": list,
    "beta_pairs": list,
    "t0": float,
    "sample": dict,
    "output_dir": str,
    "scheme": str,
    "dealias": str,
    "linear_only": bool,
}
_REQUIRED = ("gamma", "n", "dt", "t_end", "seed", "initial", "beta_list", "beta_pairs", "sample")
_INITIAL_KEYS = {"kind": str, "s": float, "amplitude": float}
_SAMPLE_KEYS = {"kind": str, "count": int}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; carries every solver/experiment field."""

    gamma: float
    n: int
    dt: float
    t_end: float
    seed: int
    initial_kind: str
    initial_s: float
    initial_amplitude: float
    beta_list: tuple
    beta_pairs: tuple
    t0: float = 1.0
    sample_kind: str = "log"
    sample_count: int = 96
    output_dir: str = "."
    scheme: str = "etd2rk"
    dealias: str = "pad2x+two-thirds"
    linear_only: bool = False


def _typecheck(value, typ, name):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field {name!r} must be a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field {name!r} must be an integer, got {value!r}")
        return value
    if not isinstance(value, typ):
        raise ConfigError(f"field {name!r} must be {typ.__name__}, got {value!r}")
    return value


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse a JSON run configuration; unknown keys are rejected by name."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    for key in raw:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{source}: unknown key {key!r}")
    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"{source}: missing required key {key!r}")
    vals = {k: _typecheck(v, _TOP_KEYS[k], k) for k, v in raw.items()}

    init = vals["initial"]
    for key in init:
        if key not in _INITIAL_KEYS:
            raise ConfigError(f"{source}: unknown key initial.{key}")
    kind = _typecheck(init.get("kind", "rough"), str, "initial.kind")
    if kind not in _INITIAL_KINDS:
        raise ConfigError(f"{source}: initial.kind must be one of {_INITIAL_KINDS}, got {kind!r}")
    s = _typecheck(init.get("s", 1.05), float, "initial.s")
    amplitude = _typecheck(init.get("amplitude", 1.0), float, "initial.amplitude")

    sample = vals["sample"]
    for key in sample:
        if key not in _SAMPLE_KEYS:
            raise ConfigError(f"{source}: unknown key sample.{key}")
    sample_kind = _typecheck(sample.get("kind", "log"), str, "sample.kind")
    if sample_kind not in ("log", "linear"):
        raise ConfigError(f"{source}: sample.kind must be log or linear, got {sample_kind!r}")
    sample_count = _typecheck(sample.get("count", 96), int, "sample.count")
    if sample_count < 1:
        raise ConfigError(f"{source}: sample.count must be positive")

    beta_list = tuple(_typecheck(b, float, "beta_list[*]") for b in vals["beta_list"])
    pairs = []
    for i, pair in enumerate(vals["beta_pairs"]):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"{source}: beta_pairs[{i}] must be a [b1, b2] pair")
        pairs.append((
            _typecheck(pair[0], float, f"beta_pairs[{i}][0]"),
            _typecheck(pair[1], float, f"beta_pairs[{i}][1]"),
        ))

    return RunConfig(
        gamma=vals["gamma"], n=vals["n"], dt=vals["dt"], t_end=vals["t_end"],
        seed=vals["seed"], initial_kind=kind, initial_s=s, initial_amplitude=amplitude,
        beta_list=beta_list, beta_pairs=tuple(pairs),
        t0=vals.get("t0", 1.0),
        sample_kind=sample_kind, sample_count=sample_count,
        output_dir=vals.get("output_dir", "."),
        scheme=vals.get("scheme", "etd2rk"),
        dealias=vals.get("dealias", "pad2x+two-thirds"),
        linear_only=vals.get("linear_only", False),
    )


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON text; parse(serialize(parse(x))) is a fixed point."""
    doc = {
        "gamma": cfg.gamma, "n": cfg.n, "dt": cfg.dt, "t_end": cfg.t_end,
        "seed": cfg.seed,
        "initial": {"kind": cfg.initial_kind, "s": cfg.initial_s,
                    "amplitude": cfg.initial_amplitude},
        "beta_list": list(cfg.beta_list),
        "beta_pairs": [list(p) for p in cfg.beta_pairs],
        "t0": cfg.t0,
        "sample": {"kind": cfg.sample_kind, "count": cfg.sample_count},
        "output_dir": cfg.output_dir,
        "scheme": cfg.scheme,
        "dealias": cfg.dealias,
        "linear_only": cfg.linear_only,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------ SQGF snapshots

def write_snapshot(state: SimulationState, gamma: float, path):
    """Binary state snapshot: 28-byte header + half-spectrum payload."""
    n = state.theta.grid.n
    payload = np.ascontiguousarray(half_spectrum(state.theta.coeffs), dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, n, gamma, state.t))
        fh.write(payload.tobytes())


def read_snapshot(path):
    """Read a snapshot; returns (SimulationState, gamma).

    Bad magic, unsupported version, and short payload raise distinct errors;
    nothing is partially constructed.
    """
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise TruncatedSnapshotError(f"{path}: file shorter than the header")
        magic, version, n, gamma, t = _HEADER.unpack(head)
        if magic != SNAPSHOT_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise VersionMismatchError(f"{path}: unsupported version {version}")
        expected = n * (n // 2 + 1) * 16
        payload = fh.read(expected + 1)
        if len(payload) != expected:
            raise TruncatedSnapshotError(
                f"{path}: payload has {len(payload)} bytes, expected {expected}"
            )
    ch = np.frombuffer(payload, dtype="<c16").reshape(n, n // 2 + 1)
    theta = SpectralField(TorusGrid(n), half_to_full(ch, n))
    return SimulationState(t=t, theta=theta, step_count=0), gamma


# ------------------------------------------------------------- CSV artifacts

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_timeseries(traj: NormTrajectory, path):
    """Trajectory CSV: t, l2, linf, hs:<s>..., grad_linf, y_diag, radius."""
    if not traj.times:
        raise ValueError("cannot write an empty trajectory")
    names = traj.column_names()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        for t, rec in zip(traj.times, traj.records):
            fh.write(",".join([_fmt(t)] + [_fmt(rec[k]) for k in names]) + "\n")


def read_timeseries(path):
    """Parse a trajectory CSV back into (times, {column: array})."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if header[0] != "t":
        raise ValueError(f"{path}: first column must be t, got {header[0]!r}")
    data = np.array([[float(v) for v in row] for row in rows])
    cols = {name: data[:, i] for i, name in enumerate(header)}
    return cols.pop("t"), cols


def write_spectrum_csv(theta: SpectralField, path):
    """Shell spectrum CSV consumed by the plotting frontend."""
    from .spectral import shell_max_moduli

    radii, peaks = shell_max_moduli(theta)
    a = np.abs(theta.coeffs)
    r = np.rint(theta.grid.rho).astype(int)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("shell,max_abs_coeff,sum_abs_coeff\n")
        for rad, peak in zip(radii, peaks):
            total = float(np.sum(a[r == rad]))
            fh.write(f"{rad},{_fmt(peak)},{_fmt(total)}\n")


# ------------------------------------------------------------- JSON reports

def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def estimate_report_doc(report) -> dict:
    meta = dict(report.metadata)
    meta["timestamp"] = _timestamp()
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "estimates",
        "metadata": meta,
        "claims": report.claims,
    }


def constant_reports_doc(reports, metadata=None) -> dict:
    meta = dict(metadata or {})
    meta["timestamp"] = _timestamp()
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "inequality-constants",
        "metadata": meta,
        "reports": [
            {
                "inequality_id": r.inequality_id,
                "ensemble_size": r.ensemble_size,
                "max_ratio": r.max_ratio,
                "refinement_growth": r.refinement_growth,
                "verdict": r.verdict,
                "details": r.details,
            }
            for r in reports
        ],
    }


def write_json_report(doc: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_json_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    if doc.get("kind") not in ("estimates", "inequality-constants"):
        raise ConfigError(f"{path}: unknown report kind {doc.get('kind')!r}")
    return doc


def strip_timestamps(doc: dict) -> dict:
    """Copy of a report document with volatile metadata removed (for
    byte-comparison of deterministic bodies)."""
    out = json.loads(json.dumps(doc))
    out.get("metadata", {}).pop("timestamp", None)
    return out

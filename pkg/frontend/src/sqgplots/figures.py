"""Figure rendering from persisted simulation artifacts.

Every number on a figure comes from the CSV/JSON files; nothing is
recomputed.  Renders are deterministic: fixed style, fixed dpi, and a
checksum of the consumed values embedded in the PNG metadata.
"""

import hashlib
import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("smoothing-rates", "decay", "spectrum", "inequality-constants")

STYLE = {
    "figure.figsize": (7.2, 4.8),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


class SchemaError(ValueError):
    """An input file does not match the expected cli schema; the message
    names the offending column or field."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    out_path: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def read_trajectory_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    for col in ("t", "l2", "linf"):
        if col not in header:
            raise SchemaError(f"{path}: missing trajectory column {col!r}")
    data = np.array([[float(v) for v in row] for row in rows]) if rows else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def read_spectrum_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    expected = ["shell", "max_abs_coeff", "sum_abs_coeff"]
    if header != expected:
        raise SchemaError(f"{path}: spectrum header {header} != {expected}")
    data = np.array([[float(v) for v in row] for row in rows])
    return {name: data[:, i] for i, name in enumerate(expected)}


def read_report_json(path, kind):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != 1:
        raise SchemaError(f"{path}: unsupported field schema_version={doc.get('schema_version')!r}")
    if doc.get("kind") != kind:
        raise SchemaError(f"{path}: field kind={doc.get('kind')!r}, expected {kind!r}")
    return doc


def _checksum(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _save(fig, spec, payload):
    meta = {"sqg-input-checksum": _checksum(payload), "Software": "sqg-plots"}
    fig.savefig(spec.out_path, metadata=meta)
    plt.close(fig)


def _classify_inputs(spec):
    csvs = [p for p in spec.inputs if p.endswith(".csv")]
    jsons = [p for p in spec.inputs if p.endswith(".json")]
    return csvs, jsons


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns {"path", "checksum", "annotations", ...}.

    smoothing-rates    trajectory CSV + estimates JSON: log-log norm curves
                       with the report's fitted slopes and the reference
                       slopes -beta/gamma overlaid
    decay              trajectory CSV: semilog decay curves with the e^{-t/4}
                       reference rate
    spectrum           spectrum CSV: per-shell coefficient moduli
    inequality-constants  constants JSON: measured ratios and growths
    """
    with plt.rc_context(STYLE):
        if spec.kind == "smoothing-rates":
            return _render_smoothing(spec)
        if spec.kind == "decay":
            return _render_decay(spec)
        if spec.kind == "spectrum":
            return _render_spectrum(spec)
        return _render_constants(spec)


def _thm1_claims(doc):
    out = []
    for c in doc.get("claims", []):
        cid = c.get("id", "")
        if cid.startswith("thm1:beta="):
            out.append((float(cid.split("=", 1)[1]), c))
    return sorted(out, key=lambda kv: kv[0])


def _render_smoothing(spec):
    csvs, jsons = _classify_inputs(spec)
    if not csvs or not jsons:
        raise SchemaError("smoothing-rates needs a trajectory CSV and an estimates JSON")
    cols = read_trajectory_csv(csvs[0])
    doc = read_report_json(jsons[0], "estimates")
    gamma = float(doc["metadata"]["gamma"])
    t = cols["t"]
    if t.size < 2:
        raise SchemaError(f"{csvs[0]}: trajectory has {t.size} sample(s); need at least 2")
    claims = _thm1_claims(doc)

    annotations = []
    payload = {"t": cols["t"].tolist(), "claims": []}
    if not claims:
        # nothing to fit against: fall back to a decay-only panel
        fig, ax = plt.subplots()
        pos = cols["l2"] > 0
        ax.semilogy(t[pos], cols["l2"][pos], label="L2 norm")
        ax.set_xlabel("t")
        ax.set_ylabel("norm")
        ax.set_title("norm decay (no rate claims in report)")
        ax.legend()
        payload["l2"] = cols["l2"].tolist()
        _save(fig, spec, payload)
        return {"path": spec.out_path, "checksum": _checksum(payload),
                "annotations": annotations, "panels": 1}

    fig, ax = plt.subplots()
    for beta, claim in claims:
        s = 2.0 - gamma + beta
        col = f"hs:{s:.6g}"
        if col not in cols:
            raise SchemaError(f"{csvs[0]}: missing column {col!r} for beta={beta:g}")
        y = cols[col]
        keep = (t > 0) & (y > 0)
        ax.loglog(t[keep], y[keep], lw=1.2, label=f"order {s:g} norm")
        slope = float(claim["measured"]["slope"])
        win = claim["measured"].get("window")
        if win:
            ta, tb = win
            mask = keep & (t >= ta) & (t <= tb)
            if np.any(mask):
                t0 = t[mask][0]
                y0 = y[mask][0]
                tt = np.geomspace(ta, tb, 32)
                ax.loglog(tt, y0 * (tt / t0) ** slope, "k--", lw=0.9)
                ref = -beta / gamma
                ax.loglog(tt, y0 * (tt / t0) ** ref, "r:", lw=0.9)
        text = f"beta={beta:g}: slope {slope:.3f}"
        annotations.append(text)
        payload["claims"].append({"beta": beta, "slope": slope, "window": win,
                                  "norm": y.tolist()})
    ax.set_xlabel("t")
    ax.set_ylabel("homogeneous Sobolev norm")
    ax.set_title("smoothing rates; dashed: fitted slope, dotted: -beta/gamma reference")
    ax.legend(title="\n".join(annotations), fontsize=7)
    _save(fig, spec, payload)
    return {"path": spec.out_path, "checksum": _checksum(payload),
            "annotations": annotations, "panels": 1 + len(claims)}


def _render_decay(spec):
    csvs, _ = _classify_inputs(spec)
    if not csvs:
        raise SchemaError("decay needs a trajectory CSV")
    cols = read_trajectory_csv(csvs[0])
    t = cols["t"]
    if t.size < 2:
        raise SchemaError(f"{csvs[0]}: trajectory has {t.size} sample(s); need at least 2")
    fig, axes = plt.subplots(1, 2, figsize=STYLE["figure.figsize"])
    ax = axes[0]
    for key, label in (("l2", "L2"), ("linf", "sup norm")):
        pos = cols[key] > 0
        ax.semilogy(t[pos], cols[key][pos], label=label)
    if np.any(cols["l2"] > 0):
        y0 = cols["l2"][cols["l2"] > 0][0]
        ax.semilogy(t, y0 * np.exp(-t / 4.0), "r:", label="e^{-t/4} reference")
    ax.set_xlabel("t")
    ax.set_title("norm decay")
    ax.legend(fontsize=7)
    ax2 = axes[1]
    weighted = (1.0 + t) * cols["linf"]
    pos = weighted > 0
    ax2.semilogy(t[pos], weighted[pos], label="(1+t) sup norm")
    ax2.set_xlabel("t")
    ax2.set_title("weighted sup-norm decay")
    ax2.legend(fontsize=7)
    fig.tight_layout()
    payload = {"t": t.tolist(), "l2": cols["l2"].tolist(), "linf": cols["linf"].tolist()}
    _save(fig, spec, payload)
    return {"path": spec.out_path, "checksum": _checksum(payload),
            "annotations": [], "panels": 2}


def _render_spectrum(spec):
    csvs, _ = _classify_inputs(spec)
    if not csvs:
        raise SchemaError("spectrum needs a spectrum CSV")
    cols = read_spectrum_csv(csvs[0])
    fig, ax = plt.subplots()
    for key, label in (("max_abs_coeff", "shell max"), ("sum_abs_coeff", "shell sum")):
        pos = cols[key] > 0
        ax.semilogy(cols["shell"][pos], cols[key][pos], label=label)
    ax.set_xlabel("shell radius |j|")
    ax.set_ylabel("coefficient modulus")
    ax.set_title("spectrum snapshot")
    ax.legend(fontsize=7)
    payload = {k: v.tolist() for k, v in cols.items()}
    _save(fig, spec, payload)
    return {"path": spec.out_path, "checksum": _checksum(payload),
            "annotations": [], "panels": 1}


def _render_constants(spec):
    _, jsons = _classify_inputs(spec)
    if not jsons:
        raise SchemaError("inequality-constants needs a constants JSON")
    doc = read_report_json(jsons[0], "inequality-constants")
    reports = doc.get("reports", [])
    if not reports:
        raise SchemaError(f"{jsons[0]}: field reports is empty")
    labels, ratios, growths, colors = [], [], [], []
    for i, r in enumerate(reports):
        details = r.get("details", {})
        suffix = ""
        for k in ("s", "t", "m", "p"):
            if k in details:
                suffix += f" {k}={details[k]:g}" if isinstance(details[k], (int, float)) else ""
        labels.append(f"{r['inequality_id']}{suffix} [{i}]")
        ratios.append(max(r["max_ratio"], 1e-300))
        growths.append(r["refinement_growth"])
        colors.append("tab:blue" if r["verdict"] == "pass" else "tab:red")
    fig, ax = plt.subplots(figsize=(7.2, 0.36 * len(labels) + 1.6))
    ypos = np.arange(len(labels))
    ax.barh(ypos, ratios, color=colors)
    ax.set_yticks(ypos, labels, fontsize=6)
    ax.set_xscale("log")
    ax.set_xlabel("measured ratio (ensemble max)")
    ax.invert_yaxis()
    for y, (ratio, growth) in enumerate(zip(ratios, growths)):
        note = "growth n/a" if growth is None else f"growth {100 * growth:+.2f}%"
        ax.annotate(note, (ratio, y), fontsize=6, va="center", xytext=(3, 0),
                    textcoords="offset points")
    fig.tight_layout()
    payload = {"reports": [[r["inequality_id"], r["max_ratio"], r["refinement_growth"]]
                           for r in reports]}
    _save(fig, spec, payload)
    return {"path": spec.out_path, "checksum": _checksum(payload),
            "annotations": [], "panels": 1}

"""Planted-instance generation, bound-check sweeps, and report emission.

A planted instance carries a known feasible rank-k candidate, so its masked
cost certifies an upper bound on the optimum; every verifier in the sweep
checks its inequality against that certificate. Corrupted entries live only
where the mask is zero and dominate the clean ones in magnitude, so any
solver that ignores the mask fails loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import boolean as bl
from . import io as mio
from . import masks as mk
from . import protocols as pr
from . import solver as sv
from . import structural as st
from . import tensor as tn
from .errors import ParameterError, ResourceError
from .linalg import LowRankFactor, masked_cost

DEFAULT_CORRUPTION = 5.0

COLUMNS = (
    "pattern", "n", "k", "k_prime", "eps1", "eps2", "delta_slack",
    "seed", "cost", "opt_upper", "rhs", "satisfied",
)

STAT_COLUMNS = (
    "family", "n", "delta", "seed", "rectangles", "one_count", "cap",
    "err_on_zeros", "err_on_ones",
)


@dataclass
class PlantedInstance:
    domain: str
    A: np.ndarray
    W: object
    L_star: object
    opt_upper: float
    k: int
    noise_sigma: float
    corruption_scale: float
    seed: int


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    protocol_stats: list = field(default_factory=list)

    @property
    def all_satisfied(self) -> bool:
        return all(r["satisfied"] for r in self.rows)


def gen_planted(
    domain: str,
    pattern,
    n: int,
    k: int,
    noise_sigma: float = 0.0,
    corruption_scale: float = DEFAULT_CORRUPTION,
    seed: int = 0,
) -> PlantedInstance:
    """Build (A, W, L*) with corruption only off-support.

    Real domains scale corruption to corruption_scale * ||L*||_F / n per
    entry; the Boolean domain reads both scales as independent flip
    probabilities (off-support and on-support respectively).
    """
    if noise_sigma < 0 or corruption_scale < 0:
        raise ParameterError("noise and corruption scales must be nonnegative")
    if k < 1:
        raise ParameterError(f"k={k} must be positive")
    salts = {"matrix": 1, "tensor3": 2, "boolean": 3}
    if domain not in salts:
        raise ParameterError(f"unknown domain {domain!r}")
    rng = np.random.default_rng([seed, n, k, salts[domain]])
    if domain == "matrix":
        W = mk.make_mask(pattern, n)
        B = W.bitmap.astype(np.float64)
        U = rng.standard_normal((n, k))
        V = rng.standard_normal((n, k))
        L = LowRankFactor(U, V, k)
        base = U @ V.T
        scale = corruption_scale * float(np.linalg.norm(base)) / n
        A = (
            base
            + (1.0 - B) * scale * rng.standard_normal((n, n))
            + B * noise_sigma * rng.standard_normal((n, n))
        )
        opt = masked_cost(A, W, L)
    elif domain == "tensor3":
        W = tn.make_mask3(pattern, n)
        B = W.bitmap.astype(np.float64)
        U = rng.standard_normal((n, k))
        V = rng.standard_normal((n, k))
        Z = rng.standard_normal((n, k))
        L = tn.CPFactor(U, V, Z, k)
        base = L.value()
        scale = corruption_scale * float(np.sqrt(np.sum(base * base))) / n
        A = (
            base
            + (1.0 - B) * scale * rng.standard_normal((n, n, n))
            + B * noise_sigma * rng.standard_normal((n, n, n))
        )
        opt = tn.masked_cost3(A, W, L)
    elif domain == "boolean":
        if corruption_scale > 1 or noise_sigma > 1:
            raise ParameterError("boolean flip probabilities must be <= 1")
        W = mk.make_mask(pattern, n)
        B = W.bitmap
        U = (rng.random((n, k)) < 0.5).astype(np.uint8)
        V = (rng.random((k, n)) < 0.5).astype(np.uint8)
        L = bl.BoolFactor(U, V, k)
        base = L.value()
        flips = np.where(
            B == 0,
            rng.random((n, n)) < corruption_scale,
            rng.random((n, n)) < noise_sigma,
        )
        A = (base ^ flips.astype(np.uint8)).astype(np.uint8)
        opt = float(bl.bool_cost(A, base, W))
    else:
        raise ParameterError(f"unknown domain {domain!r}")
    return PlantedInstance(
        domain=domain, A=A, W=W, L_star=L, opt_upper=float(opt), k=k,
        noise_sigma=noise_sigma, corruption_scale=corruption_scale, seed=seed,
    )


# ---------------------------------------------------------------------------
# sweep configuration

_DEFAULTS = {
    "routes": "t1",
    "sizes": "32,64",
    "eps": "0.1,0.25,0.5",
    "seeds": "0",
    "k": "2",
    "t": "2",
    "p": "4",
    "method": "exact",
    "noise_sigma": "0.0",
    "corruption_scale": str(DEFAULT_CORRUPTION),
    "stats_trials": "0",
}

ROUTES = ("t1", "t2", "t3", "t4", "a2")


def parse_config(source) -> dict:
    """Accept a config dict, key-value text, or a path to such text."""
    if isinstance(source, dict):
        raw = {k: str(v) for k, v in source.items()}
    else:
        text = str(source)
        if "=" not in text and "\n" not in text:
            try:
                with open(text, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as e:
                raise ResourceError(f"cannot read config {source}: {e}") from e
        raw = mio.parse_kv(text)
    cfg = dict(_DEFAULTS)
    for key, val in raw.items():
        if key not in cfg:
            raise ParameterError(f"unknown config key {key!r}")
        cfg[key] = val
    out = {
        "routes": tuple(s.strip() for s in cfg["routes"].split(",") if s.strip()),
        "sizes": tuple(int(s) for s in cfg["sizes"].split(",") if s.strip()),
        "eps": tuple(float(s) for s in cfg["eps"].split(",") if s.strip()),
        "seeds": tuple(int(s) for s in cfg["seeds"].split(",") if s.strip()),
        "k": int(cfg["k"]),
        "t": int(cfg["t"]),
        "p": int(cfg["p"]),
        "method": cfg["method"],
        "noise_sigma": float(cfg["noise_sigma"]),
        "corruption_scale": float(cfg["corruption_scale"]),
        "stats_trials": int(cfg["stats_trials"]),
    }
    for route in out["routes"]:
        if route not in ROUTES:
            raise ParameterError(f"unknown route {route!r}")
    if out["method"] not in ("exact", "randomized"):
        raise ParameterError(f"unknown method {cfg['method']!r}")
    return out


def sparse_pattern(n: int, t: int, seed: int) -> mk.Sparse:
    """Deterministic random zero sets, t per row."""
    rng = np.random.default_rng([seed, n, t, 0x5A])
    zs = tuple(
        tuple(sorted(int(j) for j in rng.choice(n, size=t, replace=False)))
        for _ in range(n)
    )
    return mk.Sparse(zero_sets=zs, t=t)


def _route_pattern(route: str, n: int, t: int, p: int, seed: int):
    if route == "t1":
        return mk.Diagonal()
    if route in ("t2", "a2"):
        return sparse_pattern(n, t, seed)
    if route == "t3":
        return mk.ToeplitzModP(p=p)
    if route == "t4":
        return mk.Banded(p=p)
    raise ParameterError(f"unknown route {route!r}")


def _row_from_bicriteria(rep: sv.BicriteriaReport) -> dict:
    return {
        "pattern": rep.pattern, "n": rep.n, "k": rep.k, "k_prime": rep.k_prime,
        "eps1": rep.eps1, "eps2": rep.eps2, "delta_slack": rep.delta_slack,
        "seed": rep.seed, "cost": rep.cost, "opt_upper": rep.opt_upper,
        "rhs": rep.rhs, "satisfied": rep.satisfied, "note": "",
    }


def run_cell(route: str, n: int, eps: float, seed: int, cfg: dict) -> dict:
    """One sweep cell: plant, verify through the route, map to a row."""
    t, p, k = cfg["t"], cfg["p"], cfg["k"]
    pattern = _route_pattern(route, n, t, p, seed)
    inst = gen_planted(
        "matrix", pattern, n, k,
        noise_sigma=cfg["noise_sigma"],
        corruption_scale=cfg["corruption_scale"],
        seed=seed,
    )
    if route == "a2":
        rep = st.verify_structural_bicriteria(
            inst.A, inst.W, k, eps, inst.opt_upper,
            method=cfg["method"], seed=seed,
        )
        return {
            "pattern": rep.pattern, "n": rep.n, "k": rep.k,
            "k_prime": rep.k_prime, "eps1": rep.eps1, "eps2": rep.eps,
            "delta_slack": 0.0, "seed": seed, "cost": rep.cost,
            "opt_upper": rep.opt_upper, "rhs": rep.rhs,
            "satisfied": rep.satisfied, "note": "",
        }
    L2 = inst.L_star if route == "t4" else None
    rep = sv.verify_bicriteria(
        inst.A, inst.W, k, eps,
        opt_upper=inst.opt_upper, L_for_eps2=L2, seed=seed,
        method=cfg["method"],
    )
    return _row_from_bicriteria(rep)


def _stats_row(route: str, n: int, eps: float, seed: int, cfg: dict) -> dict | None:
    if route == "a2" or cfg["stats_trials"] <= 0:
        return None
    pattern = _route_pattern(route, n, cfg["t"], cfg["p"], seed)
    W = mk.make_mask(pattern, n)
    spec = sv._spec_for_pattern(W, eps)
    P = pr.sample_partition(spec, seed=seed)
    e1, e0 = pr.empirical_error_rates(spec, W, cfg["stats_trials"], seed=seed)
    return {
        "family": spec.family, "n": n, "delta": eps, "seed": seed,
        "rectangles": len(P.rectangles), "one_count": P.one_count,
        "cap": pr.transcript_cap(spec), "err_on_zeros": e0, "err_on_ones": e1,
    }


def run_suite(config) -> ExperimentReport:
    """Cross-product sweep; cell failures become unsatisfied rows."""
    cfg = parse_config(config)
    report = ExperimentReport()
    for route in cfg["routes"]:
        for n in cfg["sizes"]:
            for eps in cfg["eps"]:
                for seed in cfg["seeds"]:
                    try:
                        row = run_cell(route, n, eps, seed, cfg)
                    except Exception as e:  # recorded, never aborts the sweep
                        row = {
                            "pattern": route, "n": n, "k": cfg["k"],
                            "k_prime": 0, "eps1": eps, "eps2": 0.0,
                            "delta_slack": 0.0, "seed": seed,
                            "cost": float("nan"), "opt_upper": float("nan"),
                            "rhs": float("nan"), "satisfied": False,
                            "note": f"{type(e).__name__}: {e}",
                        }
                    report.rows.append(row)
                    stats = _stats_row(route, n, eps, seed, cfg)
                    if stats is not None:
                        report.protocol_stats.append(stats)
    report.rows.sort(key=lambda r: (r["pattern"], r["n"], r["eps1"], r["seed"]))
    report.protocol_stats.sort(
        key=lambda r: (r["family"], r["n"], r["delta"], r["seed"])
    )
    return report


# ---------------------------------------------------------------------------
# emission

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(report: ExperimentReport, format: str, path: str) -> None:
    """Write bound rows (csv: documented 12 columns; json adds notes/stats)."""
    if format == "csv":
        lines = [",".join(COLUMNS)]
        for r in report.rows:
            lines.append(",".join(_fmt(r[c]) for c in COLUMNS))
        payload = "\n".join(lines) + "\n"
    elif format == "json":
        def clean(r):
            out = {}
            for key, v in r.items():
                if key == "note" and not v:
                    continue
                if isinstance(v, float) and math.isnan(v):
                    v = None
                out[key] = v
            return out

        payload = json.dumps(
            {
                "rows": [clean(r) for r in report.rows],
                "protocol_stats": [clean(r) for r in report.protocol_stats],
            },
            indent=2,
        ) + "\n"
    else:
        raise ParameterError(f"unknown report format {format!r}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as e:
        raise ResourceError(f"cannot write report {path}: {e}") from e


def _parse_cell(col: str, text: str):
    if col in ("n", "k", "k_prime", "seed"):
        return int(text)
    if col == "satisfied":
        return text == "true"
    if col == "pattern":
        return text
    return float(text)


def load_rows(path: str) -> list:
    """Read back an emitted report (csv or json) as row dicts."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ResourceError(f"cannot read report {path}: {e}") from e
    if text.lstrip().startswith("{"):
        return json.loads(text)["rows"]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split(",")
    if tuple(header) != COLUMNS:
        raise ParameterError(f"unexpected report header in {path}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        rows.append({c: _parse_cell(c, v) for c, v in zip(header, parts)})
    return rows

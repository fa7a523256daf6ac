"""Batch front-end: scenario configs in, CSV tables and JSON verdict reports out.

Subcommands::

    awlab validate <config>
    awlab run <config> [--out DIR] [--workers N]
    awlab table <config> --function NAME
    awlab order <config> --function NAME --phi NAME

The config grammar is documented in the README.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .awcore import QParam
from .errors import AWLabError, ParseError, ValidationError
from .funcmodel import ExpPoly, MeroFn, Polynomial, TruncatedQProduct, ZeroPoleFn
from .growth import PhiFn, SFn, alpha_gamma, phi_problems, phi_order, s_problems
from .nevanlinna import (
    GRID_RATIO,
    characteristic_T,
    characteristic_T_reciprocal,
    default_r_max,
    geometric_grid,
    nevanlinna_table,
)
from . import verify as V

FUNCTION_KINDS = ("polynomial", "rational", "qproduct", "exppoly")
CHECKS = (
    "jensen",
    "lemma_a",
    "logdiff_m",
    "pointwise_logdiff",
    "counting",
    "dq_order",
    "exceptional_measure",
    "theorem_order",
)
TOP_KEYS = {"functions", "q_values", "phi", "s", "grid", "epsilon", "checks", "output", "workers"}
CHECK_KEYS = {
    "check",
    "functions",
    "q",
    "phi",
    "s",
    "case",
    "epsilon",
    "alpha1",
    "R_rule",
    "C",
    "x_points",
    "x_range",
    "n",
    "tolerance",
    "grid",
}
GRID_KEYS = {"r_min", "r_max", "ratio"}
JENSEN_TOL = 1e-5
EXIT_OK, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


# ---------------------------------------------------------------------------
# scalar helpers


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


def _real(value) -> float:
    return float(value)


def _emit_complex(c: complex):
    c = complex(c)
    if c.imag == 0:
        return float(c.real)
    sign = "+" if math.copysign(1.0, c.imag) > 0 else "-"
    return f"{c.real!r}{sign}{abs(c.imag)!r}j"


def fmt(x: float) -> str:
    """Fixed-width float format with 15 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.14e}"


# ---------------------------------------------------------------------------
# config


@dataclass
class ScenarioConfig:
    functions: dict[str, dict] = field(default_factory=dict)
    q_values: list[complex] = field(default_factory=list)
    phi: dict[str, dict] = field(default_factory=dict)
    s: dict[str, dict] = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    epsilon: float = V.EPSILON_DEFAULT
    checks: list[dict] = field(default_factory=list)
    output: str = "out"
    workers: int = 1

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, complex):
                return _emit_complex(v)
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v

        return {
            "functions": enc(self.functions),
            "q_values": enc(self.q_values),
            "phi": enc(self.phi),
            "s": enc(self.s),
            "grid": enc(self.grid),
            "epsilon": self.epsilon,
            "checks": enc(self.checks),
            "output": self.output,
            "workers": self.workers,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def function(self, name: str) -> MeroFn:
        return build_function(self.functions[name])

    def phi_fn(self, name: str) -> PhiFn:
        fdef = self.phi[name]
        return PhiFn(fdef["family"], fdef["param"])

    def s_fn(self, name: str) -> SFn:
        fdef = self.s[name]
        return SFn(fdef["family"], fdef["param"])


def build_function(fdef: dict) -> MeroFn:
    kind = fdef["kind"]
    if kind == "polynomial":
        return Polynomial(tuple(fdef["coeffs"]))
    if kind == "rational":
        zeros = tuple((c, 1) for c in fdef["zeros"])
        poles = tuple((c, 1) for c in fdef["poles"])
        return ZeroPoleFn(fdef["scale"], zeros, poles)
    if kind == "qproduct":
        return TruncatedQProduct(fdef["scale"], fdef["q"], fdef["terms"])
    if kind == "exppoly":
        return ExpPoly(Polynomial(tuple(fdef["coeffs"])))
    raise ValueError(f"unknown function kind {kind!r}")


class _Collector:
    def __init__(self):
        self.problems: list[str] = []

    def add(self, where: str, msg: str) -> None:
        self.problems.append(f"{where}: {msg}")

    def convert(self, where: str, conv, value, default=None):
        try:
            return conv(value)
        except (TypeError, ValueError):
            self.add(where, f"cannot read {value!r}")
            return default


def _unknown_keys(col: _Collector, where: str, data: dict, allowed: set) -> None:
    for k in data:
        if k not in allowed:
            col.add(where, f"unknown key {k!r}")


def _parse_function(col: _Collector, name: str, raw) -> dict | None:
    where = f"functions.{name}"
    if not isinstance(raw, dict):
        col.add(where, "must be a mapping")
        return None
    kind = raw.get("kind")
    if kind not in FUNCTION_KINDS:
        col.add(where, f"kind must be one of {', '.join(FUNCTION_KINDS)}")
        return None
    allowed = {
        "polynomial": {"kind", "coeffs"},
        "rational": {"kind", "scale", "zeros", "poles"},
        "qproduct": {"kind", "scale", "q", "terms"},
        "exppoly": {"kind", "coeffs"},
    }[kind]
    _unknown_keys(col, where, raw, allowed)
    fdef: dict[str, Any] = {"kind": kind}
    if kind in ("polynomial", "exppoly"):
        coeffs = raw.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            col.add(where, "coeffs must be a non-empty list (ascending powers)")
            return None
        fdef["coeffs"] = [col.convert(where, _complex, c, 0j) for c in coeffs]
    elif kind == "rational":
        fdef["scale"] = col.convert(where, _complex, raw.get("scale", 1.0), 1 + 0j)
        for key in ("zeros", "poles"):
            vals = raw.get(key, [])
            if not isinstance(vals, list):
                col.add(where, f"{key} must be a list")
                vals = []
            fdef[key] = [col.convert(where, _complex, c, 0j) for c in vals]
    else:
        fdef["scale"] = col.convert(where, _complex, raw.get("scale", 1.0), 1 + 0j)
        fdef["q"] = col.convert(where, _complex, raw.get("q"), 0.5 + 0j)
        fdef["terms"] = col.convert(where, int, raw.get("terms"), 1)
    try:
        build_function(fdef)
    except (ValueError, AWLabError) as exc:
        col.add(where, str(exc))
        return None
    return fdef


def _parse_named(col: _Collector, section: str, raw, problems_fn) -> dict:
    out: dict[str, dict] = {}
    if raw is None:
        return out
    if not isinstance(raw, dict):
        col.add(section, "must be a mapping of names")
        return out
    for name, fdef in raw.items():
        where = f"{section}.{name}"
        if not isinstance(fdef, dict) or "family" not in fdef:
            col.add(where, "needs a family")
            continue
        _unknown_keys(col, where, fdef, {"family", "param"})
        fam = str(fdef["family"]).lower()
        default = 1.0 if section == "phi" else 2.0
        param = col.convert(where, _real, fdef.get("param", default), default)
        probs = problems_fn(fam, param)
        for p in probs:
            col.add(where, p)
        if not probs:
            out[str(name)] = {"family": fam, "param": param}
    return out


def _parse_grid(col: _Collector, where: str, raw) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        col.add(where, "must be a mapping")
        return {}
    _unknown_keys(col, where, raw, GRID_KEYS)
    out = {k: col.convert(where, _real, raw[k]) for k in sorted(raw) if k in GRID_KEYS}
    if out.get("ratio") is not None and not out["ratio"] > 1:
        col.add(where, "ratio must exceed 1")
    if out.get("r_min") is not None and not out["r_min"] > 0:
        col.add(where, "r_min must be positive")
    return out


def _q_ok(col: _Collector, where: str, q: complex) -> bool:
    if not 0 < abs(q) < 1:
        col.add(where, f"0<|q|<1 violated (|q| = {abs(q):.6g})")
        return False
    return True


def _check_hypotheses(col: _Collector, where: str, check: str, phi: PhiFn | None, s: SFn | None, case):
    """Labelled diagnostics for (phi, s, check) triples that break a hypothesis."""
    if check in ("logdiff_m", "pointwise_logdiff"):
        if case == "a" and s is not None and not (s.s_over_r_unbounded and s.convex and s.differentiable):
            col.add(where, f"case (a) needs s(r)/r unbounded, convex and differentiable; {s.name} is not")
        if case == "b":
            if s is not None and s.s_over_r_unbounded:
                col.add(where, f"case (b) needs bounded s(r)/r; {s.name} is unbounded")
            if phi is not None and not phi.subadditive:
                col.add(where, f"case (b) needs subadditive phi; {phi.name} is not")
    if check == "pointwise_logdiff" and phi is not None and not phi.vanishing_log_ratio:
        col.add(where, f"phi = {phi.name} violates limsup log phi(r)/log r = 0")
    if check in ("pointwise_logdiff", "counting", "dq_order", "exceptional_measure"):
        if phi is not None and s is not None and not alpha_gamma(phi, s).alpha > 0:
            col.add(where, "alpha_{phi,s} must be positive")
    if check in ("counting", "theorem_order") and phi is not None and not phi.subadditive:
        col.add(where, f"phi = {phi.name} must be subadditive")


NEEDS_PAIR = {"logdiff_m", "pointwise_logdiff", "counting", "dq_order", "exceptional_measure", "theorem_order"}


def _parse_check(col: _Collector, idx: int, raw, cfg: ScenarioConfig) -> dict | None:
    where = f"checks[{idx}]"
    if not isinstance(raw, dict):
        col.add(where, "must be a mapping")
        return None
    _unknown_keys(col, where, raw, CHECK_KEYS)
    name = raw.get("check")
    if name not in CHECKS:
        col.add(where, f"check must be one of {', '.join(CHECKS)}")
        return None
    where = f"{where} ({name})"
    out: dict[str, Any] = {"check": name}
    fns = raw.get("functions", sorted(cfg.functions))
    if not isinstance(fns, list):
        col.add(where, "functions must be a list of names")
        fns = []
    for fn in fns:
        if fn not in cfg.functions:
            col.add(where, f"unknown function {fn!r}")
    out["functions"] = [str(fn) for fn in fns]
    qs = raw.get("q")
    if qs is not None:
        qs = qs if isinstance(qs, list) else [qs]
        qv = [col.convert(where, _complex, q) for q in qs]
        out["q"] = [q for q in qv if q is not None and _q_ok(col, where, q)]
    phi = s = None
    if name in NEEDS_PAIR or "phi" in raw or "s" in raw:
        for key, table in (("phi", cfg.phi), ("s", cfg.s)):
            ref = raw.get(key)
            if ref is None:
                col.add(where, f"needs {key}")
            elif ref not in table:
                col.add(where, f"unknown {key} {ref!r}")
            else:
                out[key] = str(ref)
        if "phi" in out:
            phi = cfg.phi_fn(out["phi"])
        if "s" in out:
            s = cfg.s_fn(out["s"])
    case = raw.get("case")
    if name in ("logdiff_m", "pointwise_logdiff"):
        if case is None and s is not None:
            case = "a" if s.s_over_r_unbounded else "b"
        if case not in ("a", "b"):
            col.add(where, "case must be 'a' or 'b'")
        else:
            out["case"] = case
    if "epsilon" in raw:
        eps = col.convert(where, _real, raw["epsilon"])
        if eps is not None and not eps > 0:
            col.add(where, "epsilon must be positive")
        out["epsilon"] = eps
    if name == "lemma_a":
        a1 = col.convert(where, _real, raw.get("alpha1", 0.5))
        if a1 is not None and not 0 < a1 < 1:
            col.add(where, "alpha1 must lie in (0, 1)")
        out["alpha1"] = a1
        rule = raw.get("R_rule", "Br")
        if rule not in ("Br", "rlogr"):
            col.add(where, "R_rule must be 'Br' or 'rlogr'")
        out["R_rule"] = rule
        if "C" in raw:
            C = col.convert(where, _real, raw["C"])
            if C is not None and not C > 0:
                col.add(where, "C must be positive")
            out["C"] = C
        if "x_points" in raw:
            pts = raw["x_points"]
            if not isinstance(pts, list) or not pts:
                col.add(where, "x_points must be a non-empty list")
            else:
                out["x_points"] = [col.convert(where, _complex, p) for p in pts]
        if "x_range" in raw:
            xr = raw["x_range"]
            if not (isinstance(xr, list) and len(xr) == 2):
                col.add(where, "x_range must be [r_min, r_max]")
            else:
                out["x_range"] = [col.convert(where, _real, v) for v in xr]
    if name == "theorem_order":
        n = col.convert(where, int, raw.get("n", 1))
        if n is not None and n < 1:
            col.add(where, "n must be >= 1")
        out["n"] = n
    if "tolerance" in raw:
        out["tolerance"] = col.convert(where, _real, raw["tolerance"])
    if "grid" in raw:
        out["grid"] = _parse_grid(col, f"{where}.grid", raw["grid"])
    if name != "exceptional_measure":
        for fn in out["functions"]:
            fdef = cfg.functions.get(fn)
            if fdef is None:
                continue
            f = build_function(fdef)
            if getattr(f, "is_constant", False):
                col.add(where, f"function {fn!r} is constant, so D_q f vanishes identically")
    _check_hypotheses(col, where, name, phi, s, out.get("case"))
    return out


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario; every violation is reported at once."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ParseError(str(problem), mark.line + 1, mark.column + 1) from exc
        raise ParseError(str(problem)) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError("top level must be a mapping", 1, 1)
    col = _Collector()
    _unknown_keys(col, "config", raw, TOP_KEYS)
    cfg = ScenarioConfig()
    fns = raw.get("functions") or {}
    if not isinstance(fns, dict):
        col.add("functions", "must be a mapping of names")
        fns = {}
    for name, fdef in fns.items():
        parsed = _parse_function(col, str(name), fdef)
        if parsed is not None:
            cfg.functions[str(name)] = parsed
    qs = raw.get("q_values", [0.5])
    if not isinstance(qs, list) or not qs:
        col.add("q_values", "must be a non-empty list")
        qs = []
    for q in qs:
        qv = col.convert("q_values", _complex, q)
        if qv is not None and _q_ok(col, "q_values", qv):
            cfg.q_values.append(qv)
    cfg.phi = _parse_named(col, "phi", raw.get("phi"), phi_problems)
    cfg.s = _parse_named(col, "s", raw.get("s"), lambda fam, p: s_problems(fam, p, 10.0))
    cfg.grid = _parse_grid(col, "grid", raw.get("grid"))
    eps = col.convert("epsilon", _real, raw.get("epsilon", V.EPSILON_DEFAULT), V.EPSILON_DEFAULT)
    if not eps > 0:
        col.add("epsilon", "must be positive")
    cfg.epsilon = eps
    cfg.output = str(raw.get("output", "out"))
    workers = col.convert("workers", int, raw.get("workers", 1), 1)
    if workers < 1:
        col.add("workers", "must be >= 1")
    cfg.workers = workers
    checks = raw.get("checks") or []
    if not isinstance(checks, list):
        col.add("checks", "must be a list")
        checks = []
    for i, c in enumerate(checks):
        parsed = _parse_check(col, i, c, cfg)
        if parsed is not None:
            cfg.checks.append(parsed)
    if col.problems:
        raise ValidationError(col.problems)
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# jobs


@dataclass(frozen=True)
class Job:
    key: str
    kind: str
    function: str
    index: int = -1
    q: complex = 0.5


def plan_jobs(cfg: ScenarioConfig) -> list[Job]:
    jobs = [Job(f"table:{fn}", "table", fn) for fn in sorted(cfg.functions)]
    for i, chk in enumerate(cfg.checks):
        qs = chk.get("q", cfg.q_values)
        for fn in chk["functions"]:
            for j, q in enumerate(qs):
                key = f"check:{i:03d}:{chk['check']}:{fn}:q{j}"
                jobs.append(Job(key, chk["check"], fn, i, q))
    return sorted(jobs, key=lambda j: j.key)


def _grid_for_function(cfg: ScenarioConfig, f: MeroFn, override: dict | None = None) -> list[float]:
    g = {**cfg.grid, **(override or {})}
    r_min = g.get("r_min", 1.0)
    r_max = g.get("r_max") or default_r_max(f)
    r_max = min(r_max, f.r_valid)
    return [float(r) for r in geometric_grid(r_min, r_max, g.get("ratio", GRID_RATIO))]


def _check_grid(cfg: ScenarioConfig, f: MeroFn, chk: dict, phi: PhiFn | None) -> list[float]:
    grid = _grid_for_function(cfg, f, chk.get("grid"))
    if phi is not None:
        grid = [r for r in grid if r >= phi.R0]
    return grid


def _jensen(f: MeroFn, grid: list[float], q: QParam) -> V.Verdict:
    f0 = complex(f.eval(0.0))
    if f0 == 0 or not np.isfinite(f0):
        raise AWLabError("Jensen check needs f(0) finite and nonzero")
    rows = []
    for r in grid:
        lhs = abs(characteristic_T(f, r) - characteristic_T_reciprocal(f, r) - math.log(abs(f0)))
        rows.append((r, lhs, JENSEN_TOL))
    return V.fixed_verdict("jensen", rows, 1.0, notes="|T(r,f) - T(r,1/f) - log|f(0)|| <= tolerance")


def _exceptional(f, q, phi, s, eps, grid) -> V.Verdict:
    params = alpha_gamma(phi, s)
    rho = V.order_for_bounds(f, phi)
    E = V.build_exceptional_set(f, q, phi, rho.value, eps, params.alpha)
    tb = V.tail_bound(E)
    rows = [(r, V.log_measure(E, max(r, 1.0)), tb.value) for r in grid]
    return V.fixed_verdict(
        "exceptional_measure",
        rows,
        1.0,
        notes="log-measure of E on [1, r] against the tail bound",
        hypotheses={"alpha": params.alpha, "rho": rho.value, "rho_source": rho.source},
        provenance=V._provenance(phi, s, q, eps),
        diagnostics={"d_N": tb.d_N, "c_delta": tb.c_delta, "intervals": len(E.intervals)},
    )


def execute_job(cfg_dict: dict, job: Job) -> dict:
    """Run one job; returns ``{"key", "csv"}`` or ``{"key", "verdicts"}`` or ``{"key", "error"}``."""
    cfg = parse_config(yaml.safe_dump(cfg_dict))
    f = cfg.function(job.function)
    try:
        if job.kind == "table":
            grid = _grid_for_function(cfg, f)
            return {"key": job.key, "csv": nevanlinna_table(f, grid).to_csv()}
        chk = cfg.checks[job.index]
        q = QParam(job.q)
        eps = chk.get("epsilon", cfg.epsilon)
        phi = cfg.phi_fn(chk["phi"]) if "phi" in chk else None
        s = cfg.s_fn(chk["s"]) if "s" in chk else None
        grid = _check_grid(cfg, f, chk, phi)
        name = chk["check"]
        if name == "jensen":
            verdicts = [_jensen(f, _grid_for_function(cfg, f, chk.get("grid")), q)]
        elif name == "lemma_a":
            if "x_points" in chk:
                xs = chk["x_points"]
            else:
                lo, hi = chk.get("x_range", [5.0, 50.0])
                xs = V.lemma_a_grid(f, lo, hi)
            verdicts = [V.check_lemma_a(f, q, chk["alpha1"], xs, chk["R_rule"], chk.get("C"))]
        elif name == "logdiff_m":
            verdicts = [V.check_logdiff_m(f, q, phi, s, eps, chk["case"], grid)]
        elif name == "pointwise_logdiff":
            verdicts = list(V.pointwise_logdiff_verdicts(f, q, phi, s, eps, chk["case"], grid))
        elif name == "counting":
            verdicts = V.check_counting_bounds(f, q, phi, s, eps, grid)
        elif name == "dq_order":
            full = _grid_for_function(cfg, f, chk.get("grid"))
            verdicts = [V.check_dq_order(f, q, phi, s, chk.get("tolerance", V.DQ_ORDER_TOL), full)]
        elif name == "exceptional_measure":
            verdicts = [_exceptional(f, q, phi, s, eps, grid)]
        elif name == "theorem_order":
            eq = V.manufacture_equation(f, chk["n"], q)
            full = _grid_for_function(cfg, f, chk.get("grid"))
            verdicts = [
                V.check_theorem_order(eq, f, phi, s, chk.get("tolerance", V.ORDER_BOUND_TOL), full)
            ]
        else:
            raise AWLabError(f"unknown check {name!r}")
    except (AWLabError, ArithmeticError, ValueError) as exc:
        return {"key": job.key, "error": f"{type(exc).__name__}: {exc}"}
    out = []
    for v in verdicts:
        d = v.to_dict()
        d["function"] = job.function
        d["job"] = job.key
        out.append(d)
    return {"key": job.key, "verdicts": out}


def run_jobs(cfg: ScenarioConfig, workers: int | None = None) -> list[dict]:
    workers = cfg.workers if workers is None else workers
    jobs = plan_jobs(cfg)
    data = cfg.to_dict()
    if workers <= 1:
        results = [execute_job(data, j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute_job, [data] * len(jobs), jobs))
    return sorted(results, key=lambda r: r["key"])


# ---------------------------------------------------------------------------
# serialisation


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with fixed-width floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, complex):
        return to_json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(to_json(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + to_json(x, indent + 1) for x in obj) + "\n" + end + "]"
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return to_json(obj.item(), indent)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def summary_line(v: dict) -> str:
    return (
        f"{v['job']} {v['name']} holds={'yes' if v['holds'] else 'no'} "
        f"C={fmt(v['fitted_constant'])} onset={fmt(v['onset_radius'])}"
    )


def run(cfg: ScenarioConfig, out_dir: str | Path | None = None, workers: int | None = None) -> int:
    """Execute every job, write artifacts and return the exit code."""
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    results = run_jobs(cfg, workers)
    verdicts, errors = [], []
    for res in results:
        if "csv" in res:
            fn = res["key"].split(":", 1)[1]
            (out / f"nevanlinna_{fn}.csv").write_text(res["csv"])
        elif "error" in res:
            errors.append({"job": res["key"], "error": res["error"]})
        else:
            verdicts.extend(res["verdicts"])
    if not cfg.checks:
        return EXIT_OK
    report = {"verdicts": verdicts, "errors": errors}
    (out / "verdicts.json").write_text(to_json(report) + "\n")
    lines = [summary_line(v) for v in verdicts] + [f"{e['job']} ERROR {e['error']}" for e in errors]
    (out / "summary.txt").write_text("".join(line + "\n" for line in lines))
    if errors:
        return EXIT_ERROR
    if any(not v["holds"] for v in verdicts):
        return EXIT_FALSE
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _load_or_report(path: str) -> ScenarioConfig | None:
    try:
        return load_config(path)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
    except ValidationError as exc:
        for p in exc.problems:
            print(f"invalid: {p}", file=sys.stderr)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
    return None


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="awlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("validate", help="parse and validate a scenario config")
    p.add_argument("config")
    p = sub.add_parser("run", help="run every job of a scenario")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("table", help="print the Nevanlinna table of one function as CSV")
    p.add_argument("config")
    p.add_argument("--function", required=True)
    p = sub.add_parser("order", help="print the phi-order estimate of one function")
    p.add_argument("config")
    p.add_argument("--function", required=True)
    p.add_argument("--phi", required=True)
    args = parser.parse_args(argv)

    cfg = _load_or_report(args.config)
    if cfg is None:
        return EXIT_ERROR
    if args.command == "validate":
        print(f"ok: {len(cfg.functions)} functions, {len(plan_jobs(cfg))} jobs")
        return EXIT_OK
    if args.command == "run":
        if args.workers is not None and args.workers < 1:
            print("--workers must be >= 1", file=sys.stderr)
            return EXIT_ERROR
        code = run(cfg, args.out, args.workers)
        summary = Path(args.out or cfg.output) / "summary.txt"
        if summary.exists():
            print(summary.read_text(), end="")
        return code
    if args.function not in cfg.functions:
        print(f"unknown function {args.function!r}", file=sys.stderr)
        return EXIT_ERROR
    f = cfg.function(args.function)
    try:
        if args.command == "table":
            sys.stdout.write(nevanlinna_table(f, _grid_for_function(cfg, f)).to_csv())
            return EXIT_OK
        if args.phi not in cfg.phi:
            print(f"unknown phi {args.phi!r}", file=sys.stderr)
            return EXIT_ERROR
        phi = cfg.phi_fn(args.phi)
        est = phi_order(nevanlinna_table(f, _grid_for_function(cfg, f)), phi)
        print(f"{args.function} {phi.name} estimate={fmt(est.estimate)} dispersion={fmt(est.dispersion)} windows={est.windows}")
        return EXIT_OK
    except AWLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

"""``relkit`` command line: JSON documents in, JSON reports out.

Exit codes: 0 success, 1 invariant failure, 2 input error, 3 violated
mathematical precondition.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import platform
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import closability as cl
from . import decompose as dc
from . import dominate as dm
from . import pairs as pr
from . import relation as rl
from . import subspace as sp
from . import suites
from .documents import DocumentError, load, operator_document, relation_document, subspace_json
from .exceptions import (
    ConditionViolation,
    ConsistencyError,
    DimensionError,
    InvalidProjector,
    MonotonicityViolation,
    NoConvergence,
    NonConcaveAscent,
    NotAnOperator,
    NotDominated,
    NotInGraph,
    NotPSD,
    NotRegular,
    NotSingular,
)
from .subspace import DEFAULT_TOL, ToleranceConfig

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3

PRECONDITION_ERRORS = (
    ConditionViolation,
    InvalidProjector,
    MonotonicityViolation,
    NoConvergence,
    NonConcaveAscent,
    NotAnOperator,
    NotInGraph,
    NotPSD,
    NotRegular,
    NotSingular,
)

GROWTH_RATIO = 2.0


class InputError(Exception):
    pass


@dataclass
class Outcome:
    """A finished command: the report plus the in-memory relations it emitted."""

    report: dict
    relations: dict = field(default_factory=dict)
    code: int = EXIT_OK
    reproducer: dict | None = None


# -- helpers ------------------------------------------------------------------

def _plain(x):
    """Convert numpy values into JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    return x


class Ledger:
    """Assertion ledger: every boolean comes with the residual that decided it."""

    def __init__(self):
        self.rows = []

    def check(self, name, observed, tolerance, expected="<= tolerance"):
        observed = float(observed)
        ok = bool(observed <= tolerance)
        self.rows.append({"name": name, "expected": expected, "observed": observed, "tolerance": tolerance, "pass": ok})
        return ok

    def flag(self, name, value, residual, tolerance, expected):
        ok = bool(value) == bool(expected)
        self.rows.append({"name": name, "expected": expected, "observed": bool(value), "residual": float(residual), "tolerance": tolerance, "pass": ok})
        return ok

    @property
    def failed(self):
        return [r["name"] for r in self.rows if not r["pass"]]


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _versions():
    return {"relkit": __version__, "numpy": np.__version__, "python": platform.python_version()}


def _report(command, inputs, results, ledger):
    return {
        "command": command,
        "inputs": inputs,
        "results": results,
        "assertions": ledger.rows,
        "versions": _versions(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _rel_json(t):
    return relation_document(t).to_json()


def _structure(t, tol):
    return {
        "dom": subspace_json(rl.dom(t, tol)),
        "ran": subspace_json(rl.ran(t, tol)),
        "mul": subspace_json(rl.mul(t, tol)),
        "ker": subspace_json(rl.ker(t, tol)),
    }


def _load_doc(path, tol):
    if path is None:
        raise InputError("this command needs --input")
    doc = load(path)
    doc_tol = doc.tol(tol)
    return doc, doc_tol, {"path": str(path), "sha256": _digest(path), "kind": doc.kind}


def _split_json(split, tol):
    res = dc.split_residuals(split, tol)
    return {
        "t1": _rel_json(split.t1),
        "t2": _rel_json(split.t2),
        "q": subspace_json(split.q),
        "canonical_m": subspace_json(split.canonical_m),
        "l_part": subspace_json(split.l_part),
        "flags": split.flags,
        "residuals": res,
    }


def _split_ledger(ledger, split, tol):
    res = dc.split_residuals(split, tol)
    ledger.check("reconstruction t1 + t2 = T", res["reconstruction"], tol.eq)
    ledger.check("ran t1 orthogonal to ran t2", res["range_orthogonality"], tol.contain)
    ledger.check("dom t1 = dom t2 = dom T", res["domain"], tol.eq)


# -- commands -----------------------------------------------------------------

def cmd_classify(args, tol) -> Outcome:
    doc, tol, meta = _load_doc(args.input, tol)
    t = doc.to_relation(tol)
    ta = rl.adjoint(t)
    ledger = Ledger()
    mul_gap = sp.gap(rl.mul(t, tol), sp.Subspace.zero(t.dim_k))
    dense = sp.gap(rl.dom(ta, tol), sp.Subspace.full(t.dim_k))
    sing = rl.singular_residuals(t, tol)
    closure_prod = rl.graph_gap(rl.closure(t), rl.product_space(rl.dom(t, tol), rl.mul(t, tol)))
    is_reg = rl.is_regular(t, tol)
    is_sing = rl.is_singular(t, tol)
    characterizations = {
        "regular": {
            "mul_closure_is_zero": {"holds": mul_gap <= tol.eq, "residual": mul_gap},
            "dom_adjoint_is_dense": {"holds": dense <= tol.eq, "residual": dense},
            "metric_formula": {"holds": cl.is_regular_metric(t, tol)},
        },
        "singular": {
            "dom_adjoint_eq_ker_adjoint": {"holds": sing["dom_adjoint_eq_ker_adjoint"] <= tol.eq, "residual": sing["dom_adjoint_eq_ker_adjoint"]},
            "dom_eq_ker": {"holds": sing["dom_eq_ker"] <= tol.eq, "residual": sing["dom_eq_ker"]},
            "closure_is_product": {"holds": closure_prod <= tol.eq, "residual": closure_prod},
        },
    }
    for group, value in (("regular", is_reg), ("singular", is_sing)):
        for name, entry in characterizations[group].items():
            ledger.flag(f"{group}: {name} agrees", entry["holds"], entry.get("residual", 0.0), tol.eq, value)
    results = {
        "dim_h": t.dim_h,
        "dim_k": t.dim_k,
        "relation": _rel_json(t),
        "adjoint": _rel_json(ta),
        "structure": _structure(t, tol),
        "flags": {"operator": rl.is_operator(t, tol), "regular": is_reg, "singular": is_sing},
        "characterizations": characterizations,
    }
    if t.dim_h == t.dim_k:
        results["flags"]["selfadjoint"] = rl.is_selfadjoint(t, tol)
        results["flags"]["nonnegative"] = rl.is_nonnegative(t, tol)
    return Outcome(_report("classify", [meta], results, ledger), {"relation": t, "adjoint": ta})


def _subspace_input(path, dim, tol):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read file: {exc.strerror}", str(path)) from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from None
    vectors = obj.get("vectors") if isinstance(obj, dict) else None
    if not isinstance(vectors, list) or any(not isinstance(v, list) or len(v) != dim for v in vectors):
        raise DocumentError(f"expected {{\"vectors\": [...]}} with vectors of length {dim}", "$.vectors")
    return sp.span(vectors, tol, ambient_dim=dim), {"path": str(path), "sha256": _digest(path), "kind": "subspace"}


def cmd_decompose(args, tol) -> Outcome:
    doc, tol, meta = _load_doc(args.input, tol)
    t = doc.to_relation(tol)
    inputs = [meta]
    ledger = Ledger()
    mode = args.mode or "lebesgue"
    if mode == "lebesgue":
        split = dc.lebesgue(t, tol)
    elif mode == "weak":
        split = dc.weak_lebesgue(t, tol)
    elif mode in ("with_subspace", "weak_with_subspace"):
        if args.input2 is None:
            raise InputError("--mode with_subspace needs --input2 with {\"vectors\": [...]}")
        m, meta2 = _subspace_input(args.input2, t.dim_k, tol)
        inputs.append(meta2)
        split = dc.lebesgue_type(t, m, tol) if mode == "with_subspace" else dc.weak_lebesgue_type(t, m, tol)
    else:
        raise InputError(f"unknown mode {mode!r}")
    _split_ledger(ledger, split, tol)
    ref = dc.lebesgue(t, tol)
    ledger.check("split equals the Lebesgue decomposition", max(rl.graph_gap(split.t1, ref.t1), rl.graph_gap(split.t2, ref.t2)), tol.eq)
    m_canon, l_part = dc.canonical_subspace(split, tol)
    equiv = dc.range_split_equivalences(split, tol)
    results = {"mode": mode, **_split_json(split, tol), "canonical": {"m": subspace_json(m_canon), "l": subspace_json(l_part)}, "range_equivalences": equiv}
    return Outcome(_report("decompose", inputs, results, ledger), {"t1": split.t1, "t2": split.t2})


def _witness_json(w):
    if w is None:
        return None
    return {
        "c": w.c,
        "frobenius_norm": w.frobenius_norm,
        "spectral_norm": w.spectral_norm,
        "c_min": w.c_min,
        "residual": w.residual,
        "canonical": w.canonical,
    }


def cmd_dominate(args, tol) -> Outcome:
    doc1, tol, meta1 = _load_doc(args.input, tol)
    if args.input2 is None:
        raise InputError("dominate needs --input (S1) and --input2 (S2)")
    doc2, _, meta2 = _load_doc(args.input2, tol)
    s1, s2 = doc1.to_relation(tol), doc2.to_relation(tol)
    if s1.dim_h != s2.dim_h:
        raise DimensionError(f"S1 and S2 start in different spaces (R^{s1.dim_h} vs R^{s2.dim_h})")
    ledger = Ledger()
    try:
        w = dm.dominates(s1, s2, tol)
    except NotDominated as exc:
        ledger.flag("dominated", False, exc.residual, tol.contain, False)
        results = {"dominated": False, "residual": exc.residual, "reason": str(exc)}
        return Outcome(_report("dominate", [meta1, meta2], results, ledger))
    ledger.flag("dominated", True, w.residual, tol.contain, True)
    if w.c_min is not None:
        ledger.check("c_min <= spectral norm of the witness", w.c_min - w.spectral_norm, tol.contain, "<= 0 up to tolerance")
    transported = dm.transport_to_regular_parts(s1, s2, w, tol)
    ledger.check("transported witness residual", transported.residual, tol.contain)
    ledger.check("transport does not increase the norm", transported.spectral_norm - w.spectral_norm, tol.contain, "<= 0 up to tolerance")
    results = {
        "dominated": True,
        "witness": _witness_json(w),
        "contractive": w.is_contractive(tol),
        "regular_parts": _witness_json(transported),
    }
    return Outcome(_report("dominate", [meta1, meta2], results, ledger))


def cmd_metric(args, tol) -> Outcome:
    doc, tol, meta = _load_doc(args.input, tol)
    t = doc.to_relation(tol)
    rng = np.random.default_rng(args.seed)
    pairs = [(c[: t.dim_h], c[t.dim_h:]) for c in t.graph.frame.T]
    pairs += suites.graph_pairs(rng, t, args.count if args.count is not None else 3) if t.graph.dim else []
    ledger = Ledger()
    rows = []
    mul_t = rl.mul(t, tol)
    for i, (f, fp) in enumerate(pairs):
        value = cl.metric_defect(t, f, fp, tol, rng=np.random.default_rng([args.seed, i]))
        proj = cl.projection_defect(t, f, fp, tol)
        complement = float(np.linalg.norm(fp - sp.project(mul_t, fp)) ** 2)
        diff = abs(value - complement)
        ledger.check(f"pair {i}: metric value = |(I-P) f'|^2", diff / (1.0 + float(fp @ fp)), tol.metric)
        rows.append({"f": f, "fp": fp, "metric_defect": value, "projection_defect": proj, "complement": complement, "abs_diff": diff})
    reg_metric = cl.is_regular_metric(t, tol)
    reg = rl.is_regular(t, tol)
    ledger.flag("metric regularity agrees with is_regular", reg_metric, 0.0, tol.metric, reg)
    results = {"table": rows, "is_regular_metric": reg_metric, "is_regular": reg}
    return Outcome(_report("metric", [meta], results, ledger))


def cmd_truncate(args, tol) -> Outcome:
    doc, tol, meta = _load_doc(args.input, tol)
    t = doc.to_relation(tol)
    if not args.levels:
        raise InputError("truncate needs --levels")
    try:
        seq = cl.truncation_sequence(t, args.levels, tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    ledger = Ledger()
    probes = np.hstack([seq.eigenvectors, rl.dom(t, tol).frame])
    ledger.check("monotone on eigenvectors and domain frame", cl.monotonicity_violation(seq, probes.T) if probes.size else 0.0, tol.contain)
    m = rl.operator_matrix(t, tol)
    table = []
    for f in probes.T:
        norms = seq.norms(f)
        table.append({"f": f, "norms": norms, "target": float(np.linalg.norm(m @ f))})
    if seq.levels[-1] >= (seq.eigenvalues.max() if seq.eigenvalues.size else 0.0):
        worst = max((abs(r["norms"][-1] - r["target"]) for r in table), default=0.0)
        ledger.check("terminal truncation equals |T f|", worst, 1e-10)
    c_mins = []
    for i, op in enumerate(seq.operators):
        w = dm.dominates(rl.from_operator(op, tol), t, tol)
        c_mins.append(w.c_min)
        ledger.check(f"T_{i} contractively dominated by T", w.c_min - 1.0, tol.contain, "<= 0 up to tolerance")
    closable = cl.closability_from_sequence(t, seq, tol)
    ledger.flag("sup of truncations reaches |T f|", closable, 0.0, tol.contain, True)
    results = {
        "levels": list(seq.levels),
        "eigenvalues": seq.eigenvalues,
        "eigenvectors": seq.eigenvectors.T,
        "operators": [operator_document(op).to_json() for op in seq.operators],
        "norms": table,
        "c_min": c_mins,
        "closable": closable,
    }
    rels = {f"T_{i}": rl.from_operator(op, tol) for i, op in enumerate(seq.operators)}
    return Outcome(_report("truncate", [meta], results, ledger), rels)


def cmd_pair(args, tol) -> Outcome:
    doc, tol, meta = _load_doc(args.input, tol)
    inputs = [meta]
    if args.input2 is not None:
        doc2, _, meta2 = _load_doc(args.input2, tol)
        inputs.append(meta2)
        if doc.kind != "operator" or doc2.kind != "operator":
            raise InputError("with two inputs both must be operator documents holding a and b")
        a, b = doc.payload["matrix"], doc2.payload["matrix"]
    elif doc.kind == "pair":
        a, b = doc.payload["a"], doc.payload["b"]
    else:
        raise InputError("pair needs a pair document or two operator documents")
    pair = pr.pair_relation(a, b, tol)
    split = pr.pair_lebesgue(pair, tol)
    ledger = Ledger()
    ledger.check("b1 + b2 = b", float(np.abs(split.b1 + split.b2 - pair.b).max()), tol.contain)
    scale = pr.pair_scale(pair)
    r1 = pr.pair_relation(a, split.b1, tol, scale=scale).relation
    r2 = pr.pair_relation(a, split.b2, tol, scale=scale).relation
    leb = dc.lebesgue(pair.relation, tol)
    ledger.check("(a, b1) relation equals the regular part", rl.graph_gap(r1, leb.t1), tol.eq)
    ledger.flag("(a, b1) generates an operator", rl.is_operator(r1, tol), 0.0, tol.eq, True)
    ledger.flag("(a, b2) generates a singular relation", rl.is_singular(r2, tol), rl.singular_residuals(r2, tol)["dom_adjoint_eq_ker_adjoint"], tol.eq, True)
    results = {"b1": split.b1, "b2": split.b2, "p": subspace_json(split.p), "relation": _rel_json(pair.relation)}
    if args.psd:
        b_ac, b_s = pr.psd_pair_decomposition(a, b, tol)
        oracle = pr.ando_ac_oracle(a, b, tol=tol)
        gap = float(np.linalg.norm(b_ac - oracle, 2))
        ledger.check("b_ac matches the parallel-sum limit", gap, 1e-6)
        ledger.check("b_ac is PSD", -float(np.linalg.eigvalsh(b_ac).min()), 1e-10, ">= 0 up to tolerance")
        ledger.check("b_s is PSD", -float(np.linalg.eigvalsh(b_s).min()), 1e-10, ">= 0 up to tolerance")
        results.update({"b_ac": b_ac, "b_s": b_s, "oracle": oracle, "oracle_gap": gap})
    return Outcome(_report("pair", inputs, results, ledger), {"relation": pair.relation})


def evaluation_operator(m: int, nodes) -> np.ndarray:
    """Point evaluation on a uniform grid of ``m`` cells, in Euclidean coordinates.

    Grid functions carry the trapezoid inner product ``sum w_i f_i g_i``; with
    ``u = W^(1/2) f`` evaluation at node ``j`` becomes ``u_j / sqrt(w_j)``.
    """
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    e = np.zeros((len(nodes), m + 1))
    for row, j in enumerate(nodes):
        e[row, j] = 1.0 / np.sqrt(w[j])
    return e


def point_eval_study(grids, points, tol=DEFAULT_TOL):
    """Norms of point evaluation on refining grids; returns ``(rows, warnings)``."""
    rows, warnings = [], []
    prev = None
    for m in grids:
        nodes = []
        for c in points:
            j = int(round(c * m))
            if abs(j / m - c) > 1e-12:
                warnings.append(f"grid {m}: point {c} snapped to node {j / m}")
            nodes.append(j)
        if not nodes:
            e = np.zeros((1, m + 1))
        else:
            e = evaluation_operator(m, nodes)
        t = rl.from_operator(e, tol)
        norm = float(np.linalg.norm(e, 2))
        split = dc.lebesgue(t, tol)
        c_min = dm.min_constant(t, rl.identity(m + 1), tol)
        ta_dom = rl.dom(rl.adjoint(t), tol)
        row = {
            "m": m,
            "nodes": nodes,
            "norm": norm,
            "ratio": None if prev is None or prev == 0 else norm / prev,
            "c_min_vs_identity": c_min,
            "regular_part_is_operator": split.t1_is_operator,
            "singular_part_range_dim": rl.ran(split.t2, tol).dim,
            "ran_dim": rl.ran(t, tol).dim,
            "dom_adjoint_dim": ta_dom.dim,
            "evaluation": operator_document(e).to_json(),
        }
        rows.append(row)
        prev = norm
    return rows, warnings


def cmd_point_eval(args, tol) -> Outcome:
    grids = args.grids or [10, 100, 1000]
    points = [0.5] if args.points is None else args.points
    if any(g < 1 for g in grids) or any(b <= a for a, b in zip(grids, grids[1:])):
        raise InputError("--grids must be positive and strictly increasing")
    if any(not 0.0 <= c <= 1.0 for c in points):
        raise InputError("--points must lie in [0, 1]")
    rows, warnings = point_eval_study(grids, points, tol)
    ledger = Ledger()
    for row in rows:
        ledger.check(f"grid {row['m']}: min_constant against identity equals the norm", abs(row["c_min_vs_identity"] - row["norm"]), tol.contain * max(1.0, row["norm"]))
    growth = None
    if points:
        ratios = [r["ratio"] for r in rows[1:]]
        growth = all(r >= GROWTH_RATIO for r in ratios) if ratios else None
        for r in rows[1:]:
            ledger.check(f"grid {r['m']}: norm ratio at least {GROWTH_RATIO}", GROWTH_RATIO - r["ratio"], 0.0, f">= {GROWTH_RATIO}")
    note = (
        "Each discretized evaluation map is a bounded operator with closed, everywhere defined adjoint; "
        "only the growth of its norm under refinement reflects the unbounded, singular continuum map."
    )
    results = {"grids": list(grids), "points": list(points), "rows": rows, "growth_detected": growth, "warnings": warnings, "note": note}
    rels = {f"grid_{r['m']}": rl.from_operator(r["evaluation"]["matrix"], tol) for r in rows}
    return Outcome(_report("point-eval", [], results, ledger), rels)


def cmd_verify(args, tol) -> Outcome:
    count = 100 if args.count is None else args.count
    dims = 5 if args.dims is None else args.dims
    if count < 0 or dims < 1:
        raise InputError("--count must be >= 0 and --dims >= 1")
    out = suites.run_all(args.seed, count, dims, tol)
    ledger = Ledger()
    for r in out:
        ledger.rows.append({"name": r.name, "expected": "0 failures", "observed": r.failures, "tolerance": r.threshold, "pass": r.passed})
    failing = [r for r in out if not r.passed]
    repro = None
    for r in failing:
        if r.reproducer is not None:
            repro = {"suite": r.name, "seed": args.seed, "count": count, "dims": dims, "rank_rtol": tol.rank_rtol, **r.reproducer}
            break
    results = {
        "seed": args.seed,
        "count": count,
        "dims": dims,
        "suites": [r.as_dict() for r in out],
        "total_cases": sum(r.cases for r in out),
        "total_failures": sum(r.failures for r in out),
    }
    code = EXIT_INVARIANT if failing else EXIT_OK
    return Outcome(_report("verify", [], results, ledger), code=code, reproducer=repro)


COMMANDS = {
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "dominate": cmd_dominate,
    "metric": cmd_metric,
    "truncate": cmd_truncate,
    "pair": cmd_pair,
    "point-eval": cmd_point_eval,
    "verify": cmd_verify,
}


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relkit", description="Linear relations: classification, decompositions, domination.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--input")
    p.add_argument("--input2")
    p.add_argument("--mode", choices=["lebesgue", "weak", "with_subspace", "weak_with_subspace"])
    p.add_argument("--levels", type=float, nargs="+")
    p.add_argument("--grids", type=int, nargs="+")
    p.add_argument("--points", type=float, nargs="*")
    p.add_argument("--psd", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int)
    p.add_argument("--dims", type=int)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    p.add_argument("--tol-rank", type=float)
    p.add_argument("--out")
    p.add_argument("--repro", default="relkit-repro.json", help="where verify writes a failing case")
    return p


def resolve_tolerance(flag_value, environ=os.environ) -> ToleranceConfig:
    """Defaults, then ``RELKIT_TOL_RANK``, then ``--tol-rank``."""
    tol = DEFAULT_TOL
    env = environ.get("RELKIT_TOL_RANK")
    if env:
        try:
            tol = tol.replace(rank_rtol=float(env))
        except ValueError as exc:
            raise InputError(f"RELKIT_TOL_RANK: {exc}") from None
    if flag_value is not None:
        try:
            tol = tol.replace(rank_rtol=flag_value)
        except ValueError as exc:
            raise InputError(f"--tol-rank: {exc}") from None
    return tol


def render_text(report) -> str:
    lines = [f"command: {report['command']}"]
    for meta in report["inputs"]:
        lines.append(f"input: {meta['path']} ({meta['kind']}, sha256 {meta['sha256'][:12]})")
    for key, value in report["results"].items():
        if isinstance(value, (bool, int, float, str)) or value is None:
            lines.append(f"{key}: {value}")
        elif isinstance(value, dict) and value and all(isinstance(v, (bool, int, float, str)) for v in value.values()):
            lines.append(f"{key}: " + ", ".join(f"{k}={v}" for k, v in value.items()))
    for row in report["assertions"]:
        mark = "PASS" if row["pass"] else "FAIL"
        lines.append(f"[{mark}] {row['name']}: observed {row['observed']} (tolerance {row['tolerance']})")
    return "\n".join(lines) + "\n"


def run(argv=None, environ=os.environ) -> Outcome:
    return execute(build_parser().parse_args(argv), environ)


def execute(args, environ=os.environ) -> Outcome:
    """Run a parsed command; errors become an outcome with an ``error`` result."""
    command = args.command
    try:
        tol = resolve_tolerance(args.tol_rank, environ)
        return COMMANDS[command](args, tol)
    except (InputError, DocumentError, DimensionError) as exc:
        code, kind = EXIT_INPUT, "input"
        err = exc
    except PRECONDITION_ERRORS as exc:
        code, kind = EXIT_PRECONDITION, "precondition"
        err = exc
    except ConsistencyError as exc:
        code, kind = EXIT_INVARIANT, "invariant"
        err = exc
    detail = {"type": type(err).__name__, "kind": kind, "message": str(err)}
    if isinstance(err, ConditionViolation):
        detail["clause"] = err.clause
        detail["residual"] = err.residual
    if isinstance(err, NonConcaveAscent):
        detail["best_bound"] = err.best_bound
        detail["degraded"] = True
    return Outcome(_report(command, [], {"error": detail}, Ledger()), code=code)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outcome = execute(args)
    report = _plain(outcome.report)
    code = outcome.code
    if code == EXIT_OK and any(not r["pass"] for r in report["assertions"]):
        code = EXIT_INVARIANT
    text = render_text(report) if args.fmt == "text" else json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if outcome.reproducer is not None:
        with open(args.repro, "w", encoding="utf-8") as fh:
            json.dump(_plain(outcome.reproducer), fh, indent=2)
        sys.stderr.write(f"relkit: invariant failures; reproducer written to {args.repro}\n")
    if "error" in report["results"]:
        err = report["results"]["error"]
        sys.stderr.write(f"relkit: {err['type']}: {err['message']}\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())

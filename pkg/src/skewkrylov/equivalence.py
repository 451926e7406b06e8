"""Numerical checks of the skew-symmetric Krylov equivalence results.

Three families of checks run on any instance ``(A, b)``:

* ``lemma``: ``K_s(A^2, A b)`` is orthogonal to ``K_t(A^2, b)``, and the
  solution ``x`` is orthogonal to ``K_t(A^2, b)``.
* ``theorem_equal``: Galerkin iterates on ``K_2q(A, b)`` equal CGNE iterates,
  and minimum-residual iterates on ``K_2q(A, b)`` and ``K_2q+1(A, b)`` equal
  CGNR iterates.
* ``theorem_nobetter``: for ``z = z_e + z_o`` in ``K_m(A, b)`` the error and
  residual split into Pythagorean sums.

Each check appends :class:`CheckRecord` entries to a :class:`RunReport`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .krylov import build_basis, even_basis, mutual_gram, odd_basis, solution_orthogonality, split_bases, split_even_odd
from .operators import LinearOperator, aslinearoperator, dense_solve
from .solvers import (
    SolverConfig,
    cgne_skew,
    cgnr_skew,
    galerkin_reference,
    minres_reference,
)

__all__ = [
    "CheckRecord",
    "RunReport",
    "describe_instance",
    "scaled_tol",
    "check_lemma",
    "check_theorem_equal",
    "check_theorem_nobetter",
    "pythagorean_defects",
    "compare_methods",
    "EQUALITY_TOL",
    "IDENTITY_TOL",
    "KAPPA_SCALE_THRESHOLD",
]

EQUALITY_TOL = 1e-8
IDENTITY_TOL = 1e-10
KAPPA_SCALE_THRESHOLD = 1e3
MONOTONE_SLACK = 1e-14


@dataclass
class CheckRecord:
    check: str
    index: Dict[str, int]
    deviation: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.deviation = float(self.deviation)
        self.tol = float(self.tol)
        self.passed = bool(self.deviation <= self.tol)


@dataclass
class RunReport:
    """Outcome of one or more checks on a single instance."""

    instance: Dict[str, Any] = field(default_factory=dict)
    records: List[CheckRecord] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)

    def add(self, check, index, deviation, tol):
        rec = CheckRecord(check, dict(index), deviation, tol)
        self.records.append(rec)
        return rec

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def failures(self):
        return [r for r in self.records if not r.passed]

    def worst(self, check):
        devs = [r.deviation for r in self.records if r.check == check]
        return max(devs) if devs else 0.0

    def summary(self):
        out = {}
        for r in self.records:
            s = out.setdefault(r.check, {"count": 0, "worst": 0.0, "min": math.inf, "total": 0.0, "passed": True})
            s["count"] += 1
            s["worst"] = max(s["worst"], r.deviation)
            s["min"] = min(s["min"], r.deviation)
            s["total"] += r.deviation
            s["passed"] = s["passed"] and r.passed
        for s in out.values():
            s["mean"] = s.pop("total") / s["count"]
        return out

    def merge(self, other):
        self.records.extend(other.records)
        self.notes.extend(other.notes)
        self.tables.update(other.tables)
        for k, v in other.instance.items():
            self.instance.setdefault(k, v)
        return self

    def to_dict(self):
        return {
            "instance": self.instance,
            "records": [asdict(r) for r in self.records],
            "notes": list(self.notes),
            "tables": self.tables,
            "summary": self.summary(),
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, data):
        rep = cls(dict(data.get("instance", {})), notes=list(data.get("notes", [])),
                  tables=dict(data.get("tables", {})))
        for r in data.get("records", []):
            rec = rep.add(r["check"], r["index"], r["deviation"], r["tol"])
            if rec.passed != r.get("passed", rec.passed):
                raise ValueError(f"inconsistent pass flag in record {r}")
        return rep

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def describe_instance(A, b=None, **meta):
    op = aslinearoperator(A)
    dense = op.to_dense()
    desc = {"n": op.dim, "kind": op.kind, "cond_est": float(np.linalg.cond(dense))}
    if b is not None:
        desc["rhs_norm"] = float(np.linalg.norm(b))
    desc.update({k: v for k, v in meta.items() if v is not None})
    return desc


def scaled_tol(tol, kappa):
    """``tol`` widened by ``kappa / 1e3`` once ``kappa`` exceeds ``1e3``."""
    if kappa is None or not math.isfinite(kappa) or kappa <= KAPPA_SCALE_THRESHOLD:
        return tol
    return tol * kappa / KAPPA_SCALE_THRESHOLD


def _setup(A, b, x_true, report, meta):
    op = aslinearoperator(A)
    b = np.asarray(b, dtype=float)
    dense = op.to_dense()
    if x_true is None:
        x_true = dense_solve(dense, b)
    if report is None:
        report = RunReport(describe_instance(op, b, **(meta or {})))
    return op, b, x_true, report


def check_lemma(A, b, s_max=5, t_max=5, tol=IDENTITY_TOL, x_true=None, report=None, meta=None):
    """Orthogonality of the odd and even squared-generator Krylov spaces."""
    op, b, x, report = _setup(A, b, x_true, report, meta)
    tol = scaled_tol(tol, report.instance.get("cond_est"))
    U = odd_basis(op, b, s_max)
    V = even_basis(op, b, t_max)
    if U.dim < s_max:
        report.notes.append(f"lemma: K_s(A^2, Ab) truncated at grade {U.dim} < s_max={s_max}")
    if V.dim < t_max:
        report.notes.append(f"lemma: K_t(A^2, b) truncated at grade {V.dim} < t_max={t_max}")
    for s in range(1, U.dim + 1):
        for t in range(1, V.dim + 1):
            report.add("lemma.mutual_gram", {"s": s, "t": t}, mutual_gram(U.truncate(s), V.truncate(t)), tol)
    for t in range(1, V.dim + 1):
        report.add("lemma.solution_orthogonality", {"t": t}, solution_orthogonality(x, V.truncate(t)), tol)
    return report


def _rel(u, v):
    nv = np.linalg.norm(v)
    d = np.linalg.norm(u - v)
    return d / nv if nv > 0 else d


def check_theorem_equal(A, b, q_max=5, tol=EQUALITY_TOL, x_true=None, report=None, meta=None):
    """Galerkin vs CGNE and minimum residual vs CGNR, plus the orthogonality
    certificates for the CG iterates on ``K_2q`` and ``K_2q+1``."""
    op, b, x, report = _setup(A, b, x_true, report, meta)
    if not op.is_skew:
        raise ValueError("check_theorem_equal needs a skew-tagged operator")
    tol = scaled_tol(tol, report.instance.get("cond_est"))
    full = build_basis(op, b, 2 * q_max + 1)
    q_lim = min(q_max, full.dim // 2)
    if q_lim < q_max:
        report.notes.append(f"theorem_equal: grade of b is {full.dim}; q limited to {q_lim}")
    if q_lim == 0:
        return report
    cfg = SolverConfig(rtol=0.0, max_iter=q_lim)
    run_e = cgne_skew(op, b, cfg)
    run_r = cgnr_skew(op, b, cfg)
    q_avail = min(run_e.iterations, run_r.iterations)
    if q_avail < q_lim:
        report.notes.append(f"theorem_equal: recurrence stopped ({run_e.termination}/{run_r.termination}) at q={q_avail}")
    AQ = np.column_stack([op.apply(full.Q[:, j]) for j in range(full.dim)])
    bnorm = np.linalg.norm(b)
    for q in range(1, q_avail + 1):
        xe, xr = run_e.history.x[q], run_r.history.x[q]
        g = galerkin_reference(op, b, 2 * q, basis=full)
        if g.exists:
            report.add("theorem_equal.galerkin_vs_cgne", {"q": q}, _rel(g.x, xe), tol)
        else:
            report.notes.append(f"theorem_equal: anomaly, Galerkin iterate m={2 * q} missing (sigma_min={g.sigma_min:.3g})")
            report.add("theorem_equal.galerkin_vs_cgne", {"q": q}, math.inf, tol)
        xm2 = minres_reference(op, b, 2 * q, basis=full)
        report.add("theorem_equal.minres_vs_cgnr", {"q": q}, _rel(xm2, xr), tol)
        if 2 * q + 1 <= full.dim:
            xm3 = minres_reference(op, b, 2 * q + 1, basis=full)
            report.add("theorem_equal.minres_odd_vs_even", {"q": q}, _rel(xm3, xm2), tol)
            m_cert = 2 * q + 1
        else:
            report.notes.append(f"theorem_equal: K_{2 * q + 1}(A, b) exceeds the grade; odd minres iterate skipped")
            m_cert = 2 * q
        re_ = b - op.apply(xe)
        report.add("theorem_equal.galerkin_certificate", {"q": q},
                   np.abs(full.Q[:, : 2 * q].T @ re_).max() / bnorm, tol)
        rr_ = b - op.apply(xr)
        W = AQ[:, :m_cert]
        report.add("theorem_equal.minres_certificate", {"q": q},
                   (np.abs(W.T @ rr_) / np.linalg.norm(W, axis=0)).max() / bnorm, tol)
    return report


def pythagorean_defects(A, b, x, z, z_e, z_o):
    """Relative defects of ``|z-x|^2 = |z_o-x|^2 + |z_e|^2`` and
    ``|b-Az|^2 = |b-Az_o|^2 + |Az_e|^2``."""
    op = aslinearoperator(A)
    err = np.sum((z - x) ** 2)
    res = np.sum((b - op.apply(z)) ** 2)
    err_d = abs(err - np.sum((z_o - x) ** 2) - np.sum(z_e ** 2))
    res_d = abs(res - np.sum((b - op.apply(z_o)) ** 2) - np.sum(op.apply(z_e) ** 2))
    return err_d / err, res_d / res


def check_theorem_nobetter(A, b, m, trials=100, seed=0, tol=IDENTITY_TOL, x_true=None, report=None, meta=None):
    """Pythagorean error/residual splits for random ``z`` in ``K_m(A, b)``.

    ``z`` has standard-normal coefficients in the orthonormal basis.  Draws
    with ``||z - x||`` or ``||b - A z||`` at rounding level are skipped and
    counted in the notes.
    """
    op, b, x, report = _setup(A, b, x_true, report, meta)
    tol = scaled_tol(tol, report.instance.get("cond_est"))
    full = build_basis(op, b, m)
    if full.dim < m:
        report.notes.append(f"theorem_nobetter: K_{m}(A, b) truncated at grade {full.dim}")
    subs = split_bases(op, full)
    rng = np.random.default_rng(seed)
    eps_floor = 1e-24
    skipped = 0
    for trial in range(trials):
        z = full.Q @ rng.standard_normal(full.dim)
        if (np.sum((z - x) ** 2) <= eps_floor * (x @ x)
                or np.sum((b - op.apply(z)) ** 2) <= eps_floor * (b @ b)):
            skipped += 1
            continue
        sp = split_even_odd(z, full, op, sub_bases=subs)
        d_err, d_res = pythagorean_defects(op, b, x, z, sp.p_e, sp.p_o)
        idx = {"m": full.dim, "trial": trial}
        report.add("theorem_nobetter.error_identity", idx, d_err, tol)
        report.add("theorem_nobetter.residual_identity", idx, d_res, tol)
    if skipped:
        report.notes.append(f"theorem_nobetter: skipped {skipped} degenerate draws at m={full.dim}")
    return report


def _counting(op):
    count = [0]

    def matvec(v):
        count[0] += 1
        return op.apply(v)

    def rmatvec(v):
        count[0] += 1
        return op.apply_transpose(v)

    return LinearOperator(op.dim, matvec, rmatvec, op.kind), count


def _monotone_excess(values, scale):
    worst = 0.0
    for prev, cur in zip(values, values[1:]):
        worst = max(worst, cur - prev)
    return worst / scale if scale > 0 else worst


def compare_methods(A, b, cfg=None, x_true=None, report=None, meta=None, q_check=5):
    """Run CGNE, CGNR and both reference solvers side by side.

    Tables hold per-iteration residual and error norms; ``instance`` gains
    iteration and operator-application counts per method.  The reference
    solvers are tabulated over ``m = 1 .. 2q+1`` where ``q`` is the larger
    CG iteration count; their ``iterations`` entry is the CG-equivalent
    ``ceil(m / 2)`` of the first ``m`` meeting ``rtol``.

    The CG-vs-reference agreement checks cover ``q <= q_check`` only: the
    reference basis is reorthogonalized while the recurrences drift once
    they lose orthogonality, so late iterates legitimately differ.
    """
    cfg = cfg or SolverConfig()
    op, b, x, report = _setup(A, b, x_true, report, meta)
    if not op.is_skew:
        raise ValueError("compare_methods needs a skew-tagged operator")
    bnorm, xnorm = np.linalg.norm(b), np.linalg.norm(x)
    runs = {}
    for name, solver in (("cgne_skew", cgne_skew), ("cgnr_skew", cgnr_skew)):
        res = solver(op, b, cfg, x_true=x)
        runs[name] = res
        report.tables[name] = [
            {k: row[k] for k in ("q", "res_norm", "true_res_norm", "err_norm", "alpha", "beta")}
            for row in res.history.rows()
        ]
        report.instance[f"{name}.iterations"] = res.iterations
        report.instance[f"{name}.termination"] = res.termination
        report.instance[f"{name}.applies"] = res.applies

    q_top = max(r.iterations for r in runs.values())
    cop, count = _counting(op)
    full = build_basis(cop, b, min(2 * q_top + 1, op.dim))
    m_top = full.dim
    gal_rows, min_rows = [], []
    gal_done = min_done = None
    for m in range(1, m_top + 1):
        g = galerkin_reference(cop, b, m, basis=full)
        row = {"m": m, "exists": g.exists, "true_res_norm": math.nan, "err_norm": math.nan}
        if g.exists:
            row["true_res_norm"] = float(np.linalg.norm(b - op.apply(g.x)))
            row["err_norm"] = float(np.linalg.norm(g.x - x))
            if gal_done is None and row["true_res_norm"] <= cfg.rtol * bnorm:
                gal_done = (m, count[0])
        gal_rows.append(row)
    gal_applies = count[0]
    count[0] = 0
    for m in range(1, m_top + 1):
        xm = minres_reference(cop, b, m, basis=full)
        res_n = float(np.linalg.norm(b - op.apply(xm)))
        min_rows.append({"m": m, "true_res_norm": res_n, "err_norm": float(np.linalg.norm(xm - x))})
        if min_done is None and res_n <= cfg.rtol * bnorm:
            min_done = (m, count[0])
    report.tables["galerkin_reference"] = gal_rows
    report.tables["minres_reference"] = min_rows
    for name, done, total in (("galerkin_reference", gal_done, gal_applies), ("minres_reference", min_done, count[0])):
        report.instance[f"{name}.iterations"] = (done[0] + 1) // 2 if done else None
        report.instance[f"{name}.m"] = done[0] if done else None
        report.instance[f"{name}.applies"] = done[1] if done else total

    tol = scaled_tol(IDENTITY_TOL, report.instance.get("cond_est"))
    e_hist, r_hist = runs["cgne_skew"].history, runs["cgnr_skew"].history
    for q in range(1, min(len(r_hist), q_check + 1)):
        if 2 * q <= m_top:
            report.add("compare.minres_vs_cgnr_residual", {"q": q},
                       abs(min_rows[2 * q - 1]["true_res_norm"] - r_hist.true_res_norm[q]) / bnorm, tol)
    for q in range(1, min(len(e_hist), q_check + 1)):
        if 2 * q <= m_top and gal_rows[2 * q - 1]["exists"]:
            report.add("compare.galerkin_vs_cgne_error", {"q": q},
                       abs(gal_rows[2 * q - 1]["err_norm"] - e_hist.err_norm[q]) / xnorm, tol)
    report.add("compare.cgnr_residual_monotone", {}, _monotone_excess(r_hist.true_res_norm, bnorm), MONOTONE_SLACK)
    report.add("compare.cgne_error_monotone", {}, _monotone_excess(e_hist.err_norm, xnorm), MONOTONE_SLACK)
    return report

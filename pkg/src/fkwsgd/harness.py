"""Convergence studies, problem configs and the reference experiment set."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .mesh_fem import FemSystem, assemble, build_mesh, l2_norm
from .problems import FieldRef
from .stepper import ProblemSpec, fitted_rate, n_steps_for, solve

DEFAULT_TAUS = (1 / 10, 1 / 20, 1 / 40, 1 / 80)
DEFAULT_M = 128
TABLE_IDS = (1, 3, 5, 7)


def fmt(x: float) -> str:
    """17 significant digits, the CSV float format."""
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


# ---------------------------------------------------------------- configs


def spec_from_dict(d: dict) -> tuple[ProblemSpec, int]:
    """Build a ``ProblemSpec`` and mesh density from a config mapping."""
    rho = d.get("rho", [0.0, 0.0])
    if isinstance(rho, (list, tuple)):
        rho = complex(rho[0], rho[1] if len(rho) > 1 else 0.0)
    missing = {"alpha", "T", "U", "G0", "f"} - set(d)
    if missing:
        raise ValueError(f"config is missing keys: {sorted(missing)}")
    spec = ProblemSpec(
        alpha=float(d["alpha"]),
        rho=complex(rho),
        T=float(d["T"]),
        U=FieldRef.parse(d["U"]),
        G0=FieldRef.parse(d["G0"]),
        f=FieldRef.parse(d["f"]),
        dim=int(d.get("dim", 1)),
        correction=bool(d.get("correction", True)),
        source_weights=d.get("source_weights", "generating"),
    )
    return spec, int(d.get("m", DEFAULT_M))


def spec_to_dict(spec: ProblemSpec, m: int) -> dict:
    return {
        "alpha": spec.alpha,
        "rho": [spec.rho.real, spec.rho.imag],
        "T": spec.T,
        "dim": spec.dim,
        "m": m,
        "U": spec.U.to_json(),
        "G0": spec.G0.to_json(),
        "f": spec.f.to_json(),
        "correction": spec.correction,
        "source_weights": spec.source_weights,
    }


def load_config(path: str | Path) -> tuple[ProblemSpec, int]:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))


# ---------------------------------------------------------------- reports


@dataclass
class ConvergenceReport:
    problem_id: str
    alpha: float
    taus: list[float]
    errors: list[float]
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )

    @property
    def rates(self) -> list[float | None]:
        out: list[float | None] = [None]
        for prev, cur in zip(self.errors[:-1], self.errors[1:]):
            out.append(math.log2(prev / cur) if prev > 0 and cur > 0 else None)
        return out

    @property
    def rows(self) -> list[tuple[float, float, float | None]]:
        return list(zip(self.taus, self.errors, self.rates))

    @property
    def fitted_rate(self) -> float:
        return fitted_rate(self.taus, self.errors)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# timestamp: {self.timestamp}\n")
        buf.write(f"# problem: {self.problem_id}\n")
        buf.write(f"# alpha: {fmt(self.alpha)}\n")
        buf.write(f"# fitted_rate: {fmt(self.fitted_rate)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tau", "error", "rate"])
        for tau, err, rate in self.rows:
            w.writerow([fmt(tau), fmt(err), fmt(rate) if rate is not None else ""])
        return buf.getvalue()


def read_report_csv(text: str) -> tuple[list[float], list[float]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.DictReader(lines))
    return [float(r["tau"]) for r in rows], [float(r["error"]) for r in rows]


def check_halving(taus: Sequence[float]) -> None:
    if len(taus) < 1:
        raise ValueError("need at least one tau")
    for a, b in zip(taus[:-1], taus[1:]):
        if not math.isclose(a / b, 2.0, rel_tol=1e-12):
            raise ValueError(f"taus must halve successively, got {a!r} -> {b!r}")


# ---------------------------------------------------------------- studies


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))


def final_fields(
    spec: ProblemSpec, sys: FemSystem, taus: Iterable[float], jobs: int | None = None
) -> list[np.ndarray]:
    """Final-time nodal values for each step size, solved independently."""
    taus = list(taus)
    jobs = jobs or default_jobs()
    if jobs == 1 or len(taus) == 1:
        return [solve(spec, sys, t).final.values for t in taus]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda t: solve(spec, sys, t).final.values, taus))


def run_convergence(
    spec: ProblemSpec,
    m: int,
    taus: Sequence[float] = DEFAULT_TAUS,
    *,
    problem_id: str = "custom",
    sys: FemSystem | None = None,
    jobs: int | None = None,
) -> ConvergenceReport:
    """Self-convergence errors ``||G_tau - G_{tau/2}||`` for a halving sequence."""
    taus = [float(t) for t in taus]
    check_halving(taus)
    for t in taus:
        n_steps_for(spec.T, t / 2.0)
    if sys is None:
        sys = assemble(build_mesh(spec.dim, m))
    grid = taus + [taus[-1] / 2.0]
    finals = final_fields(spec, sys, grid, jobs)
    errors = [l2_norm(sys, finals[i] - finals[i + 1]) for i in range(len(taus))]
    return ConvergenceReport(problem_id, spec.alpha, taus, errors)


# ---------------------------------------------------------------- reference tables

_CHI_LO = {"name": "chi", "params": {"a": 0.0, "b": 0.5}}
_CHI_HI = {"name": "chi", "params": {"a": 0.5, "b": 1.0}}
_BOX_LO = {"name": "chi-box", "params": {"a": 0.0, "b": 0.5, "c": 0.0, "d": 0.5}}
_BOX_HI = {"name": "chi-box", "params": {"a": 0.5, "b": 1.0, "c": 0.5, "d": 1.0}}

# (case label, base config) per table; alpha is filled in per row
_TABLE_CASES: dict[int, list[tuple[str, dict]]] = {
    1: [("", dict(rho=[-1.0, 1.0], U=_CHI_HI, G0=_CHI_LO, f="zero", dim=1))],
    3: [("", dict(rho=[-1.0, 0.0], U=_CHI_HI, G0="zero",
                  f={"name": "tempered", "params": {"field": "poly"}}, dim=1))],
    5: [("", dict(rho=[-1.0, 0.0], U=_CHI_HI, G0=_CHI_LO,
                  f={"name": "tempered", "params": {"field": "poly"}}, dim=1))],
    7: [
        (case, dict(rho=[-1.0, 0.0], U=u, G0=_BOX_LO,
                    f={"name": "tempered", "params": {"field": "poly2"}}, dim=2))
        for case, u in (("a", _BOX_HI), ("b", "linear"), ("c", "quadratic"))
    ],
}
TABLE_ALPHAS = {1: (0.3, 0.5, 0.7), 3: (0.3, 0.5, 0.7), 5: (0.3, 0.5, 0.7), 7: (0.2, 0.8)}


def table_configs(
    table_id: int, m: int = DEFAULT_M, source_weights: str = "wsgd"
) -> list[tuple[str, dict]]:
    """``(problem_id, config)`` pairs for every cell of a reference table."""
    if table_id not in _TABLE_CASES:
        raise ValueError(f"unknown table {table_id}; expected one of {TABLE_IDS}")
    out = []
    for case, base in _TABLE_CASES[table_id]:
        for alpha in TABLE_ALPHAS[table_id]:
            cfg = dict(base, alpha=alpha, T=1.0, m=m, correction=True,
                       source_weights=source_weights)
            pid = f"table{table_id}{case}"
            out.append((f"{pid}_alpha{alpha}", cfg))
    return out


def reproduce_table(
    table_id: int,
    m: int = DEFAULT_M,
    taus: Sequence[float] = DEFAULT_TAUS,
    *,
    source_weights: str = "wsgd",
    correction: bool = True,
    jobs: int | None = None,
) -> list[ConvergenceReport]:
    """Run every configuration of a reference error table."""
    reports = []
    systems: dict[int, FemSystem] = {}
    for pid, cfg in table_configs(table_id, m, source_weights):
        cfg = dict(cfg, correction=correction)
        spec, mm = spec_from_dict(cfg)
        if spec.dim not in systems:
            systems[spec.dim] = assemble(build_mesh(spec.dim, mm))
        reports.append(
            run_convergence(spec, mm, taus, problem_id=pid, sys=systems[spec.dim], jobs=jobs)
        )
    return reports


def _case_of(problem_id: str) -> str:
    head = problem_id.split("_alpha")[0]
    return head[-1] if head[-1] in "abc" else ""


def _tau_label(tau: float) -> str:
    inv = 1.0 / tau
    if math.isclose(inv, round(inv), rel_tol=1e-12):
        return f"tau=1/{round(inv)}"
    return f"tau={fmt(tau)}"


def table_csv(reports: Sequence[ConvergenceReport]) -> str:
    """All reports of one table in the reference row layout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    taus = reports[0].taus
    w.writerow(["case", "alpha"] + [_tau_label(t) for t in taus] + ["fitted_rate"])
    for r in reports:
        w.writerow([_case_of(r.problem_id), fmt(r.alpha)] + [fmt(e) for e in r.errors]
                   + [fmt(r.fitted_rate)])
    return buf.getvalue()


def read_table_csv(text: str) -> dict[tuple[str, float], list[float]]:
    rows = csv.reader(ln for ln in text.splitlines() if ln and not ln.startswith("#"))
    header = next(rows)
    n_tau = sum(1 for h in header if h.startswith("tau="))
    out = {}
    for row in rows:
        out[(row[0], float(row[1]))] = [float(v) for v in row[2 : 2 + n_tau]]
    return out


def expected_table(table_id: int) -> dict[tuple[str, float], list[float]]:
    """Reference errors for a table, from the bundled CSV."""
    text = resources.files("fkwsgd").joinpath(f"expected/table{table_id}.csv").read_text()
    return read_table_csv(text)


def compare_to_expected(
    reports: Sequence[ConvergenceReport],
    expected: dict[tuple[str, float], list[float]],
    rtol: float = 0.25,
) -> list[str]:
    """Human-readable failures; an empty list means every value is within ``rtol``."""
    failures = []
    for r in reports:
        key = (_case_of(r.problem_id), float(r.alpha))
        if key not in expected:
            failures.append(f"{r.problem_id}: no expected row for {key}")
            continue
        for tau, got, want in zip(r.taus, r.errors, expected[key]):
            rel = abs(got - want) / abs(want)
            if rel > rtol:
                failures.append(
                    f"{r.problem_id} tau={tau:g}: {got:.4e} vs {want:.4e} (rel {rel:.3f} > {rtol})"
                )
    return failures

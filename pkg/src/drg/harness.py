"""Experiment harness: JSON config parsing, trajectory runs, energy-drift
and convergence-order studies, level-curve trajectories, and CSV output.

CSV conventions
---------------
Trajectories: header ``t, x0..x{n-1}, H, dH`` with dH = H(u^k) - H(u^0).
Order studies: header ``h, err_ambient, err_riemannian`` followed by a
trailing comment line ``# slope=<value>``.  All numbers are written with
17 significant digits, so a written record re-reads value-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .integrators import METHOD_IDS, StepConfig, integrate, make_method
from .geometry import SphereProduct
from .problems import (Oscillator, Problem, SpinChain, SpinningTop,
                       benchmark_initial_conditions)

Array = np.ndarray

PROBLEM_IDS = ("top", "chain", "oscillator")
NORMS = ("ambient", "riemannian")
REFERENCE_POLICIES = ("fine", "exact")

FMT = "%.17g"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a problem, one or more methods, step size(s) and
    horizon, plus solver and output settings.

    ``h`` is a single step size for trajectory runs and a strictly
    decreasing list for order studies.  ``reference`` selects how order
    studies obtain the true endpoint: 'exact' (spin chain only) or 'fine'
    (collocation s=4 at h_ref = min(h)/100)."""

    problem: str = "top"
    method: str = "ia"
    methods: tuple[str, ...] = ()
    h: float | tuple[float, ...] = 0.1
    t_end: float = 10.0
    norm: str = "ambient"
    reference: str | None = None
    nq: int = 16
    fp_tol: float = 1e-14
    fp_max_iter: int = 200
    d: int = 5
    inertia: tuple[float, float, float] = (1.0, 2.0, 4.0)
    initial: tuple[float, ...] | None = None
    initials: tuple[tuple[float, ...], ...] = ()
    out: str | None = None

    @property
    def h_list(self) -> tuple[float, ...]:
        return self.h if isinstance(self.h, tuple) else (self.h,)

    def step_config(self) -> StepConfig:
        return StepConfig(fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter,
                          nq=self.nq)


_VALIDATORS = {}


def _key(name):
    def deco(fn):
        _VALIDATORS[name] = fn
        return fn
    return deco


def _scalar(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"config key {name!r} must be a number")
    return float(value)


def _positive(value, name):
    x = _scalar(value, name)
    if x <= 0:
        raise ValueError(f"config key {name!r} must be positive")
    return x


@_key("problem")
def _v_problem(v):
    if v not in PROBLEM_IDS:
        raise ValueError(f"unknown problem {v!r}; valid ids: "
                         f"{', '.join(PROBLEM_IDS)}")
    return {"problem": v}


def _check_method(v):
    if v not in METHOD_IDS:
        raise ValueError(f"unknown method id {v!r}; valid ids: "
                         f"{', '.join(METHOD_IDS)}")
    return v


@_key("method")
def _v_method(v):
    return {"method": _check_method(v)}


@_key("methods")
def _v_methods(v):
    if not isinstance(v, list) or not v:
        raise ValueError("config key 'methods' must be a non-empty list")
    return {"methods": tuple(_check_method(m) for m in v)}


@_key("h")
def _v_h(v):
    if isinstance(v, list):
        hs = tuple(_positive(x, "h") for x in v)
        if len(hs) < 2 or any(a <= b for a, b in zip(hs, hs[1:])):
            raise ValueError("config key 'h': a list must be strictly "
                             "decreasing with at least two entries")
        return {"h": hs}
    return {"h": _positive(v, "h")}


@_key("t_end")
def _v_t_end(v):
    t = float(v)
    if not np.isfinite(t) or t < 0:
        raise ValueError("t_end must be a finite non-negative number")
    return {"t_end": t}


@_key("norm")
def _v_norm(v):
    if v not in NORMS:
        raise ValueError(f"unknown norm {v!r}; valid values: "
                         f"{', '.join(NORMS)}")
    return {"norm": v}


@_key("reference")
def _v_reference(v):
    if v not in REFERENCE_POLICIES:
        raise ValueError(f"unknown reference policy {v!r}; valid values: "
                         f"{', '.join(REFERENCE_POLICIES)}")
    return {"reference": v}


@_key("nq")
def _v_nq(v):
    if not isinstance(v, int) or v < 1:
        raise ValueError("config key 'nq' must be a positive integer")
    return {"nq": v}


@_key("fp_tol")
def _v_fp_tol(v):
    return {"fp_tol": _positive(v, "fp_tol")}


@_key("fp_max_iter")
def _v_fp_max_iter(v):
    if not isinstance(v, int) or v < 1:
        raise ValueError("config key 'fp_max_iter' must be a positive integer")
    return {"fp_max_iter": v}


@_key("d")
def _v_d(v):
    if not isinstance(v, int) or v < 2:
        raise ValueError("config key 'd' must be an integer >= 2")
    return {"d": v}


@_key("inertia")
def _v_inertia(v):
    if not isinstance(v, list) or len(v) != 3:
        raise ValueError("config key 'inertia' must be a list of 3 numbers")
    return {"inertia": tuple(_positive(x, "inertia") for x in v)}


@_key("initial")
def _v_initial(v):
    if not isinstance(v, list) or not v:
        raise ValueError("config key 'initial' must be a non-empty list of "
                         "numbers")
    return {"initial": tuple(_scalar(x, "initial") for x in v)}


@_key("initials")
def _v_initials(v):
    if not isinstance(v, list) or not v \
            or not all(isinstance(row, list) for row in v):
        raise ValueError("config key 'initials' must be a non-empty list of "
                         "coordinate lists")
    return {"initials": tuple(tuple(_scalar(x, "initials") for x in row)
                              for row in v)}


@_key("out")
def _v_out(v):
    if not isinstance(v, str) or not v:
        raise ValueError("config key 'out' must be a non-empty path string")
    return {"out": v}


def parse_config(path: str) -> ExperimentSpec:
    """Read a flat key-value JSON config file and validate every key.

    Unknown keys are rejected with the list of valid keys; defaults are
    fp_tol=1e-14, nq=16, norm='ambient' (ambient l2)."""
    with open(path, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    fields = {}
    for key, value in doc.items():
        if key not in _VALIDATORS:
            raise ValueError(f"{path}: unknown config key {key!r}; valid "
                             f"keys: {', '.join(sorted(_VALIDATORS))}")
        fields.update(_VALIDATORS[key](value))
    return ExperimentSpec(**fields)


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------

def build_problem(spec: ExperimentSpec):
    """Instantiate (problem, initial state, exact solution or None)."""
    if spec.problem == "top":
        problem = SpinningTop(inertia=spec.inertia)
        u0 = np.array([-1.0, -1.0, 1.0]) / np.sqrt(3.0)
        exact = None
    elif spec.problem == "chain":
        setup = benchmark_initial_conditions()
        if spec.d == 5:
            problem, sol = setup["chain"]["problem"], setup["chain"]["exact"]
        else:
            problem = SpinChain(d=spec.d)
            sol = setup["chain"]["exact"]
        u0 = sol(problem, 0.0)
        exact = lambda t: sol(problem, t)  # noqa: E731
    else:
        problem = Oscillator()
        u0 = np.array([1.0, 0.0])
        exact = lambda t: problem.exact(np.array([1.0, 0.0]), t)  # noqa: E731
    if spec.initial is not None:
        u0 = np.asarray(spec.initial, dtype=float)
        if u0.shape != (problem.manifold.ambient_dim,):
            raise ValueError(f"initial state must have "
                             f"{problem.manifold.ambient_dim} coordinates")
        exact = None
    return problem, u0, exact


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_trajectory_csv(path: str, problem: Problem, record) -> None:
    n = problem.manifold.ambient_dim
    header = ",".join(["t"] + [f"x{i}" for i in range(n)] + ["H", "dH"])
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header + "\n")
        dh = record.energy_errors
        for k in range(len(record.times)):
            row = ([record.times[k]] + list(record.states[k])
                   + [record.energies[k], dh[k]])
            handle.write(",".join(FMT % x for x in row) + "\n")


def write_order_csv(path: str, hs, err_ambient, err_riemannian,
                    slope: float) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("h,err_ambient,err_riemannian\n")
        for h, ea, er in zip(hs, err_ambient, err_riemannian):
            handle.write(",".join(FMT % x for x in (h, ea, er)) + "\n")
        handle.write("# slope=" + FMT % slope + "\n")


def write_drift_csv(path: str, times, columns: dict[str, Array]) -> None:
    names = list(columns)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(",".join(["t"] + names) + "\n")
        for k, t in enumerate(times):
            row = [t] + [columns[name][k] for name in names]
            handle.write(",".join(FMT % x for x in row) + "\n")


def read_csv(path: str) -> tuple[list[str], Array, dict[str, str]]:
    """Read a harness CSV: (column names, data matrix, trailing comments)."""
    names, rows, comments = [], [], {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                comments[key] = value
                continue
            if not names:
                names = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    return names, np.array(rows), comments


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------

def run(spec: ExperimentSpec):
    """Integrate one (problem, method, h) combination; write a trajectory
    CSV when an output path is configured."""
    problem, u0, _ = build_problem(spec)
    if isinstance(spec.h, tuple):
        raise ValueError("'run' needs a single step size, not a list")
    method = make_method(spec.method, nq=spec.nq)
    record = integrate(method, problem, spec.h, spec.t_end, u0,
                       spec.step_config())
    if record.failed is not None:
        raise RuntimeError(f"method {spec.method!r} failed at "
                           f"{record.failed}")
    if spec.out:
        write_trajectory_csv(spec.out, problem, record)
    return record


def fit_slope(hs, errs, min_ratio: float = 1.3) -> float:
    """Least-squares slope of log(err) vs log(h), restricted to the
    asymptotic range.

    The full h-list may contain points where the error has saturated at
    the solution-space diameter (large h, low-order methods), failed runs
    (NaN), or a round-off plateau (small h, high-order methods); fitting
    through those flattens the slope.  The fit therefore uses the longest
    contiguous run of points whose error keeps shrinking by at least
    min_ratio per halving of h, and then drops trailing points whose
    decay rate has visibly broken away from the run (the onset of the
    round-off plateau), detected as a step-to-step log2-ratio more than
    one octave below the run median."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    ok = np.isfinite(errs) & (errs > 0)
    best = (0, 0)
    start = None
    for i in range(len(hs) - 1):
        good = ok[i] and ok[i + 1] and errs[i] / errs[i + 1] >= min_ratio
        if good and start is None:
            start = i
        if (not good or i == len(hs) - 2) and start is not None:
            end = i + 1 if good else i
            if end - start > best[1] - best[0]:
                best = (start, end)
            start = None
    lo, hi = best
    if hi - lo < 1:
        idx = np.flatnonzero(ok)
        if idx.size < 2:
            return float("nan")
        coef = np.polyfit(np.log(hs[idx]), np.log(errs[idx]), 1)
        return float(coef[0])
    gaps = np.log2(errs[lo:hi] / errs[lo + 1:hi + 1])
    cut = np.median(gaps) - 1.0
    while gaps.size > 1 and gaps[-1] < cut:
        gaps = gaps[:-1]
        hi -= 1
    window = np.arange(lo, hi + 1)
    coef = np.polyfit(np.log(hs[window]), np.log(errs[window]), 1)
    return float(coef[0])


def _endpoint_errors(problem, u_final, u_ref):
    err_a = float(np.linalg.norm(u_final - u_ref))
    err_r = problem.manifold.distance(u_final, u_ref)
    return err_a, err_r


def reference_endpoint(spec: ExperimentSpec, problem, u0, exact) -> Array:
    """True state at t_end per the reference policy: the exact solution
    when available and requested, otherwise a fine collocation run."""
    policy = spec.reference
    if policy is None:
        policy = "exact" if exact is not None else "fine"
    if policy == "exact":
        if exact is None:
            raise ValueError("reference policy 'exact' needs a problem with "
                             "an exact solution")
        return exact(spec.t_end)
    h_ref = min(spec.h_list) / 100.0
    method = make_method("coll4", nq=spec.nq)
    record = integrate(method, problem, h_ref, spec.t_end, u0,
                       spec.step_config())
    if record.failed is not None:
        raise RuntimeError(f"reference run failed at {record.failed}")
    return record.states[-1]


def order_study(spec: ExperimentSpec):
    """Error at t_end against the reference for each h in the list, plus
    the fitted slope in the configured norm.  Failed runs enter the table
    as NaN and are excluded from the fit."""
    problem, u0, exact = build_problem(spec)
    hs = spec.h_list
    if len(hs) < 2:
        raise ValueError("an order study needs an h-list")
    u_ref = reference_endpoint(spec, problem, u0, exact)
    method = make_method(spec.method, nq=spec.nq)
    err_a, err_r = [], []
    for h in hs:
        record = integrate(method, problem, h, spec.t_end, u0,
                           spec.step_config())
        if record.failed is not None:
            err_a.append(float("nan"))
            err_r.append(float("nan"))
            continue
        ea, er = _endpoint_errors(problem, record.states[-1], u_ref)
        err_a.append(ea)
        err_r.append(er)
    errs = err_a if spec.norm == "ambient" else err_r
    slope = fit_slope(hs, errs)
    if spec.out:
        write_order_csv(spec.out, hs, err_a, err_r, slope)
    return np.array(err_a), np.array(err_r), slope


def drift_study(spec: ExperimentSpec):
    """Energy error H(u^k) - H(u^0) over time for each configured method,
    one column per method; a method that fails mid-run keeps its partial
    column, padded with NaN."""
    problem, u0, _ = build_problem(spec)
    if isinstance(spec.h, tuple):
        raise ValueError("a drift study needs a single step size")
    methods = spec.methods or (spec.method,)
    n = round(spec.t_end / spec.h)
    times = spec.h * np.arange(n + 1)
    columns = {}
    failures = {}
    for mid in methods:
        record = integrate(make_method(mid, nq=spec.nq), problem, spec.h,
                           spec.t_end, u0, spec.step_config())
        col = np.full(n + 1, np.nan)
        col[:len(record.times)] = record.energy_errors
        columns[mid] = col
        if record.failed is not None:
            failures[mid] = record.failed
    if spec.out:
        write_drift_csv(spec.out, times, columns)
    return times, columns, failures


LEVEL_IA_H = 1.0
LEVEL_SIA_H = 0.01


def level_curve_study(spec: ExperimentSpec):
    """Level-curve trajectories on the sphere: per initial condition, a
    coarse Itoh-Abe run (h=1) and a fine symmetrized run (h=0.01) over the
    same horizon, written as separate trajectory CSVs '<out>_{ia,sia}_<i>.csv'."""
    problem, default_u0, _ = build_problem(spec)
    if not isinstance(problem.manifold, SphereProduct) or problem.manifold.d != 1:
        raise ValueError("level curves are defined for the single sphere")
    initials = spec.initials or (tuple(default_u0),)
    results = []
    for i, ic in enumerate(initials):
        u0 = np.asarray(ic, dtype=float)
        pair = {}
        for tag, mid, h in (("ia", "ia", LEVEL_IA_H),
                            ("sia", "sia", LEVEL_SIA_H)):
            record = integrate(make_method(mid, nq=spec.nq), problem, h,
                               spec.t_end, u0, spec.step_config())
            if record.failed is not None:
                raise RuntimeError(f"method {mid!r} failed at "
                                   f"{record.failed}")
            if spec.out:
                write_trajectory_csv(f"{spec.out}_{tag}_{i}.csv", problem,
                                     record)
            pair[tag] = record
        results.append(pair)
    return results

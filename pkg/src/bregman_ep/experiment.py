"""Experiment specs, runs and on-disk artifacts.

An experiment spec is a JSON document validated against
:data:`EXPERIMENT_SCHEMA` before anything runs. A run writes, under
``<out>/<name>/``:

``trace.csv`` (or ``trace.json``)
    One row per iteration. Columns, in this order: ``n``, ``x_0`` ...
    ``x_{d-1}``, :data:`TRACE_METRICS`. Floats are written with 17
    significant digits, so traces round-trip exactly.
``summary.json``
    Final iterate and residuals, iteration count, the two candidate limits
    and the distances to them.

Exit codes follow :data:`EXIT_OK`, :data:`EXIT_VALIDATION`,
:data:`EXIT_CONVERGENCE` and :data:`EXIT_IO`.
"""

import copy
import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .equilibrium import bifunction_from_dict
from .errors import ArgumentError, BregmanError, ConvergenceError, DomainError
from .geometry import _dist
from .instances import generate_instance
from .legendre import as_point, from_dict
from .operators import operator_from_dict
from .sets import set_from_dict
from .solver import (ProblemInstance, SolverConfig, _anchor, _start,
                     project_onto_solution_set, run_kumam, run_main)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

TRACE_METRICS = ("dist_to_ref", "dist_to_proj_anchor0", "dist_to_proj_x1",
                 "ep_residual_max", "fixpoint_residual", "step_norm")

BOUNDEDNESS_TOL = 1e-7

_open01 = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}

EXPERIMENT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentSpec",
    "type": "object",
    "additionalProperties": False,
    "required": ["instance", "seed"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9._-]+$"},
        "instance": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["f", "C", "bifunctions", "operators"],
                    "properties": {
                        "f": {"type": "object"},
                        "C": {"type": "object"},
                        "bifunctions": {"type": "array", "items": {"type": "object"}, "minItems": 1},
                        "operators": {"type": "array", "items": {"type": "object"}, "minItems": 1},
                        "reference_solution": _vector,
                        "solution_set": {"type": "object"},
                        "x1": _vector,
                    },
                },
            ]
        },
        "dim": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "solver": {"enum": ["main", "kumam"]},
        "x1": _vector,
        "config": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["type"],
                    "properties": {
                        "type": {"const": "harmonic"},
                        "a": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                        "b": {"type": "number", "minimum": 1},
                    },
                },
                "beta": {
                    "oneOf": [
                        _open01,
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["type", "value"],
                            "properties": {"type": {"const": "constant"}, "value": _open01},
                        },
                    ]
                },
                "max_iters": {"type": "integer", "minimum": 1},
                "stop_residual": {"type": "number", "minimum": 0},
                "resolvent_tol": {"type": "number", "exclusiveMinimum": 0},
                "resolvent_order": {"enum": ["composed", "cyclic"]},
                "anchor": {"oneOf": [{"enum": ["auto", "zero", "barycenter"]}, _vector]},
                "strict": {"type": "boolean"},
                "n_probes": {"type": "integer", "minimum": 2},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"format": {"enum": ["csv", "json"]}},
        },
    },
}


class SpecError(ArgumentError):
    """The experiment spec failed validation."""


@dataclass
class ExperimentSpec:
    """Validated experiment description; see :data:`EXPERIMENT_SCHEMA`."""

    instance: object
    seed: int
    name: str = None
    dim: int = None
    solver: str = "main"
    x1: list = None
    config: dict = field(default_factory=dict)
    output: dict = field(default_factory=lambda: {"format": "csv"})

    def __post_init__(self):
        if self.name is None:
            self.name = self.instance if isinstance(self.instance, str) else "custom"
        self.output = {"format": "csv", **(self.output or {})}

    @classmethod
    def from_dict(cls, data):
        validate_spec(data)
        return cls(**copy.deepcopy(data))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as err:
                raise SpecError(f"{path}: not valid JSON ({err})") from err
        return cls.from_dict(data)

    def to_dict(self):
        out = {"name": self.name, "instance": copy.deepcopy(self.instance), "seed": self.seed,
               "solver": self.solver, "config": copy.deepcopy(self.config),
               "output": dict(self.output)}
        if self.dim is not None:
            out["dim"] = self.dim
        if self.x1 is not None:
            out["x1"] = list(self.x1)
        return out

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def solver_config(self):
        return SolverConfig(rng_seed=self.seed, **self.config)

    def build_problem(self):
        if isinstance(self.instance, str):
            return generate_instance(self.instance, self.dim, self.seed)
        return instance_from_dict(self.instance, self.name)


def validate_spec(data):
    """Raise :class:`SpecError` unless ``data`` matches the schema."""
    try:
        jsonschema.validate(data, EXPERIMENT_SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SpecError(f"invalid spec at {where}: {err.message}") from err


def instance_from_dict(spec, name="custom"):
    """Build a :class:`ProblemInstance` from an inline JSON description."""
    f = from_dict(spec["f"])
    return ProblemInstance(
        f=f,
        C=set_from_dict(spec["C"]),
        bifunctions=[bifunction_from_dict(b) for b in spec["bifunctions"]],
        operators=[operator_from_dict(o, f) for o in spec["operators"]],
        reference_solution=spec.get("reference_solution"),
        solution_set=set_from_dict(spec["solution_set"]) if "solution_set" in spec else None,
        name=name,
        x1=spec.get("x1"),
    )


@dataclass
class ExperimentResult:
    status: int
    out_dir: str = None
    trace_path: str = None
    summary_path: str = None
    summary: dict = None
    message: str = ""


def _fmt(v):
    return "%.17g" % v


def trace_header(d):
    return ["n"] + [f"x_{i}" for i in range(d)] + list(TRACE_METRICS)


def trace_rows(trace):
    for rec in trace:
        yield [str(rec.n)] + [_fmt(v) for v in rec.x] + [_fmt(getattr(rec, k)) for k in TRACE_METRICS]


def write_trace_csv(path, trace, d):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(d))
        w.writerows(trace_rows(trace))


def write_trace_json(path, trace, d):
    cols = trace_header(d)
    rows = [dict(zip(cols, [rec.n] + rec.x.tolist() + [getattr(rec, k) for k in TRACE_METRICS]))
            for rec in trace]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"columns": cols, "rows": rows}, fh, allow_nan=True)


def read_trace_csv(path):
    """Load a CSV trace as ``(header, array)``; the array has one row per iteration."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ArgumentError(f"{path}: empty trace")
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(rows[0]))


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(t) for k, t in v.items()}
    if isinstance(v, np.ndarray):
        return [_jsonable(t) for t in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def boundedness_violation(problem, trace, anchor):
    """Largest ``D(p, x_{n+1}) - max{D(p, anchor), D(p, x_n)}`` along the trace."""
    p = problem.reference_solution
    if p is None or not trace:
        return math.nan
    f = problem.f
    base = _dist(f, p, anchor) if anchor is not None else -math.inf
    worst = -math.inf
    for rec in trace:
        worst = max(worst, _dist(f, p, rec.x_next) - max(base, rec.dist_to_ref))
    return worst


def summarize(spec, problem, config, trace, anchor, error=None):
    """Summary record for a finished (or aborted) run."""
    last = trace[-1] if trace else None
    x_final = last.x_next if last is not None else None
    out = {"name": spec.name, "instance": problem.name, "solver": spec.solver, "seed": spec.seed,
           "dim": problem.dim, "config": config.to_dict(),
           "status": "ok" if error is None else "failed",
           "iterations": len(trace),
           "stopped_on_residual": bool(last is not None and error is None
                                       and len(trace) < config.max_iters),
           "x_final": x_final, "x1": spec.x1 if spec.x1 is not None else problem.x1,
           "anchor": anchor}
    if last is not None:
        out["final"] = {k: getattr(last, k) for k in TRACE_METRICS}
        out["final_x_norm"] = float(np.linalg.norm(x_final))
        out["dist_ref_final"] = (_dist(problem.f, problem.reference_solution, x_final)
                                 if problem.reference_solution is not None else None)
    out["boundedness_violation"] = bv = boundedness_violation(problem, trace, anchor)
    out["boundedness_ok"] = None if math.isnan(bv) else bool(bv <= BOUNDEDNESS_TOL)
    if problem.solution_set is not None and x_final is not None:
        x1 = as_point(out["x1"])
        cands = {"x1": project_onto_solution_set(problem, x1)}
        if anchor is not None:
            cands["anchor"] = project_onto_solution_set(problem, anchor)
        dists = {k: float(np.linalg.norm(x_final - c)) for k, c in cands.items()}
        out["candidates"] = cands
        out["candidate_distances"] = dists
        out["dist_to_solution_set"] = float(np.linalg.norm(
            x_final - problem.solution_set.euclidean_project(x_final)))
        near = min(dists, key=dists.get)
        # both candidates coincide when Omega is a point or they project together
        out["approached_candidate"] = "both" if max(dists.values()) - min(dists.values()) < 1e-12 else near
    if error is not None:
        out["error"] = {"type": type(error).__name__, "message": str(error),
                        "iteration": getattr(error, "iteration", None)}
    return _jsonable(out)


def prepare(spec):
    """Validate everything that can fail before any file is written."""
    config = spec.solver_config()
    problem = spec.build_problem()
    x1 = spec.x1 if spec.x1 is not None else problem.x1
    if x1 is None:
        raise SpecError("no starting point: give x1 in the spec or the instance")
    x1 = as_point(x1, "x1")
    if x1.size != problem.dim:
        raise SpecError(f"x1 has dimension {x1.size}, instance has {problem.dim}")
    x1 = _start(problem, x1)
    if spec.solver == "kumam" and len(problem.bifunctions) != 1:
        raise SpecError("the kumam baseline takes exactly one bifunction")
    anchor = _anchor(problem, config) if spec.solver == "main" else None
    return config, problem, x1, anchor


def run_experiment(spec, out_dir, max_iters=None, seed=None):
    """Validate, run and persist one experiment.

    Parameters
    ----------
    spec : ExperimentSpec or dict
    out_dir : str
        Parent directory; artifacts go to ``out_dir/<spec.name>/``.
    max_iters, seed : int, optional
        Overrides for the corresponding spec entries.

    Returns
    -------
    ExperimentResult
        ``status`` is one of the module's exit codes. Nothing is written
        when validation fails.
    """
    try:
        if isinstance(spec, dict):
            spec = ExperimentSpec.from_dict(spec)
        if max_iters is not None or seed is not None:
            data = spec.to_dict()
            if max_iters is not None:
                data["config"]["max_iters"] = int(max_iters)
            if seed is not None:
                data["seed"] = int(seed)
            spec = ExperimentSpec.from_dict(data)
        config, problem, x1, anchor = prepare(spec)
    except (BregmanError, TypeError) as err:
        log.error("validation failed: %s", err)
        return ExperimentResult(EXIT_VALIDATION, message=str(err))

    run = run_main if spec.solver == "main" else run_kumam
    error = None
    try:
        trace = run(problem, config, x1)
    except (ConvergenceError, DomainError, BregmanError) as err:
        error = err
        trace = getattr(err, "trace", None) or []
        log.error("run %s failed at iteration %s: %s", spec.name, getattr(err, "iteration", "?"), err)

    target = os.path.join(out_dir, spec.name)
    fmt = spec.output["format"]
    trace_path = os.path.join(target, f"trace.{fmt}")
    summary_path = os.path.join(target, "summary.json")
    try:
        summary = summarize(spec, problem, config, trace, anchor, error)
        os.makedirs(target, exist_ok=True)
        (write_trace_csv if fmt == "csv" else write_trace_json)(trace_path, trace, problem.dim)
        with open(summary_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        with open(os.path.join(target, "spec.json"), "w", encoding="utf-8") as fh:
            fh.write(spec.dumps() + "\n")
    except OSError as err:
        msg = f"cannot write artifacts under {target}: {err}"
        log.error(msg)
        return ExperimentResult(EXIT_IO, target, message=msg)
    status = EXIT_OK if error is None else EXIT_CONVERGENCE
    return ExperimentResult(status, target, trace_path, summary_path, summary,
                            "" if error is None else str(error))

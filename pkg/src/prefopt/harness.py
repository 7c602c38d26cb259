"""Multi-trial experiments: configuration, execution, aggregation and output.

Streams are keyed by ``(base_seed, trial, method name)`` so a method's
trajectories do not depend on where it sits in the method list, and the
initial point of trial ``i`` is drawn once from ``(base_seed, i, "init")``
and shared by every method.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence, TextIO

import numpy as np

from . import __version__
from .diagnostics import Metric, cost_error_metric, grad_norm_metric, param_error_metric
from .errors import AbortTrial, ConfigError, DivergedError, ExperimentError, TuningError
from .estimators import EstimatorConfig, EstimatorKind
from .lqg import LqgSystem, expected_cost, lqg_objective, perturbed_init, riccati_optimal_gain
from .oracles import InteractiveOracle, NonconvexObjective, nonconvex_objective, quadratic_objective
from .optimizer import OptimizerConfig, TrialTrace, run
from .rng import GENERATOR_ID, INIT, derive_seed, make_stream, sample_unit_sphere

log = logging.getLogger(__name__)

PROBLEM_DEFAULTS = {
    "quadratic": {"dimension": 5, "noise_std": 0.0, "x0": None, "init_radius": 1.0},
    "nonconvex": {"dimension": 5, "noise_std": 0.0, "x0": None, "init_radius": 1.0},
    "lqg": {f.name: f.default for f in dataclasses.fields(LqgSystem)},
}
METRIC_NAMES = ("grad_norm", "param_error", "cost_error")


def _reject_unknown(d: dict, allowed, where: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {', '.join(unknown)}")


@dataclass(frozen=True)
class ProblemConfig:
    kind: str
    params: tuple[tuple[str, object], ...] = ()

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemConfig":
        d = dict(d)
        kind = d.pop("kind", None)
        if kind not in PROBLEM_DEFAULTS:
            raise ConfigError(f"problem kind must be one of {sorted(PROBLEM_DEFAULTS)}, got {kind!r}")
        _reject_unknown(d, PROBLEM_DEFAULTS[kind], f"problem ({kind})")
        params = {**PROBLEM_DEFAULTS[kind], **d}
        if params.get("x0") is not None:
            params["x0"] = tuple(float(v) for v in params["x0"])
        return cls(kind, tuple(sorted(params.items())))

    @property
    def p(self) -> dict:
        return dict(self.params)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.params:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class MethodConfig:
    name: str
    kind: EstimatorKind
    eta: float | str
    delta: float
    scale: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "MethodConfig":
        _reject_unknown(d, ("name", "kind", "eta", "delta", "scale"), "method")
        try:
            kind = EstimatorKind(d["kind"])
        except (KeyError, ValueError):
            raise ConfigError(f"method kind must be one of {[k.value for k in EstimatorKind]}") from None
        eta = d.get("eta", "theorem")
        delta = float(d.get("delta", 0.01))
        if not delta > 0:
            raise ConfigError(f"delta must be positive, got {delta}")
        if isinstance(eta, str) and eta != "theorem":
            raise ConfigError(f"eta must be a number or 'theorem', got {eta!r}")
        return cls(d.get("name", kind.value), kind, eta if isinstance(eta, str) else float(eta), delta, d.get("scale"))

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind.value, "eta": self.eta, "delta": self.delta}
        if self.scale is not None:
            out["scale"] = self.scale
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig
    methods: tuple[MethodConfig, ...]
    trials: int = 10
    optimizer_T: int = 500
    base_seed: int = 0
    output_dir: str | None = None
    metrics: tuple[str, ...] = ("param_error", "cost_error")

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.optimizer_T < 1:
            raise ConfigError("optimizer_T must be at least 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError(f"method names must be unique, got {names}")
        for m in self.metrics:
            if m not in METRIC_NAMES:
                raise ConfigError(f"unknown metric {m!r}; choose from {METRIC_NAMES}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        allowed = ("problem", "methods", "trials", "optimizer_T", "base_seed", "output_dir", "metrics")
        _reject_unknown(d, allowed, "experiment config")
        if "problem" not in d or "methods" not in d:
            raise ConfigError("config needs 'problem' and 'methods'")
        kwargs = {k: d[k] for k in ("trials", "optimizer_T", "base_seed", "output_dir") if k in d}
        if "metrics" in d:
            kwargs["metrics"] = tuple(d["metrics"])
        return cls(
            ProblemConfig.from_dict(d["problem"]),
            tuple(MethodConfig.from_dict(m) for m in d["methods"]),
            **kwargs,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "problem": self.problem.to_dict(),
            "methods": [m.to_dict() for m in self.methods],
            "trials": self.trials,
            "optimizer_T": self.optimizer_T,
            "base_seed": self.base_seed,
            "output_dir": self.output_dir,
            "metrics": list(self.metrics),
        }

    def config_hash(self) -> str:
        body = {k: v for k, v in self.to_dict().items() if k != "output_dir"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class Problem:
    objective: object
    target_x: np.ndarray | None
    target_value: float | None
    initial: Callable[[np.random.Generator], np.ndarray]


@lru_cache(maxsize=32)
def build_problem(pcfg: ProblemConfig) -> Problem:
    p = pcfg.p
    if pcfg.kind == "lqg":
        system = LqgSystem(**p)
        kstar = riccati_optimal_gain(system)
        return Problem(
            lqg_objective(system),
            np.array([kstar]),
            float(expected_cost(system, kstar)),
            lambda rng: np.array([perturbed_init(kstar, rng)]),
        )

    d = int(p["dimension"])
    if p["x0"] is not None:
        x0 = np.array(p["x0"], dtype=float)
        if x0.shape != (d,):
            raise ConfigError(f"x0 must have {d} entries")
        initial = lambda rng: x0.copy()  # noqa: E731
    else:
        radius = float(p["init_radius"])
        initial = lambda rng: radius * sample_unit_sphere(rng, d)  # noqa: E731

    if pcfg.kind == "quadratic":
        return Problem(quadratic_objective(d, p["noise_std"]), np.zeros(d), 0.0, initial)
    xstar = NonconvexObjective.coordinate_minimizer()
    obj = nonconvex_objective(d, p["noise_std"])
    # param_error is ill-posed here: every sign pattern of +-xstar is a global minimizer
    return Problem(obj, None, obj.expected_value(np.full(d, xstar)), initial)


def build_metrics(problem: Problem, names: Sequence[str]) -> list[Metric]:
    out = []
    for name in names:
        if name == "grad_norm":
            out.append(grad_norm_metric(problem.objective))
        elif name == "param_error":
            if problem.target_x is None:
                raise ConfigError("param_error needs a unique minimizer; this problem has none")
            out.append(param_error_metric(problem.target_x))
        elif name == "cost_error":
            out.append(cost_error_metric(problem.objective, problem.target_value))
        else:
            raise ConfigError(f"unknown metric {name!r}")
    return out


def initial_point(cfg: ExperimentConfig, trial: int) -> np.ndarray:
    problem = build_problem(cfg.problem)
    return problem.initial(make_stream(cfg.base_seed, trial, INIT))


def run_seed(cfg: ExperimentConfig, trial: int, method: MethodConfig) -> int:
    return derive_seed(cfg.base_seed, trial, method.name)


def _run_job(cfg: ExperimentConfig, method_index: int, trial: int) -> dict:
    method = cfg.methods[method_index]
    problem = build_problem(cfg.problem)
    metrics = build_metrics(problem, cfg.metrics)
    x0 = initial_point(cfg, trial)
    ocfg = OptimizerConfig(
        T=cfg.optimizer_T,
        eta=method.eta,
        estimator=EstimatorConfig(method.kind, method.delta, problem.objective.dimension, method.scale),
        x0=tuple(x0),
        seed=run_seed(cfg, trial, method),
    )
    try:
        trace = run(problem.objective, ocfg, metrics)
    except DivergedError as exc:
        return {"method": method.name, "trial": trial, "status": "diverged", "detail": str(exc)}
    return {"method": method.name, "trial": trial, "status": "complete", "metrics": trace.metrics}


class _RunningMoments:
    """Welford accumulator over trials, elementwise in t."""

    def __init__(self, n: int):
        self.count = 0
        self.mean = np.zeros(n)
        self._m2 = np.zeros(n)

    def add(self, values: np.ndarray) -> None:
        self.count += 1
        # overflowing (inf) trials propagate as inf/nan rather than warn
        with np.errstate(over="ignore", invalid="ignore"):
            delta = values - self.mean
            self.mean += delta / self.count
            self._m2 += delta * (values - self.mean)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.maximum(self._m2, 0.0) / self.count)


@dataclass
class AggregateResult:
    config: ExperimentConfig
    mean: dict[str, dict[str, np.ndarray]]
    std: dict[str, dict[str, np.ndarray]]
    per_trial: dict[str, dict[str, np.ndarray]]
    diverged: dict[str, list[int]]
    initial_points: list[list[float]]
    provenance: dict = field(default_factory=dict)

    @property
    def methods(self) -> list[str]:
        return [m.name for m in self.config.methods]


def _provenance(cfg: ExperimentConfig) -> dict:
    return {
        "config_hash": cfg.config_hash(),
        "base_seed": cfg.base_seed,
        "run_seeds": {m.name: [run_seed(cfg, i, m) for i in range(cfg.trials)] for m in cfg.methods},
        "generator": GENERATOR_ID,
        "build": f"prefopt {__version__}",
    }


def run_experiment(cfg: ExperimentConfig, parallel: int = 1, write: bool = True) -> AggregateResult:
    """Run every (method, trial) pair, aggregate mean and std over trials.

    Diverged trials are excluded from the aggregates and listed in
    ``diverged``.  Outputs go to ``cfg.output_dir`` when set and ``write``.
    """
    jobs = [(mi, i) for mi in range(len(cfg.methods)) for i in range(cfg.trials)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_job, [cfg] * len(jobs), *zip(*jobs)))
    else:
        results = [_run_job(cfg, mi, i) for mi, i in jobs]

    n = cfg.optimizer_T + 1
    mean, std, per_trial, diverged = {}, {}, {}, {}
    for method in cfg.methods:
        rows = [r for r in results if r["method"] == method.name]
        ok = [r for r in rows if r["status"] == "complete"]
        diverged[method.name] = [r["trial"] for r in rows if r["status"] != "complete"]
        for r in rows:
            if r["status"] != "complete":
                log.warning("method %s trial %d diverged: %s", method.name, r["trial"], r["detail"])
        if not ok:
            raise ExperimentError(f"all {cfg.trials} trials of method {method.name!r} diverged")
        mean[method.name], std[method.name], per_trial[method.name] = {}, {}, {}
        for name in cfg.metrics:
            acc = _RunningMoments(n)
            for r in ok:
                acc.add(r["metrics"][name])
            mean[method.name][name] = acc.mean
            std[method.name][name] = acc.std
            per_trial[method.name][name] = np.array([r["metrics"][name] for r in ok])

    result = AggregateResult(
        cfg,
        mean,
        std,
        per_trial,
        diverged,
        [initial_point(cfg, i).tolist() for i in range(cfg.trials)],
        _provenance(cfg),
    )
    if write and cfg.output_dir is not None:
        emit_outputs(result, cfg.output_dir)
    return result


def sweep_tuning(
    cfg: ExperimentConfig,
    eta_grid: Sequence[float],
    delta_grid: Sequence[float],
    trials: int = 3,
    metric: str = "cost_error",
    parallel: int = 1,
) -> dict[str, tuple[float, float]]:
    """Pick (eta, delta) per method by the final mean ``metric`` over a grid.

    Each cell runs ``trials`` trials on a seed derived from the base seed,
    separate from the evaluation trials.  A cell with any diverged trial is
    ineligible.  Ties go to the smaller eta, then the smaller delta.
    """
    if not eta_grid or not delta_grid:
        raise TuningError("tuning grids must be nonempty")
    tune_seed = derive_seed(cfg.base_seed, "tune")
    cells = sorted((float(e), float(d)) for e in eta_grid for d in delta_grid)
    best = {}
    for method in cfg.methods:
        best_score, best_cell = np.inf, None
        for eta, delta in cells:
            cell_cfg = dataclasses.replace(
                cfg,
                methods=(dataclasses.replace(method, eta=eta, delta=delta),),
                trials=trials,
                base_seed=tune_seed,
                output_dir=None,
                metrics=(metric,),
            )
            try:
                res = run_experiment(cell_cfg, parallel=parallel, write=False)
            except ExperimentError:
                continue
            if res.diverged[method.name]:
                continue
            score = float(res.mean[method.name][metric][-1])
            log.debug("tune %s eta=%g delta=%g -> %g", method.name, eta, delta, score)
            if score < best_score:
                best_score, best_cell = score, (eta, delta)
        if best_cell is None:
            raise TuningError(f"every grid cell diverged for method {method.name!r}")
        best[method.name] = best_cell
    return best


def apply_tuning(cfg: ExperimentConfig, tuned: dict[str, tuple[float, float]]) -> ExperimentConfig:
    methods = tuple(
        dataclasses.replace(m, eta=tuned[m.name][0], delta=tuned[m.name][1]) if m.name in tuned else m
        for m in cfg.methods
    )
    return dataclasses.replace(cfg, methods=methods)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def emit_outputs(result: AggregateResult, out_dir) -> list[Path]:
    """Write per-method CSV traces, ``experiment.json`` and one SVG per metric."""
    from .plotting import plot_metric

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written = []
    for name in result.methods:
        path = out / f"trace_{name}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "metric", "mean", "std"])
            for t in range(cfg.optimizer_T + 1):
                for metric in cfg.metrics:
                    writer.writerow(
                        [t, metric, _fmt(result.mean[name][metric][t]), _fmt(result.std[name][metric][t])]
                    )
        written.append(path)

    meta = {
        "config": cfg.to_dict(),
        "provenance": result.provenance,
        "diverged_trials": result.diverged,
        "initial_points": result.initial_points,
        "final": {
            name: {m: {"mean": result.mean[name][m][-1], "std": result.std[name][m][-1]} for m in cfg.metrics}
            for name in result.methods
        },
    }
    path = out / "experiment.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=float) + "\n", encoding="utf-8")
    written.append(path)

    for metric in cfg.metrics:
        path = out / f"fig_{metric}.svg"
        plot_metric(result, metric, path)
        written.append(path)
    return written


@dataclass(frozen=True)
class InteractiveConfig:
    dimension: int
    x0: tuple[float, ...]
    T: int = 10
    eta: float = 0.1
    delta: float = 0.5
    seed: int = 0
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "InteractiveConfig":
        _reject_unknown(d, [f.name for f in dataclasses.fields(cls)], "interactive config")
        d = dict(d)
        if "x0" not in d:
            raise ConfigError("interactive config needs 'x0'")
        d["x0"] = tuple(float(v) for v in d["x0"])
        d.setdefault("dimension", len(d["x0"]))
        return cls(**d)

    @classmethod
    def load(cls, path) -> "InteractiveConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def interactive_session(
    icfg: InteractiveConfig, input_fn: Callable[[str], str] = input, out: TextIO | None = None
) -> TrialTrace:
    """Run PSGD-U with a human answering each comparison.

    On abort the partial trace is returned with ``status == "aborted"``.  The
    trace and the response log are written to ``icfg.output_dir`` if set.
    """
    oracle = InteractiveOracle(icfg.dimension, input_fn=input_fn, out=out)
    ocfg = OptimizerConfig(
        T=icfg.T,
        eta=icfg.eta,
        estimator=EstimatorConfig(EstimatorKind.PSGD_U, icfg.delta, icfg.dimension),
        x0=icfg.x0,
        seed=icfg.seed,
    )
    try:
        trace = run(oracle, ocfg)
    except AbortTrial as exc:
        trace = exc.trace
    if icfg.output_dir is not None:
        path = Path(icfg.output_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / "interactive_trace.json").write_text(json.dumps(trace.to_dict(), indent=2) + "\n", encoding="utf-8")
        (path / "interactive_responses.json").write_text(json.dumps(oracle.log, indent=2) + "\n", encoding="utf-8")
    return trace

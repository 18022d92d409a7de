"""Benchmarks: the Gaussian toy latent-variable model, an IWAE/MLMC baseline,
and drivers that produce record tables.

Toy model: ``z ~ N(theta 1_d, I)``, ``y | z ~ N(z, I)``. Drawing ``Z`` from the
prior and setting ``X = N(y; Z, I)`` gives unbiased draws of the likelihood
``m = p(y | theta) = N(y; theta 1_d, 2 I)``; every moment needed to check the
estimators is available in closed form.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import oracle
from .errors import DebiasError, DomainError, ResourceExceeded
from .series import EstimatorKind, Expansion, FunctionKind, TruncationLaw, sum_estimate
from .sources import GaussianSource
from .streams import map_replicates, replicate_rng, standard_error
from .tuning import beta_squared, tune, x0_star

RECORD_SCHEMA_VERSION = 1
RECORD_COLUMNS = ("method", "replicate", "estimate", "r_or_level", "cost", "seed")

# fixed stream ids so that adding a method never reshuffles another's draws
_METHOD_STREAMS = {"data": 0, "simple": 1, "cycling": 2, "mvue": 3, "mlmc": 4}

_LOG_2PI = math.log(2.0 * math.pi)


# ----------------------------------------------------------------------------
# toy latent-variable model


@dataclass(frozen=True)
class ToyLvmSpec:
    """One observation ``y`` (length ``d``) of the toy model at parameter ``theta``."""

    d: int
    theta: float
    y: tuple

    def __post_init__(self):
        y = tuple(float(v) for v in np.atleast_1d(np.asarray(self.y, dtype=float)))
        object.__setattr__(self, "y", y)
        if self.d < 1:
            raise DomainError("latent dimension d must be at least 1")
        if len(y) != self.d:
            raise DomainError(f"y has length {len(y)}, expected d = {self.d}")
        if not (math.isfinite(self.theta) and all(math.isfinite(v) for v in y)):
            raise DomainError("theta and y must be finite")

    @classmethod
    def centred(cls, d: int, theta: float = 0.0) -> "ToyLvmSpec":
        """The datum ``y = theta 1_d`` (the model's mode)."""
        return cls(d, theta, (theta,) * d)

    @property
    def y_vec(self) -> np.ndarray:
        return np.asarray(self.y)

    def with_theta(self, theta: float) -> "ToyLvmSpec":
        return ToyLvmSpec(self.d, theta, self.y)


@dataclass(frozen=True)
class ToyLvmMoments:
    m: float
    var: float
    beta2_at_x0star: float
    x0_star: float
    grad_m: float
    grad_log_m: float
    mle: float


def _log_gauss_iso(x: np.ndarray, mean, var: float) -> np.ndarray:
    """Log density of ``N(mean, var I)`` at the rows of ``x`` (last axis = dim)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    sq = np.sum((x - mean) ** 2, axis=-1)
    return -0.5 * d * (_LOG_2PI + math.log(var)) - 0.5 * sq / var


def toy_lvm_mle(data) -> float:
    """Maximum-likelihood ``theta`` for rows of ``data``: the grand mean."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    return float(data.mean())


def toy_lvm_log_m(spec: ToyLvmSpec) -> float:
    return float(_log_gauss_iso(spec.y_vec, spec.theta, 2.0))


def toy_lvm_moments(spec: ToyLvmSpec) -> ToyLvmMoments:
    d = spec.d
    sq = float(np.sum((spec.y_vec - spec.theta) ** 2))
    m = math.exp(toy_lvm_log_m(spec))
    second = (4.0 * math.pi) ** (-d / 2) * math.exp(float(_log_gauss_iso(spec.y_vec, spec.theta, 1.5)))
    var = max(second - m * m, 0.0)
    beta2 = 1.0 - (4.0 / 3.0) ** (-d / 2) * math.exp(-sq / 6.0)
    grad_log_m = float(np.sum(spec.y_vec - spec.theta)) / 2.0
    return ToyLvmMoments(
        m=m,
        var=var,
        beta2_at_x0star=beta2,
        x0_star=x0_star(m, var),
        grad_m=grad_log_m * m,
        grad_log_m=grad_log_m,
        mle=toy_lvm_mle(spec.y_vec),
    )


def _draw_latents(spec: ToyLvmSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    return spec.theta + rng.standard_normal((n, spec.d))


def toy_lvm_sample_x(spec: ToyLvmSpec, rng: np.random.Generator, n: Optional[int] = None):
    """``X = N(y; Z, I)`` with ``Z`` from the prior; a scalar when ``n`` is None."""
    z = _draw_latents(spec, 1 if n is None else n, rng)
    x = np.exp(_log_gauss_iso(z, spec.y_vec, 1.0))
    return float(x[0]) if n is None else x


def toy_lvm_sample_pair(spec: ToyLvmSpec, rng: np.random.Generator, n: Optional[int] = None):
    """``(X, G)`` with ``G = X * sum_j (Z_j - theta)``, so that ``E[G] = d m / d theta``."""
    z = _draw_latents(spec, 1 if n is None else n, rng)
    x = np.exp(_log_gauss_iso(z, spec.y_vec, 1.0))
    g = x * np.sum(z - spec.theta, axis=1)
    if n is None:
        return float(x[0]), float(g[0])
    return x, g


class ToyLvmSource:
    """Sample and pair source for one datum of the toy model (scalar theta)."""

    dim = 1

    def __init__(self, spec: ToyLvmSpec):
        self.spec = spec

    def draw(self, n, rng):
        return toy_lvm_sample_x(self.spec, rng, n)

    def draw_pairs(self, n, rng):
        x, g = toy_lvm_sample_pair(self.spec, rng, n)
        return x, g.reshape(n, 1)

    def __repr__(self):
        return f"ToyLvmSource({self.spec!r})"


def generate_toy_data(d: int, n: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` observations of the toy model, shape ``(n, d)``."""
    z = theta + rng.standard_normal((n, d))
    return z + rng.standard_normal((n, d))


# ----------------------------------------------------------------------------
# IWAE and the MLMC debiased log-likelihood


@dataclass(frozen=True)
class MlmcSpec:
    """Base level ``j``, level law ``Geometric(p_tilde)`` and the proposal centre parameter.

    Expected cost is ``2^(j+1) p_tilde / (2 p_tilde - 1)`` latent draws.
    """

    j: int = 0
    p_tilde: float = 0.6
    theta_star: float = 0.0
    cost_cap: int = 2**24

    def __post_init__(self):
        if self.j < 0:
            raise DomainError("base level j must be non-negative")
        if not 0.0 < self.p_tilde < 1.0:
            raise DomainError("p_tilde must lie in (0, 1)")

    @property
    def expected_cost(self) -> float:
        if self.p_tilde <= 0.5:
            return math.inf
        return 2.0 ** (self.j + 1) * self.p_tilde / (2.0 * self.p_tilde - 1.0)

    @classmethod
    def from_budget(cls, budget: float, theta_star: float, p_tilde: float = 0.6, **kw) -> "MlmcSpec":
        """Pick ``j`` so that the expected cost equals ``budget`` exactly."""
        if p_tilde <= 0.5:
            raise DomainError("expected cost is infinite for p_tilde <= 0.5")
        level = math.log2(budget * (2.0 * p_tilde - 1.0) / p_tilde) - 1.0
        j = round(level)
        if j < 0 or abs(level - j) > 1e-9:
            raise DomainError(f"no integer base level gives expected cost {budget} at p_tilde={p_tilde}")
        return cls(j, p_tilde, theta_star, **kw)


def iwae_log_weights(spec: ToyLvmSpec, mlmc: MlmcSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """``log p(Z, y | theta) - log q(Z; y)`` for ``n`` draws of the proposal."""
    centre = (spec.y_vec + mlmc.theta_star) / 2.0
    z = centre + math.sqrt(2.0 / 3.0) * rng.standard_normal((n, spec.d))
    return (_log_gauss_iso(z, spec.theta, 1.0)
            + _log_gauss_iso(z, spec.y_vec, 1.0)
            - _log_gauss_iso(z, centre, 2.0 / 3.0))


def _log_mean_exp(lw: np.ndarray) -> float:
    return float(logsumexp(lw) - math.log(lw.size))


def iwae_estimate(spec: ToyLvmSpec, mlmc: MlmcSpec, level: int, rng: np.random.Generator) -> float:
    """``log`` of the importance-weight average over ``2^level`` proposal draws."""
    if level < 0:
        raise DomainError("level must be non-negative")
    return _log_mean_exp(iwae_log_weights(spec, mlmc, 2**level, rng))


@dataclass(frozen=True)
class MlmcEstimate:
    value: float
    cost: int
    level: int


LogWeightSampler = Callable[[int, np.random.Generator], np.ndarray]


def mlmc_log_likelihood(
    spec: ToyLvmSpec,
    mlmc: MlmcSpec,
    rng: np.random.Generator,
    log_weights: Optional[LogWeightSampler] = None,
) -> MlmcEstimate:
    """Randomly truncated telescoping sum of IWAE level differences.

    All ``2^(j+1+R)`` proposal draws are made once; level ``k`` uses the first
    ``2^(j+k+1)`` of them and splits them into even/odd halves for the
    antithetic coarse estimate. ``log_weights(n, rng)`` replaces the Gaussian
    proposal (useful for stubbing).
    """
    level = int(rng.geometric(mlmc.p_tilde)) - 1
    cost = 2 ** (mlmc.j + 1 + level)
    if cost > mlmc.cost_cap:
        raise ResourceExceeded(f"MLMC cost {cost} (level {level}) exceeds the cap {mlmc.cost_cap}")
    if log_weights is None:
        lw = iwae_log_weights(spec, mlmc, cost, rng)
    else:
        lw = np.asarray(log_weights(cost, rng), dtype=float)

    value = _log_mean_exp(lw[: 2**mlmc.j])
    q = 1.0 - mlmc.p_tilde
    for k in range(level + 1):
        block = lw[: 2 ** (mlmc.j + k + 1)]
        fine = _log_mean_exp(block)
        coarse = 0.5 * (_log_mean_exp(block[0::2]) + _log_mean_exp(block[1::2]))
        value += (fine - coarse) / q**k
    return MlmcEstimate(value, cost, level)


# ----------------------------------------------------------------------------
# record tables


@dataclass(frozen=True)
class Record:
    method: str
    replicate: int
    estimate: float
    r_or_level: int
    cost: int
    seed: int
    error: str = ""


class RecordTable:
    """Ordered per-replicate records plus run metadata.

    CSV columns are ``method,replicate,estimate,r_or_level,cost,seed``; an
    ``error`` column is appended only when some replicate failed, in which case
    its estimate is NaN. JSON lines carry the same fields, preceded by a
    metadata line with the schema version and the resolved configuration.
    """

    def __init__(self, records: Iterable[Record], metadata: Optional[dict] = None):
        self.records = list(records)
        self.metadata = dict(metadata or {})

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def has_errors(self) -> bool:
        return any(r.error for r in self.records)

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.records))

    def column(self, name: str, method: Optional[str] = None) -> np.ndarray:
        rows = [r for r in self.records if method is None or r.method == method]
        return np.array([getattr(r, name) for r in rows])

    def ok(self, method: Optional[str] = None) -> "RecordTable":
        keep = [r for r in self.records if not r.error and (method is None or r.method == method)]
        return RecordTable(keep, self.metadata)

    def columns(self) -> tuple[str, ...]:
        return RECORD_COLUMNS + (("error",) if self.has_errors else ())

    def to_csv(self, out=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns()
        writer.writerow(cols)
        for r in self.records:
            row = [r.method, r.replicate, repr(float(r.estimate)), r.r_or_level, r.cost, r.seed]
            if "error" in cols:
                row.append(r.error)
            writer.writerow(row)
        text = buf.getvalue()
        if out is not None:
            _write_text(out, text)
        return text

    def to_jsonl(self, out=None) -> str:
        lines = [json.dumps({"schema_version": RECORD_SCHEMA_VERSION, "metadata": self.metadata},
                            sort_keys=True, default=_json_default)]
        for r in self.records:
            row = asdict(r)
            if not row["error"]:
                del row["error"]
            row["estimate"] = None if math.isnan(r.estimate) else r.estimate
            lines.append(json.dumps(row, sort_keys=True))
        text = "\n".join(lines) + "\n"
        if out is not None:
            _write_text(out, text)
        return text


def _write_text(out, text: str):
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


# ----------------------------------------------------------------------------
# toy-LVM benchmark driver


@dataclass
class ToyLvmBenchConfig:
    """Settings for ``run_toy_lvm_bench``.

    ``budget`` is the expected number of latent draws per datum. Taylor
    methods use ``p = 1/(budget + 1)``; MLMC picks its base level to match.
    ``x0_policy="oracle"`` expands each datum at its closed-form optimum,
    ``"pilot"`` tunes from ``n0`` extra draws per datum, counted in the cost.
    """

    seed: int
    d: int = 2
    n: int = 10
    theta: float = 0.0
    budget: float = 6.0
    methods: Sequence[str] = ("simple", "cycling", "mvue", "mlmc")
    replicates: int = 100
    x0_policy: str = "oracle"
    n0: int = 10
    data_theta: float = 0.0
    data: Optional[np.ndarray] = None
    threads: Optional[int] = None

    def resolved(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["methods"] = list(self.methods)
        out["data"] = None if self.data is None else np.asarray(self.data).tolist()
        return out


def toy_dataset(config: ToyLvmBenchConfig) -> np.ndarray:
    if config.data is not None:
        data = np.atleast_2d(np.asarray(config.data, dtype=float))
        if data.shape[1] != config.d:
            raise DomainError(f"data rows have length {data.shape[1]}, expected d = {config.d}")
        return data
    rng, _ = replicate_rng(config.seed, 0, _METHOD_STREAMS["data"])
    return generate_toy_data(config.d, config.n, config.data_theta, rng)


def toy_lvm_truth(data: np.ndarray, theta: float) -> float:
    """Closed-form ``sum_i log p(y_i | theta)``."""
    return float(np.sum(_log_gauss_iso(np.atleast_2d(data), theta, 2.0)))


def run_toy_lvm_bench(config: ToyLvmBenchConfig) -> RecordTable:
    """Per replicate and method: summed log-likelihood estimate over the data and total cost."""
    data = toy_dataset(config)
    specs = [ToyLvmSpec(config.d, config.theta, row) for row in data]
    truth = toy_lvm_truth(data, config.theta)
    records: list[Record] = []

    for method in config.methods:
        if method not in _METHOD_STREAMS or method == "data":
            raise DomainError(f"unknown bench method {method!r}")
        if method == "mlmc":
            mlmc = MlmcSpec.from_budget(config.budget, toy_lvm_mle(data))
            fn = _mlmc_replicate(specs, mlmc)
        else:
            fn = _taylor_replicate(specs, EstimatorKind(method), config)
        results = map_replicates(fn, config.replicates, config.seed, config.threads,
                                 stream=_METHOD_STREAMS[method])
        records.extend(Record(method, i, *res) for i, res in enumerate(results))

    meta = {"config": config.resolved(), "truth": truth, "driver": "toy-lvm"}
    return RecordTable(records, meta)


def _taylor_replicate(specs, kind: EstimatorKind, config: ToyLvmBenchConfig):
    law = TruncationLaw(1.0 / (config.budget + 1.0))
    oracle_points = [toy_lvm_moments(s).x0_star for s in specs]

    def run(i, rng, seed):
        total, cost, r_sum = 0.0, 0, 0
        try:
            for spec, x0 in zip(specs, oracle_points):
                source = ToyLvmSource(spec)
                if config.x0_policy == "pilot":
                    x0 = tune(source, config.n0, rng).x0_chosen
                    cost += config.n0
                elif config.x0_policy != "oracle":
                    raise DomainError(f"unknown x0 policy {config.x0_policy!r}")
                est = sum_estimate(Expansion.log(x0), law, kind, source, rng)
                total += est.value
                cost += est.samples_used
                r_sum += est.r
        except DebiasError as exc:
            return math.nan, r_sum, cost, seed, f"{type(exc).__name__}: {exc}"
        return total, r_sum, cost, seed, ""

    return run


def _mlmc_replicate(specs, mlmc: MlmcSpec):
    def run(i, rng, seed):
        total, cost, top = 0.0, 0, 0
        try:
            for spec in specs:
                est = mlmc_log_likelihood(spec, mlmc, rng)
                total += est.value
                cost += est.cost
                top = max(top, est.level)
        except DebiasError as exc:
            return math.nan, top, cost, seed, f"{type(exc).__name__}: {exc}"
        return total, top, cost, seed, ""

    return run


# ----------------------------------------------------------------------------
# variance study


@dataclass
class VarianceStudyConfig:
    """Settings for ``run_variance_study`` on a Gaussian source ``N(m, var)``.

    ``x0`` is a number or ``"oracle"`` (the variance-optimal point). ``replicates``
    may be a mapping ``estimator -> count`` so the quadratic-cost estimators can
    run fewer replicates at small ``p``.
    """

    seed: int
    function: str = "reciprocal"
    m: float = 1.0
    var: float = 1.0
    x0: object = 2.0
    p_grid: Sequence[float] = (0.1, 0.01, 0.001)
    estimators: Sequence[str] = ("simple", "cycling")
    replicates: object = 10_000
    n0: int = 10
    threads: Optional[int] = None

    def resolved(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["p_grid"] = list(self.p_grid)
        out["estimators"] = list(self.estimators)
        if isinstance(self.replicates, Mapping):
            out["replicates"] = dict(self.replicates)
        return out

    def replicates_for(self, estimator: str) -> int:
        if isinstance(self.replicates, Mapping):
            return int(self.replicates.get(estimator, self.replicates.get("default", 10_000)))
        return int(self.replicates)

    def expansion_point(self) -> float:
        if self.x0 in ("oracle", "auto"):
            return x0_star(self.m, self.var)
        return float(self.x0)


VARIANCE_COLUMNS = (
    "estimator", "p", "replicates", "failures", "mean", "mean_se", "variance",
    "evar", "evar_se", "wnv", "truth", "prop1_lower", "prop1_upper",
    "sampling_bound", "simple_limit", "error",
)


@dataclass(frozen=True)
class VarianceRow:
    """Summary of one (estimator, p) cell.

    ``evar`` estimates ``E[var(f_hat | R)]`` by averaging ``(f_hat - E[f_hat |
    R])^2`` with the conditional mean computed exactly from ``m``;
    ``sampling_bound`` is the matching simple or cycling bound on it.
    """

    estimator: str
    p: float
    replicates: int
    failures: int
    mean: float
    mean_se: float
    variance: float
    evar: float
    evar_se: float
    wnv: float
    truth: float
    prop1_lower: float
    prop1_upper: float
    sampling_bound: float
    simple_limit: float
    error: str = ""


def _expansion_for(function: str, x0: float) -> Expansion:
    kind = FunctionKind(function)
    if kind is FunctionKind.LOG:
        return Expansion.log(x0)
    if kind is FunctionKind.RECIPROCAL:
        return Expansion.reciprocal(x0)
    raise DomainError("the variance study supports the log and reciprocal functions")


def _or_nan(fn, *args):
    try:
        return fn(*args)
    except DomainError:
        return math.nan


def run_variance_study(config: VarianceStudyConfig) -> list[VarianceRow]:
    x0 = config.expansion_point()
    expansion = _expansion_for(config.function, x0)
    source = GaussianSource(config.m, config.var)
    params = oracle.MomentParams(config.m, config.var, x0)
    beta0, beta = params.beta0, math.sqrt(params.beta2)
    truth = expansion.function_value(config.m)
    limit = (_or_nan(oracle.simple_variance_limit, params)
             if expansion.kind is FunctionKind.RECIPROCAL else math.nan)

    rows = []
    for s_idx, name in enumerate(config.estimators):
        kind = EstimatorKind(name)
        for p_idx, p in enumerate(config.p_grid):
            law = TruncationLaw(float(p))
            n = config.replicates_for(name)

            def run(i, rng, seed, law=law, kind=kind):
                try:
                    est = sum_estimate(expansion, law, kind, source, rng, seed)
                except DebiasError as exc:
                    return math.nan, -1, f"{type(exc).__name__}: {exc}"
                return est.value, est.r, ""

            stream = 1000 * (list(EstimatorKind).index(kind) + 1) + p_idx
            out = map_replicates(run, n, config.seed, config.threads, stream=stream)
            values = np.array([o[0] for o in out])
            rs = np.array([o[1] for o in out])
            errors = [o[2] for o in out if o[2]]
            good = rs >= 0
            values, rs = values[good], rs[good]

            if values.size:
                # divergent settings legitimately summarise to inf/nan
                with np.errstate(over="ignore", invalid="ignore"):
                    curve = oracle.conditional_expectation_curve(expansion, law, config.m, int(rs.max()))
                    dev2 = (values - curve[rs]) ** 2
                    mean, variance = float(values.mean()), float(values.var(ddof=1)) if values.size > 1 else math.nan
                    evar, evar_se = float(dev2.mean()), standard_error(dev2)
                    mean_se = standard_error(values)
            else:
                mean = mean_se = variance = evar = evar_se = math.nan

            if beta0**2 < 1 - law.p:
                lower, upper = oracle.prop1_bounds(law.p, beta0, expansion.c, truth, expansion.coefficient(0))
            else:
                lower = upper = math.nan
            if kind is EstimatorKind.SIMPLE:
                bound = _or_nan(oracle.prop2_bound, law.p, beta, expansion.c)
            elif kind is EstimatorKind.CYCLING:
                bound = _or_nan(oracle.prop3_bound, law.p, beta0, beta, expansion.c)
            else:
                bound = math.nan

            rows.append(VarianceRow(
                estimator=name, p=float(p), replicates=int(values.size), failures=len(errors),
                mean=mean, mean_se=mean_se, variance=variance,
                evar=evar, evar_se=evar_se, wnv=(config.n0 + law.mean) * variance, truth=truth,
                prop1_lower=lower, prop1_upper=upper, sampling_bound=bound, simple_limit=limit,
                error=errors[0] if errors else "",
            ))
    return rows


def variance_rows_to_csv(rows: Sequence[VarianceRow], out=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(VARIANCE_COLUMNS)
    for row in rows:
        values = asdict(row)
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in (values[c] for c in VARIANCE_COLUMNS)])
    text = buf.getvalue()
    if out is not None:
        _write_text(out, text)
    return text


def variance_rows_to_jsonl(rows: Sequence[VarianceRow], metadata: Optional[dict] = None, out=None) -> str:
    def clean(v):
        return None if isinstance(v, float) and not math.isfinite(v) else v

    lines = [json.dumps({"schema_version": RECORD_SCHEMA_VERSION, "metadata": metadata or {}},
                        sort_keys=True, default=_json_default)]
    lines += [json.dumps({k: clean(v) for k, v in asdict(r).items()}, sort_keys=True) for r in rows]
    text = "\n".join(lines) + "\n"
    if out is not None:
        _write_text(out, text)
    return text

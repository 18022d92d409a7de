"""Command-line interface: ``debias {tune, estimate, bench, oracle}``.

Exit codes: 0 success, 2 domain or precondition error (including malformed
input), 3 resource exceeded, 4 I/O failure. The fully resolved configuration
of every run is echoed as one JSON line on stderr (and to ``--config-out``);
feeding it back through ``--config`` reproduces the run.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from . import bench, oracle, tuning
from .errors import DebiasError, DomainError, ResourceExceeded
from .series import (
    DEFAULT_R_MAX,
    EstimatorKind,
    Expansion,
    TruncationLaw,
    gradient_sum_estimate,
    sum_estimate,
)
from .sources import GaussianSource, PairStreamSource, StreamSource
from .streams import map_replicates, replicate_rng

EXIT_OK, EXIT_DOMAIN, EXIT_RESOURCE, EXIT_IO = 0, 2, 3, 4

PILOT_STREAM = 1
ESTIMATE_STREAM = 2

DEFAULTS = {
    "function": "log",
    "estimator": "cycling",
    "x0": "auto",
    "p": "auto",
    "n0": 10,
    "replicates": 1000,
    "seed": 0,
    "r_max": DEFAULT_R_MAX,
    "source": {"kind": "gaussian", "m": 1.0, "var": 1.0},
    "output": "-",
    "format": "csv",
    "gradient": False,
    "alpha": tuning.DEFAULT_ALPHA,
    "n_boot": tuning.DEFAULT_N_BOOT,
}


class InputError(DomainError):
    """Malformed sample stream or config content."""


# ----------------------------------------------------------------------------
# config resolution


def _parse_source_string(text: str) -> dict:
    """``gaussian:m,var``, ``toy-lvm:d[,theta]``, ``stdin`` or ``file:path``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    nums = [float(v) for v in rest.split(",") if v.strip()] if kind in ("gaussian", "toy-lvm") else []
    if kind == "gaussian":
        if len(nums) != 2:
            raise InputError("gaussian source expects 'gaussian:m,var'")
        return {"kind": "gaussian", "m": nums[0], "var": nums[1]}
    if kind == "toy-lvm":
        if not nums:
            raise InputError("toy-lvm source expects 'toy-lvm:d[,theta]'")
        d = int(nums[0])
        theta = nums[1] if len(nums) > 1 else 0.0
        return {"kind": "toy-lvm", "d": d, "theta": theta, "y": [theta] * d}
    if kind == "stdin":
        return {"kind": "stdin"}
    if kind == "file":
        return {"kind": "file", "path": rest}
    raise InputError(f"unknown source {text!r}")


def _normalise_source(src, args) -> dict:
    src = _parse_source_string(src) if isinstance(src, str) else dict(src)
    kind = src.get("kind")
    if kind == "gaussian":
        if getattr(args, "m", None) is not None:
            src["m"] = args.m
        if getattr(args, "var", None) is not None:
            src["var"] = args.var
        return {"kind": "gaussian", "m": float(src["m"]), "var": float(src["var"])}
    if kind == "toy-lvm":
        d = int(args.d if getattr(args, "d", None) is not None else src.get("d", 2))
        theta = float(args.theta if getattr(args, "theta", None) is not None else src.get("theta", 0.0))
        y = args.y if getattr(args, "y", None) is not None else src.get("y")
        y = [theta] * d if y is None else [float(v) for v in y]
        return {"kind": "toy-lvm", "d": d, "theta": theta, "y": y}
    if kind in ("stdin", "file"):
        return src
    raise InputError(f"unknown source kind {kind!r}")


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise InputError(f"config file {path}: top level must be an object")
    unknown = set(cfg) - set(DEFAULTS) - {"threads"}
    if unknown:
        raise InputError(f"config file {path}: unknown keys {sorted(unknown)}")
    return cfg


def resolve_config(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(_load_config_file(getattr(args, "config", None)))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and key != "source":
            cfg[key] = value
    source = args.source if getattr(args, "source", None) is not None else cfg["source"]
    cfg["source"] = _normalise_source(source, args)
    for key in ("x0", "p"):
        if cfg[key] != "auto":
            cfg[key] = float(cfg[key])
    for key in ("n0", "replicates", "seed", "r_max", "n_boot"):
        cfg[key] = int(cfg[key])
    cfg["gradient"] = bool(cfg["gradient"])
    if cfg["format"] not in ("csv", "json"):
        raise InputError("format must be csv or json")
    return cfg


def _echo_config(cfg: dict, args) -> None:
    line = json.dumps(cfg, sort_keys=True)
    print(f"# resolved config: {line}", file=sys.stderr)
    path = getattr(args, "config_out", None)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")


# ----------------------------------------------------------------------------
# sample streams


def parse_sample_lines(lines, columns: Optional[int] = None) -> np.ndarray:
    """Parse the line protocol: one number per line, or ``X g1 .. gd`` rows.

    Blank lines are skipped; anything else that is not a finite number aborts
    with the offending line number.
    """
    rows = []
    width = columns
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        parts = text.split()
        try:
            values = [float(v) for v in parts]
        except ValueError:
            raise InputError(f"line {lineno}: cannot parse {text!r} as numbers") from None
        if not all(math.isfinite(v) for v in values):
            raise InputError(f"line {lineno}: non-finite value in {text!r}")
        if width is None:
            width = len(values)
        if len(values) != width:
            raise InputError(f"line {lineno}: expected {width} field(s), found {len(values)}")
        rows.append(values)
    if not rows:
        return np.empty((0, width or 1))
    return np.asarray(rows, dtype=float)


def _read_stream_lines(src: dict, stdin) -> list[str]:
    if src["kind"] == "stdin":
        return stdin.readlines()
    with open(src["path"], encoding="utf-8") as fh:
        return fh.readlines()


class _Sources:
    """Resolved sample source plus the replicate-stream policy it implies."""

    def __init__(self, cfg: dict, stdin):
        self.spec = cfg["source"]
        self.kind = self.spec["kind"]
        self.gradient = cfg["gradient"]
        self.streamed = self.kind in ("stdin", "file")
        if self.streamed:
            rows = parse_sample_lines(_read_stream_lines(self.spec, stdin))
            if self.gradient:
                if rows.shape[0] and rows.shape[1] < 2:
                    raise InputError("gradient mode expects lines of the form 'X g1 ... gd'")
                self.source = PairStreamSource(rows) if rows.shape[0] else PairStreamSource(np.empty((0, 2)))
            else:
                if rows.shape[0] and rows.shape[1] != 1:
                    raise InputError("scalar mode expects one sample per line")
                self.source = StreamSource(rows.reshape(-1))
        elif self.kind == "gaussian":
            if self.gradient:
                raise DomainError("gradient mode needs a pair source (toy-lvm or a stream of 'X g1 .. gd' rows)")
            self.source = GaussianSource(self.spec["m"], self.spec["var"])
        else:
            self.source = bench.ToyLvmSource(
                bench.ToyLvmSpec(self.spec["d"], self.spec["theta"], self.spec["y"]))

    def pilot_draw(self, n: int, rng):
        return self.source.draw(n, rng)


# ----------------------------------------------------------------------------
# commands


def _expansion(cfg: dict, x0: float) -> Expansion:
    fn = cfg["function"]
    if fn == "log":
        return Expansion.log(x0)
    if fn == "reciprocal":
        return Expansion.reciprocal(x0)
    if fn.startswith("custom:"):
        gammas, c = read_custom_coefficients(fn.split(":", 1)[1])
        return Expansion.custom(x0, gammas, c)
    raise InputError(f"unknown function {fn!r}; use log, reciprocal or custom:<file>")


def read_custom_coefficients(path: str) -> tuple[list[float], float]:
    """``c=<bound>`` header line followed by ``k,gamma_k`` rows with ``k = 0, 1, ...``."""
    with open(path, encoding="utf-8") as fh:
        lines = [(i, ln.strip()) for i, ln in enumerate(fh, start=1) if ln.strip()]
    if not lines or not lines[0][1].replace(" ", "").startswith("c="):
        raise InputError(f"{path}: first line must be 'c=<bound>'")
    try:
        c = float(lines[0][1].split("=", 1)[1])
    except ValueError:
        raise InputError(f"{path}: line {lines[0][0]}: bad bound {lines[0][1]!r}") from None
    gammas = []
    for lineno, text in lines[1:]:
        if text.lower().replace(" ", "") == "k,gamma_k":
            continue
        try:
            k_text, g_text = text.split(",")
            k, g = int(k_text), float(g_text)
        except ValueError:
            raise InputError(f"{path}: line {lineno}: expected 'k,gamma_k', got {text!r}") from None
        if k != len(gammas):
            raise InputError(f"{path}: line {lineno}: expected k = {len(gammas)}, got {k}")
        gammas.append(g)
    if not gammas:
        raise InputError(f"{path}: no coefficients")
    return gammas, c


def _run_pilot(cfg: dict, sources: _Sources) -> Optional[tuning.PilotSummary]:
    if cfg["x0"] != "auto" and cfg["p"] != "auto":
        return None
    rng, _ = replicate_rng(cfg["seed"], 0, PILOT_STREAM)
    xs = sources.pilot_draw(cfg["n0"], rng)
    return tuning.bootstrap_x0(xs, alpha=cfg["alpha"], n_boot=cfg["n_boot"], rng=rng)


def cmd_tune(args, stdin=sys.stdin, stdout=sys.stdout) -> int:
    cfg = resolve_config(args)
    cfg["gradient"] = False
    _echo_config(cfg, args)
    sources = _Sources(cfg, stdin)
    rng, _ = replicate_rng(cfg["seed"], 0, PILOT_STREAM)
    summary = tuning.bootstrap_x0(sources.pilot_draw(cfg["n0"], rng), alpha=cfg["alpha"],
                                  n_boot=cfg["n_boot"], rng=rng)
    json.dump(summary.to_dict(), stdout, indent=2)
    stdout.write("\n")
    return EXIT_OK


def _error_code(message: str) -> int:
    return EXIT_RESOURCE if message.startswith(ResourceExceeded.__name__) else EXIT_DOMAIN


def cmd_estimate(args, stdin=sys.stdin, stdout=sys.stdout) -> int:
    cfg = resolve_config(args)
    _echo_config(cfg, args)
    sources = _Sources(cfg, stdin)
    if cfg["function"].startswith("custom:") and cfg["x0"] == "auto":
        raise DomainError("custom coefficients are tied to a fixed expansion point; pass --x0")

    pilot = _run_pilot(cfg, sources)
    x0 = pilot.x0_chosen if cfg["x0"] == "auto" else cfg["x0"]
    expansion = _expansion(cfg, x0)
    if cfg["p"] == "auto":
        p = pilot.p_chosen if cfg["x0"] == "auto" else tuning.choose_p(
            tuning.beta_squared(pilot.m_hat, pilot.var_hat, x0), cfg["n0"])
    else:
        p = cfg["p"]
    law = TruncationLaw(p, cfg["r_max"])
    kind = EstimatorKind(cfg["estimator"])
    estimator = gradient_sum_estimate if cfg["gradient"] else sum_estimate
    source = sources.source

    def run(i, rng, seed):
        try:
            est = estimator(expansion, law, kind, source, rng, seed)
        except DebiasError as exc:
            return None, f"{type(exc).__name__}: {exc}", seed
        return est, "", seed

    # stream-backed sources are consumed in order, so they cannot be shared across threads
    threads = 1 if sources.streamed else getattr(args, "threads", None)
    results = map_replicates(run, cfg["replicates"], cfg["seed"], threads, stream=ESTIMATE_STREAM)

    dim = getattr(source, "dim", 1) if cfg["gradient"] else 1
    rows = []
    for i, (est, err, seed) in enumerate(results):
        if est is None:
            values = [math.nan] * dim
            rows.append((i, values, -1, 0, seed, err))
        else:
            values = list(np.atleast_1d(est.value).astype(float))
            rows.append((i, values, est.r, est.samples_used, seed, ""))

    meta = {"config": cfg, "x0": x0, "p": p, "pilot": pilot.to_dict() if pilot else None,
            "pilot_cost": cfg["n0"] if pilot else 0}
    _write_estimates(rows, dim, cfg, meta, stdout)

    failures = [r[5] for r in rows if r[5]]
    if failures:
        print(f"warning: {len(failures)} of {len(rows)} replicates failed; first: {failures[0]}",
              file=sys.stderr)
    if rows and len(failures) == len(rows):
        return _error_code(failures[0])
    return EXIT_OK


def _write_estimates(rows, dim, cfg, meta, stdout):
    value_cols = ["estimate"] if dim == 1 else [f"estimate_{j + 1}" for j in range(dim)]
    has_err = any(r[5] for r in rows)
    method = cfg["estimator"] + ("-gradient" if cfg["gradient"] else "")
    if cfg["format"] == "json":
        lines = [json.dumps({"schema_version": bench.RECORD_SCHEMA_VERSION, "metadata": meta}, sort_keys=True)]
        for i, values, r, cost, seed, err in rows:
            rec = {"method": method, "replicate": i, "r_or_level": r, "cost": cost, "seed": seed}
            for col, v in zip(value_cols, values):
                rec[col] = None if math.isnan(v) else v
            if err:
                rec["error"] = err
            lines.append(json.dumps(rec, sort_keys=True))
        text = "\n".join(lines) + "\n"
    else:
        header = ["method", "replicate", *value_cols, "r_or_level", "cost", "seed"] + (["error"] if has_err else [])
        out = [",".join(header)]
        for i, values, r, cost, seed, err in rows:
            fields = [method, str(i), *(repr(float(v)) for v in values), str(r), str(cost), str(seed)]
            if has_err:
                fields.append('"' + err.replace('"', '""') + '"')
            out.append(",".join(fields))
        text = "\n".join(out) + "\n"
    _emit(text, cfg["output"], stdout)


def _emit(text: str, output: str, stdout):
    if output in ("-", "", None):
        stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_bench(args, stdin=sys.stdin, stdout=sys.stdout) -> int:
    fmt = args.format or "csv"
    if args.mode == "toy-lvm":
        config = bench.ToyLvmBenchConfig(
            seed=args.seed, d=args.d, n=args.n, theta=args.theta, budget=args.budget,
            methods=tuple(args.methods.split(",")), replicates=args.reps,
            x0_policy=args.x0_policy, n0=args.n0, threads=args.threads,
        )
        print(f"# resolved config: {json.dumps(config.resolved(), sort_keys=True)}", file=sys.stderr)
        table = bench.run_toy_lvm_bench(config)
        text = table.to_csv() if fmt == "csv" else table.to_jsonl()
        _emit(text, args.output, stdout)
        if args.svg:
            from .plot import write_scatter_svg

            series = {m: (table.column("cost", m), table.column("estimate", m)) for m in table.methods()}
            write_scatter_svg(args.svg, series, hline=table.metadata["truth"],
                              vline=config.budget * config.n, xlabel="cost (latent draws)",
                              ylabel="log-likelihood estimate")
        if table.has_errors:
            bad = [r for r in table if r.error]
            print(f"warning: {len(bad)} replicate(s) failed; first: {bad[0].error}", file=sys.stderr)
        return EXIT_OK

    reps = args.reps
    if args.cycling_reps is not None:
        reps = {"default": args.reps, "cycling": args.cycling_reps, "mvue": args.cycling_reps}
    config = bench.VarianceStudyConfig(
        seed=args.seed, function=args.function, m=args.m, var=args.var,
        x0=args.x0 if args.x0 == "oracle" else float(args.x0),
        p_grid=tuple(float(v) for v in args.p.split(",")),
        estimators=tuple(args.estimators.split(",")), replicates=reps, n0=args.n0,
        threads=args.threads,
    )
    print(f"# resolved config: {json.dumps(config.resolved(), sort_keys=True)}", file=sys.stderr)
    rows = bench.run_variance_study(config)
    if fmt == "csv":
        text = bench.variance_rows_to_csv(rows)
    else:
        text = bench.variance_rows_to_jsonl(rows, {"config": config.resolved()})
    _emit(text, args.output, stdout)
    return EXIT_OK


def _moment_params(a) -> oracle.MomentParams:
    return oracle.MomentParams(a.m, a.var, a.x0)


def _oracle_value(a):
    op = a.op
    if op == "beta2":
        return tuning.beta_squared(a.m, a.var, a.x0)
    if op == "x0-star":
        return tuning.x0_star(a.m, a.var)
    if op == "simple-variance-limit":
        return oracle.simple_variance_limit(_moment_params(a))
    if op == "reciprocal-tail":
        exact, bound = oracle.reciprocal_tail_expectation(a.p, a.k)
        return {"exact": exact, "bound": bound}
    if op == "simple-cov":
        return oracle.simple_cross_moment(_moment_params(a), a.k, a.l)
    if op == "cycling-moment":
        return oracle.cycling_cross_moment(_moment_params(a), a.r, a.k, a.l)
    if op == "cycling-cov-bound":
        return oracle.cycling_cov_bound(_moment_params(a), a.r, a.k, a.l)
    if op == "gradient-cycling-moment":
        grad = oracle.GradientMoments(a.s2, a.t, a.grad_m)
        params = _moment_params(a)
        return {"moment": oracle.gradient_cycling_cross_moment(params, grad, a.r, a.k, a.l),
                "printed_cov_bound": oracle.gradient_cycling_cov_bound(params, grad, a.r, a.k, a.l)}
    if op == "prop1":
        lower, upper = oracle.prop1_bounds(a.p, a.beta0, a.c, a.f_m, a.gamma0)
        return {"lower": lower, "upper": upper}
    if op == "prop2":
        return oracle.prop2_bound(a.p, a.beta, a.c)
    if op == "prop3":
        return oracle.prop3_bound(a.p, a.beta0, a.beta, a.c)
    if op == "conditional-expectation":
        exp = Expansion.log(a.x0) if a.function == "log" else Expansion.reciprocal(a.x0)
        return oracle.conditional_expectation_given_r(exp, TruncationLaw(a.p), a.m, a.r)
    if op in ("wnv-bound", "wnv-minimize"):
        params = tuning.WnvParams.from_squares(a.kind, a.n0, a.beta0_sq, a.beta_sq, a.c)
        if op == "wnv-bound":
            return tuning.wnv_bound(params, a.p)
        p_star = tuning.wnv_minimize(params)
        return {"p_star": p_star, "expected_r": (1 - p_star) / p_star, "bound": tuning.wnv_bound(params, p_star)}
    if op == "toy-lvm-moments":
        y = a.y if a.y is not None else [a.theta] * a.d
        return asdict(bench.toy_lvm_moments(bench.ToyLvmSpec(a.d, a.theta, y)))
    raise InputError(f"unknown oracle op {op!r}")


def cmd_oracle(args, stdin=sys.stdin, stdout=sys.stdout) -> int:
    params = {k: v for k, v in vars(args).items() if k not in ("command", "op", "handler") and v is not None}
    value = _oracle_value(args)
    json.dump({"op": args.op, "params": params, "value": value}, stdout, sort_keys=True)
    stdout.write("\n")
    return EXIT_OK


# ----------------------------------------------------------------------------
# argument parsing


def _add_source_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--config-out", help="also write the resolved config to this file")
    p.add_argument("--source", help="gaussian:m,var | toy-lvm:d[,theta] | stdin | file:PATH")
    p.add_argument("--m", type=float, help="gaussian source mean")
    p.add_argument("--var", type=float, help="gaussian source variance")
    p.add_argument("--d", type=int, help="toy-lvm latent dimension")
    p.add_argument("--theta", type=float, help="toy-lvm parameter")
    p.add_argument("--y", type=float, nargs="+", help="toy-lvm observation (d numbers)")
    p.add_argument("--n0", type=int, help="pilot-run size (default 10)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--alpha", type=float, help="bootstrap level (default 0.01)")
    p.add_argument("--n-boot", dest="n_boot", type=int, help="bootstrap resamples (default 2000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="debias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="pilot run: choose x0 and p, print the summary as JSON")
    _add_source_flags(p)
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("estimate", help="independent replicates of the sum (or gradient) estimator")
    _add_source_flags(p)
    p.add_argument("--function", help="log | reciprocal | custom:<coefficient csv>")
    p.add_argument("--estimator", choices=[k.value for k in EstimatorKind])
    p.add_argument("--x0", help="expansion point or 'auto'")
    p.add_argument("--p", help="geometric parameter or 'auto'")
    p.add_argument("--replicates", "--reps", dest="replicates", type=int)
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--gradient", action="store_const", const=True, default=None,
                   help="estimate grad f(m(theta)) from (X, G) pairs")
    p.add_argument("--output", "-o", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--threads", type=int, help="worker threads (default: DEBIAS_THREADS or 1)")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("bench", help="toy-lvm benchmark or variance study")
    bsub = p.add_subparsers(dest="mode", required=True)
    for name in ("toy-lvm", "variance-study"):
        b = bsub.add_parser(name)
        b.add_argument("--seed", type=int, required=True)
        b.add_argument("--reps", type=int, default=100)
        b.add_argument("--n0", type=int, default=10)
        b.add_argument("--output", "-o", default="-")
        b.add_argument("--format", choices=["csv", "json"])
        b.add_argument("--threads", type=int)
        b.set_defaults(handler=cmd_bench)
        if name == "toy-lvm":
            b.add_argument("--d", type=int, default=2)
            b.add_argument("--n", type=int, default=10, help="number of data points")
            b.add_argument("--theta", type=float, default=0.0)
            b.add_argument("--budget", type=float, default=6.0, help="expected latent draws per datum")
            b.add_argument("--methods", default="simple,cycling,mvue,mlmc")
            b.add_argument("--x0-policy", dest="x0_policy", choices=["oracle", "pilot"], default="oracle")
            b.add_argument("--svg", help="also write an estimate-vs-cost scatter plot")
        else:
            b.add_argument("--function", choices=["reciprocal", "log"], default="reciprocal")
            b.add_argument("--m", type=float, default=1.0)
            b.add_argument("--var", type=float, default=1.0)
            b.add_argument("--x0", default="2.0", help="expansion point or 'oracle'")
            b.add_argument("--p", default="0.1,0.01,0.001", help="comma-separated geometric parameters")
            b.add_argument("--estimators", default="simple,cycling")
            b.add_argument("--cycling-reps", dest="cycling_reps", type=int,
                           help="replicates for the quadratic-cost estimators")

    p = sub.add_parser("oracle", help="closed-form moments and bounds, printed as JSON")
    osub = p.add_subparsers(dest="op", required=True)

    def op(name, *flags):
        o = osub.add_parser(name)
        for flag in flags:
            kw = {"type": float}
            if flag in ("k", "l", "r", "n0", "d"):
                kw = {"type": int}
            if flag in ("kind", "function"):
                kw = {"type": str}
            if flag == "y":
                kw = {"type": float, "nargs": "+"}
            required = flag not in ("c", "y", "theta")
            o.add_argument("--" + flag.replace("_", "-"), dest=flag, required=required, **kw)
        o.set_defaults(handler=cmd_oracle)
        return o

    op("beta2", "m", "var", "x0")
    op("x0-star", "m", "var")
    op("simple-variance-limit", "m", "var", "x0")
    op("reciprocal-tail", "p", "k")
    op("simple-cov", "m", "var", "x0", "k", "l")
    op("cycling-moment", "m", "var", "x0", "r", "k", "l")
    op("cycling-cov-bound", "m", "var", "x0", "r", "k", "l")
    op("gradient-cycling-moment", "m", "var", "x0", "s2", "t", "grad_m", "r", "k", "l")
    op("prop1", "p", "beta0", "c", "f_m", "gamma0")
    op("prop2", "p", "beta", "c")
    op("prop3", "p", "beta0", "beta", "c")
    op("conditional-expectation", "function", "x0", "p", "m", "r")
    op("wnv-bound", "kind", "n0", "beta0_sq", "beta_sq", "c", "p")
    op("wnv-minimize", "kind", "n0", "beta0_sq", "beta_sq", "c")
    op("toy-lvm-moments", "d", "theta", "y")
    return parser


def main(argv: Optional[Sequence[str]] = None, stdin=None, stdout=None) -> int:
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "op", None) in ("prop1", "prop2", "prop3", "wnv-bound", "wnv-minimize") and args.c is None:
        args.c = 1.0
    if getattr(args, "op", None) == "toy-lvm-moments" and args.theta is None:
        args.theta = 0.0
    try:
        return args.handler(args, stdin=stdin, stdout=stdout)
    except ResourceExceeded as exc:
        print(f"error: resource exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

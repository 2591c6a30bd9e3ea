"""Batch command line: JSON config in, CSV / JSON-lines artifacts out.

Usage::

    geolevy <command> --config cfg.json [--seed S] [--out DIR] [--threads T] [--budget B]

``--config`` takes a path or an inline JSON object.  Exit codes: 0 success,
1 failing checks, 2 invalid configuration, 3 domain or precondition error,
4 sample budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from .errors import BudgetExceededError, ConfigError, GeolevyError
from .levy_models import LevyModel, model_from_dict
from .limit_processes import (
    PoissonSeriesConfig,
    sample_clt_gaussian,
    sample_ou,
    sample_stable_series,
)
from .montecarlo import DEFAULT_BUDGET, EnsembleSpec, EnsembleSummary, rem_spec, simulate_ensemble
from .rate_function import critical_points, rate_eval, solve_alpha
from .regimes import RegimeClass, classify, growth_from_dict, moments_exact
from .rng import check_seed, fresh_seed, substream
from .stats_verify import (
    CheckReport,
    mean_check,
    part1_schedule,
    verify_bahadur_rao,
    verify_covariance,
    verify_order_stats,
    verify_truncated_moments,
)

__all__ = ["RunConfig", "CONFIG_SCHEMA", "run_config", "emit_report", "main", "fmt"]

COMMANDS = ("classify", "rate", "simulate", "limit-sample", "verify", "rem-preset")
EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_DOMAIN, EXIT_BUDGET = 0, 1, 2, 3, 4

_num = {"type": "number"}
_grid = {"type": "array", "items": _num, "minItems": 1}


def _obj(props: dict, required: Sequence[str] = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


CONFIG_SCHEMA: dict[str, Any] = _obj(
    {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "model": {
            "oneOf": [
                _obj({"kind": {"const": "brownian"}, "mu": _num, "sigma": _num}, ["kind"]),
                _obj(
                    {"kind": {"const": "cpg"}, "rate": _num, "jump_mean": _num, "jump_sd": _num, "drift": _num},
                    ["kind"],
                ),
            ]
        },
        "growth": {
            "oneOf": [
                _obj({"kind": {"const": "constant"}, "s": _num}, ["kind", "s"]),
                _obj({"kind": {"const": "proportional"}, "lambda": _num}, ["kind", "lambda"]),
                _obj({"kind": {"const": "critical"}, "theta": _num}, ["kind", "theta"]),
                _obj(
                    {
                        "kind": {"const": "table"},
                        "pairs": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                        },
                    },
                    ["kind", "pairs"],
                ),
            ]
        },
        "regime": _obj(
            {"kind": {"enum": ["zero", "slow", "critical", "fast"]}, "theta": _num, "lambda": _num},
            ["kind"],
        ),
        "ensemble": _obj(
            {
                "N": {"type": "integer", "minimum": 1},
                "replicates": {"type": "integer", "minimum": 1},
                "grid": _grid,
                "top_k": {"type": "integer", "minimum": 0},
            },
            ["N", "replicates"],
        ),
        "rate": _obj({"beta": {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]}}, ["beta"]),
        "limit": _obj(
            {
                "process": {"enum": ["ou", "clt", "stable"]},
                "grid": _grid,
                "samples": {"type": "integer", "minimum": 1},
                "alpha": _num,
                "tau": _num,
                "tolerance": _num,
                "max_atoms": {"type": "integer", "minimum": 1},
            },
            ["process", "grid", "samples"],
        ),
        "verify": _obj(
            {
                "checks": {
                    "type": "array",
                    "items": {
                        "oneOf": [
                            _obj(
                                {
                                    "check": {"const": "truncated_moments"},
                                    "kappa": _num,
                                    "part": {"enum": [1, 2, 3]},
                                    "theta": _num,
                                    "x": {"type": "array", "items": _num, "minItems": 1},
                                    "schedule": {
                                        "type": "array",
                                        "minItems": 1,
                                        "items": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                                    },
                                    "method": {"enum": ["closed_form", "tilted_mc"]},
                                    "reps": {"type": "integer", "minimum": 2},
                                    "tol": _num,
                                },
                                ["check", "kappa", "part"],
                            ),
                            _obj(
                                {
                                    "check": {"const": "bahadur_rao"},
                                    "beta": _num,
                                    "T": {"type": "array", "items": _num, "minItems": 1},
                                    "tol": _num,
                                    "reps": {"type": "integer", "minimum": 2},
                                },
                                ["check", "beta", "T"],
                            ),
                            _obj(
                                {
                                    "check": {"const": "order_stats"},
                                    "taus": {"type": "array", "items": _num, "minItems": 1},
                                    "kappa": _num,
                                    "kappa_tau": _num,
                                    "hill_k": {"type": "integer", "minimum": 1},
                                },
                                ["check"],
                            ),
                            _obj(
                                {
                                    "check": {"const": "covariance"},
                                    "mode": {"enum": ["cltG", "ou", "rawExp"]},
                                    "grid": _grid,
                                    "n": {"type": "integer", "minimum": 2},
                                },
                                ["check", "mode", "grid"],
                            ),
                        ]
                    },
                }
            },
            ["checks"],
        ),
        "rem": _obj(
            {
                "beta": _num,
                "n": {"type": "integer", "minimum": 1},
                "replicates": {"type": "integer", "minimum": 2},
                "top_k": {"type": "integer", "minimum": 0},
            },
            ["beta", "n", "replicates"],
        ),
    }
)


def fmt(x: float) -> str:
    """Round-trip decimal rendering used in every CSV cell."""
    return format(float(x), ".17g")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass
class RunConfig:
    """Validated run configuration.  ``to_dict(from_dict(d)) == d`` for valid ``d``."""

    raw: dict[str, Any]
    model: LevyModel | None = None
    rule: Any = None
    regime: RegimeClass | None = None
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        try:
            jsonschema.validate(d, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {path}: {exc.message}") from None
        cfg = cls(raw=json.loads(json.dumps(d)))
        if "model" in d:
            cfg.model = model_from_dict(d["model"])
        if "growth" in d:
            cfg.rule = growth_from_dict(d["growth"])
        if "regime" in d:
            if cfg.model is None:
                raise ConfigError("regime override needs a model")
            cfg.regime = _regime_override(cfg.model, d["regime"])
        return cfg

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self) -> dict[str, Any]:
        return json.loads(json.dumps(self.raw))

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, indent=2) + "\n"

    @property
    def seed(self) -> int | None:
        return self.raw.get("seed")

    def spec_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode()).hexdigest()

    def need(self, key: str):
        if key not in self.raw:
            raise ConfigError(f"command {self.raw.get('command')!r} needs a {key!r} section")
        return self.raw[key]


def _regime_override(model: LevyModel, d: dict) -> RegimeClass:
    lam1, lam2 = critical_points(model)
    kind = d["kind"]
    if kind == "fast":
        if "lambda" not in d:
            raise ConfigError("fast regime override needs lambda")
        lam = float(d["lambda"])
        return RegimeClass("fast", lam1, lam2, lam=lam, alpha=solve_alpha(model, lam), lattice_warning=model.lattice)
    if kind == "critical":
        return RegimeClass("critical", lam1, lam2, theta=float(d.get("theta", 0.0)))
    return RegimeClass(kind, lam1, lam2)


# --------------------------------------------------------------------------
# artifact writing
# --------------------------------------------------------------------------


class _Artifacts:
    def __init__(self, out: Path, cfg: RunConfig):
        self.out = out
        self.cfg = cfg
        self.written: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def header(self, **meta) -> list[str]:
        rows = [f"# spec_hash={self.cfg.spec_hash()}", f"# seed={self.cfg.seed}"]
        rows += [f"# {k}={v}" for k, v in meta.items()]
        return rows

    def csv(self, name: str, columns: Sequence[str], rows, meta: dict | None = None) -> None:
        lines = self.header(**(meta or {}))
        lines.append(",".join(columns))
        lines += [",".join(r) for r in rows]
        self.text(name, "\n".join(lines) + "\n")

    def text(self, name: str, body: str) -> None:
        (self.out / name).write_text(body, encoding="utf-8", newline="\n")
        self.written.append(name)

    def json(self, name: str, obj: Any) -> None:
        self.text(name, json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def emit_report(reports: Sequence[CheckReport], out: Path | str, header: Sequence[str] = ()) -> int:
    """Write ``verify.jsonl`` and ``verify_summary.csv``; return the exit status.

    An empty report list produces two empty files.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    jl = out / "verify.jsonl"
    sm = out / "verify_summary.csv"
    if not reports:
        jl.write_text("", encoding="utf-8")
        sm.write_text("", encoding="utf-8")
        return EXIT_OK
    jl.write_text(
        "".join(json.dumps(r.to_dict(), sort_keys=True, default=_jsonable) + "\n" for r in reports),
        encoding="utf-8",
        newline="\n",
    )
    n_pass = sum(r.passed for r in reports)
    lines = list(header)
    lines.append("check,observed,reference,tolerance,pass")
    for r in reports:
        multi = len(r.observed) > 1
        refs = np.broadcast_to(np.array(r.reference), (len(r.observed),))
        tols = np.broadcast_to(np.array(r.tolerance), (len(r.observed),))
        for i, (o, ref, tol) in enumerate(zip(r.observed, refs, tols)):
            name = f"{r.name}[{i}]" if multi else r.name
            lines.append(f"{name},{fmt(o)},{fmt(ref)},{fmt(tol)},{str(r.passed).lower()}")
    lines.append(f"# passed={n_pass} failed={len(reports) - n_pass}")
    sm.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK if n_pass == len(reports) else EXIT_FAIL


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _ensemble_spec(cfg: RunConfig, budget: int) -> EnsembleSpec:
    e = cfg.need("ensemble")
    return EnsembleSpec(
        model=_need_model(cfg),
        rule=_need_rule(cfg),
        N=e["N"],
        replicates=e["replicates"],
        grid=tuple(e.get("grid", [0.0])),
        seed=cfg.seed,
        top_k=e.get("top_k", 0),
        regime=cfg.regime,
        budget=budget,
    )


def _need_model(cfg):
    if cfg.model is None:
        raise ConfigError("a 'model' section is required")
    return cfg.model


def _need_rule(cfg):
    if cfg.rule is None:
        raise ConfigError("a 'growth' section is required")
    return cfg.rule


def _cmd_classify(cfg, art, args):
    regime = cfg.regime or classify(_need_model(cfg), _need_rule(cfg))
    d = regime.to_dict()
    art.json("classify.json", d)
    return d, EXIT_OK


def _cmd_rate(cfg, art, args):
    model = _need_model(cfg)
    betas = cfg.need("rate")["beta"]
    betas = betas if isinstance(betas, list) else [betas]
    rows = []
    for b in betas:
        value, deriv, u = rate_eval(model, b)
        rows.append({"beta": b, "I": value, "dI": deriv, "u": u})
    art.csv("rate.csv", ["beta", "I", "dI", "u"], [[fmt(r[k]) for k in ("beta", "I", "dI", "u")] for r in rows])
    return rows if len(rows) > 1 else rows[0], EXIT_OK


def _write_ensemble(art, summary: EnsembleSummary, prefix: str):
    meta = {"mode": summary.mode, "regime": summary.regime.kind, "s": fmt(summary.s),
            "lattice_warning": str(summary.lattice_warning).lower()}
    rows = []
    for r in range(summary.normalized.shape[0]):
        for j, t in enumerate(summary.grid):
            rows.append([str(r), fmt(t), fmt(summary.normalized[r, j]), fmt(summary.raw[r, j])])
    art.csv(f"{prefix}.csv", ["replicate_id", "t", "normalized_value", "raw_value"], rows, meta)
    if summary.top.shape[1]:
        trows = [[str(r), str(k + 1), fmt(v)] for r in range(summary.top.shape[0]) for k, v in enumerate(summary.top[r])]
        art.csv(f"{prefix}_order_stats.csv", ["replicate_id", "rank", "value"], trows, meta)


def _ensemble_result(summary: EnsembleSummary) -> dict:
    col = summary.normalized[:, 0]
    return {
        "regime": summary.regime.kind,
        "mode": summary.mode,
        "s": summary.s,
        "replicates": int(col.size),
        "mean_normalized_t0": float(col.mean()),
        "lattice_warning": summary.lattice_warning,
    }


def _cmd_simulate(cfg, art, args):
    spec = _ensemble_spec(cfg, args.budget)
    summary = simulate_ensemble(spec, workers=args.threads)
    _write_ensemble(art, summary, "simulate")
    return _ensemble_result(summary), EXIT_OK


def _cmd_rem(cfg, art, args):
    rem = cfg.need("rem")
    spec = rem_spec(rem["beta"], rem["n"], rem["replicates"], seed=cfg.seed, top_k=rem.get("top_k", 0))
    spec = EnsembleSpec(**{**spec.__dict__, "budget": args.budget})
    summary = simulate_ensemble(spec, workers=args.threads)
    _write_ensemble(art, summary, "rem")
    mean, var = moments_exact(spec.model, spec.N, spec.s)
    report = mean_check("rem.partition_mean", summary.raw[:, 0], mean, n_se=4.0,
                        beta=rem["beta"], n=rem["n"], replicates=rem["replicates"])
    report.seed = cfg.seed
    status = emit_report([report], art.out, art.header())
    art.written += ["verify.jsonl", "verify_summary.csv"]
    return {**_ensemble_result(summary), "exact_mean": mean, "mean_check_passed": report.passed}, status


def _cmd_limit(cfg, art, args):
    model = _need_model(cfg)
    lim = cfg.need("limit")
    grid = np.asarray(lim["grid"], dtype=float)
    n = lim["samples"]
    if n * grid.size > args.budget:
        raise BudgetExceededError(f"samples * |grid| = {n * grid.size} exceeds the budget {args.budget}")
    gen = substream(cfg.seed, 0)
    meta: dict[str, Any] = {"process": lim["process"]}
    if lim["process"] == "ou":
        paths = sample_ou(model, grid, gen, size=n)
    elif lim["process"] == "clt":
        paths = sample_clt_gaussian(model, grid, gen, size=n)
    else:
        alpha = lim.get("alpha")
        if alpha is None:
            regime = cfg.regime or (classify(model, cfg.rule) if cfg.rule is not None else None)
            if regime is None or regime.kind != "fast":
                raise ConfigError("stable limit needs 'alpha' or a fast-regime growth rule")
            alpha = regime.alpha
        pcfg = PoissonSeriesConfig(
            tau=lim.get("tau"),
            tolerance=lim.get("tolerance", 1e-3 if lim.get("tau") is None else None),
            max_atoms=lim.get("max_atoms", 10**7),
        )
        tau = pcfg.resolve_tau(model, alpha, grid)
        paths, bound = sample_stable_series(model, alpha, grid, pcfg, cfg.seed, size=n)
        meta.update(alpha=fmt(alpha), tau=fmt(tau), achieved_bound=fmt(bound))
    rows = [[str(r), fmt(t), fmt(paths[r, j])] for r in range(n) for j, t in enumerate(grid)]
    art.csv("limit_sample.csv", ["run_id", "t", "value"], rows, meta)
    return {"process": lim["process"], "samples": n, **{k: v for k, v in meta.items() if k != "process"}}, EXIT_OK


def _check_seed(root: int, i: int) -> int:
    return int(substream(root, 0xC4EC, i).integers(0, 2**63))


def _run_check(cfg, c: dict, seed: int, args) -> list[CheckReport]:
    kind = c["check"]
    if kind == "truncated_moments":
        model = _need_model(cfg)
        if "schedule" in c:
            schedule = [tuple(p) for p in c["schedule"]]
        elif c["part"] == 1 and "theta" in c and "x" in c:
            schedule = part1_schedule(model, c["kappa"], c["theta"], c["x"])
        else:
            raise ConfigError("truncated_moments needs a schedule (or theta and x for part 1)")
        kw = {k: c[k] for k in ("theta", "method", "reps", "tol") if k in c}
        return [verify_truncated_moments(model, c["kappa"], c["part"], schedule, seed=seed, **kw)]
    if kind == "bahadur_rao":
        kw = {k: c[k] for k in ("tol", "reps") if k in c}
        return [verify_bahadur_rao(_need_model(cfg), c["beta"], c["T"], seed=seed, **kw)]
    if kind == "order_stats":
        spec = _ensemble_spec(cfg, args.budget)
        kw = {k: c[k] for k in ("taus", "kappa", "kappa_tau", "hill_k") if k in c}
        return verify_order_stats(spec, workers=args.threads, **kw)
    return [verify_covariance(_need_model(cfg), c["grid"], c["mode"], n=c.get("n", 10**5), seed=seed)]


def _cmd_verify(cfg, art, args):
    checks = cfg.need("verify")["checks"]
    wanted = None if not args.check else {s.strip() for s in args.check.split(",") if s.strip()}
    reports: list[CheckReport] = []
    for i, c in enumerate(checks):
        if wanted is not None and c["check"] not in wanted:
            continue
        reports += _run_check(cfg, c, _check_seed(cfg.seed, i), args)
    status = emit_report(reports, art.out, art.header() if reports else ())
    art.written += ["verify.jsonl", "verify_summary.csv"]
    n_pass = sum(r.passed for r in reports)
    return {"checks": len(reports), "passed": n_pass, "failed": len(reports) - n_pass}, status


_HANDLERS = {
    "classify": _cmd_classify,
    "rate": _cmd_rate,
    "simulate": _cmd_simulate,
    "limit-sample": _cmd_limit,
    "verify": _cmd_verify,
    "rem-preset": _cmd_rem,
}


# --------------------------------------------------------------------------
# entry points
# --------------------------------------------------------------------------


def _load(source: str) -> RunConfig:
    text = source if source.lstrip().startswith("{") else Path(source).read_text(encoding="utf-8")
    return RunConfig.from_text(text)


def run_config(source: str | dict, command: str | None = None, *, seed: int | None = None,
               out: str | Path = "out", threads: int = 1, budget: int = DEFAULT_BUDGET,
               check: str | None = None, stdout=None, stderr=None) -> int:
    """Validate a config, run its command and write artifacts; return the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = RunConfig.from_dict(source) if isinstance(source, dict) else _load(source)
        cmd = command or cfg.raw.get("command")
        if cmd is None:
            raise ConfigError("no command given on the command line or in the config")
        if cfg.raw.get("command", cmd) != cmd:
            raise ConfigError(f"config command {cfg.raw['command']!r} differs from requested {cmd!r}")
        cfg.raw["command"] = cmd
        if seed is not None:
            cfg.raw["seed"] = seed
        if cfg.seed is None:
            cfg.raw["seed"] = fresh_seed()
            print(f"generated seed {cfg.seed}", file=stderr)
        check_seed(cfg.seed)
        if threads < 1 or budget < 1:
            raise ConfigError("--threads and --budget must be >= 1")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SCHEMA
    except GeolevyError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DOMAIN

    args = argparse.Namespace(threads=threads, budget=budget, check=check)
    art = _Artifacts(Path(out), cfg)
    art.text("config.json", cfg.to_json())
    try:
        result, status = _HANDLERS[cmd](cfg, art, args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_BUDGET
    except (GeolevyError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_DOMAIN
    summary = {"command": cmd, "seed": cfg.seed, "spec_hash": cfg.spec_hash(),
               "artifacts": sorted(set(art.written)), "status": status, "result": result}
    print(json.dumps(summary, sort_keys=True, default=_jsonable), file=stdout)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geolevy", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="config file path or inline JSON object")
    p.add_argument("--seed", type=int, default=None, help="64-bit unsigned seed (overrides the config)")
    p.add_argument("--out", default="out", help="output directory (default: ./out)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="cap on simulated path-points")
    p.add_argument("--check", default=None, help="comma-separated check names for 'verify'")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run_config(args.config, args.command, seed=args.seed, out=args.out,
                      threads=args.threads, budget=args.budget, check=args.check)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

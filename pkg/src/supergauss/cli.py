"""Batch front-end: strict JSON configuration, subcommand dispatch, reports.

Exit codes: 0 success, 2 invalid configuration, 3 a Monte-Carlo estimate
exceeded an analytic bound beyond 3 stderr, 4 divergence flagged.  Unknown
configuration keys are rejected outright -- a silently ignored typo in a
tolerance field would invalidate certificates.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reports
from .certificates import build_certificate, recursion_tail_bound, zeta_tail_bound
from .errors import (ConfigError, DivergentBalanceError, GaussianDivergenceError,
                     IncompatibleKernelsError, TailBoundDomainError)
from .estimator import (convergence_run, default_schedule, integrate_projected,
                        quadrature_oracle, tail_mass_mc)
from .phi4 import LatticeConfig, counterterm_sweep
from .seminorms import GrowthFunction, Seminorm
from .spectral import (CompactMap, DecayFamily, EigenSequence, SpectralModel,
                       validate_model)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUND_VIOLATED = 3
EXIT_DIVERGENCE = 4

# Validation failures that make a configuration unusable rather than merely
# outside the convergence hypotheses.
_HARD_CHECKS = ("descending_order", "seminorm_axioms_p", "seminorm_axioms_q",
                "compact_map")


@dataclass(frozen=True)
class RunConfig:
    model: SpectralModel | None
    samples: int
    seed: int
    schedule: tuple[int, ...] | None
    atol: float
    out_path: str | None
    out_format: str
    phi4: LatticeConfig | None
    tail_n: tuple[int, ...] | None
    tail_r: tuple[float, ...] | None
    warnings: tuple[str, ...]


def _check_keys(obj, path, allowed, issues) -> bool:
    if not isinstance(obj, dict):
        issues.append((path, f"expected an object, got {type(obj).__name__}"))
        return False
    for k in obj:
        if k not in allowed:
            issues.append((f"{path}.{k}", "unknown field"))
    return True


def _number(obj, path, issues, minimum=None, strict_min=None, integer=False):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        issues.append((path, f"expected a number, got {type(obj).__name__}"))
        return None
    if integer and int(obj) != obj:
        issues.append((path, "expected an integer"))
        return None
    if minimum is not None and obj < minimum:
        issues.append((path, f"must be >= {minimum}"))
        return None
    if strict_min is not None and obj <= strict_min:
        issues.append((path, f"must be > {strict_min}"))
        return None
    return int(obj) if integer else float(obj)


def _number_list(obj, path, issues):
    if not isinstance(obj, list) or not obj:
        issues.append((path, "expected a non-empty array of numbers"))
        return None
    out = []
    for i, v in enumerate(obj):
        x = _number(v, f"{path}[{i}]", issues)
        if x is None:
            return None
        out.append(x)
    return out


def _load_rows(obj, path, issues):
    if "rows" in obj:
        rows = obj["rows"]
    else:
        try:
            rows = json.loads(Path(obj["path"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            issues.append((f"{path}.path", f"cannot read matrix: {exc}"))
            return None
    try:
        mat = np.asarray(rows, dtype=float)
    except (TypeError, ValueError):
        issues.append((path, "matrix rows must be a rectangular numeric array"))
        return None
    if mat.ndim != 2:
        issues.append((path, "matrix must be two-dimensional"))
        return None
    return mat


def _build_decay(obj, path, issues):
    if not _check_keys(obj, path, {"family", "c", "gamma", "r"}, issues):
        return None
    family = obj.get("family")
    c = _number(obj.get("c"), f"{path}.c", issues, strict_min=0)
    if family == "power":
        gamma = _number(obj.get("gamma"), f"{path}.gamma", issues, strict_min=0)
        if c is None or gamma is None:
            return None
        return DecayFamily.power(c, gamma)
    if family == "exponential":
        r = _number(obj.get("r"), f"{path}.r", issues, strict_min=0)
        if c is None or r is None:
            return None
        return DecayFamily.exponential(c, r)
    issues.append((f"{path}.family", "must be 'power' or 'exponential'"))
    return None


def _build_lambda(obj, path, issues):
    if not _check_keys(obj, path, {"list", "power", "decay"}, issues):
        return None
    if ("list" in obj) == ("power" in obj):
        issues.append((path, "provide exactly one of 'list' or 'power'"))
        return None
    if "list" in obj:
        vals = _number_list(obj["list"], f"{path}.list", issues)
        if vals is None:
            return None
        decay = None
        if "decay" in obj:
            decay = _build_decay(obj["decay"], f"{path}.decay", issues)
            if decay is None:
                return None
        return EigenSequence(np.array(vals), decay=decay)
    if "decay" in obj:
        issues.append((f"{path}.decay", "implied by 'power'; remove it"))
        return None
    spec = obj["power"]
    if not _check_keys(spec, f"{path}.power", {"c", "gamma", "N"}, issues):
        return None
    c = _number(spec.get("c"), f"{path}.power.c", issues, strict_min=0)
    gamma = _number(spec.get("gamma"), f"{path}.power.gamma", issues, strict_min=0)
    n = _number(spec.get("N"), f"{path}.power.N", issues, minimum=1, integer=True)
    if None in (c, gamma, n):
        return None
    vals = c * np.arange(1, n + 1, dtype=float) ** (-gamma)
    return EigenSequence(vals, decay=DecayFamily.power(c, gamma))


def _build_compact(obj, path, issues):
    if not _check_keys(obj, path, {"kind", "rows", "path", "n"}, issues):
        return None
    kind = obj.get("kind")
    if kind == "identity":
        return CompactMap.identity()
    if kind == "fourier":
        n = _number(obj.get("n"), f"{path}.n", issues, minimum=1, integer=True)
        return None if n is None else CompactMap.fourier(n)
    if kind == "matrix":
        if ("rows" in obj) == ("path" in obj):
            issues.append((path, "matrix kind needs exactly one of 'rows' or 'path'"))
            return None
        mat = _load_rows(obj, path, issues)
        return None if mat is None else CompactMap.from_matrix(mat)
    issues.append((f"{path}.kind", "must be 'identity', 'matrix' or 'fourier'"))
    return None


def _build_seminorm(obj, path, issues):
    if not _check_keys(obj, path, {"kind", "s", "weight", "rows", "path", "dim"}, issues):
        return None
    kind = obj.get("kind")
    if kind == "lattice_power":
        s = _number(obj.get("s"), f"{path}.s", issues, minimum=1)
        w = _number(obj.get("weight"), f"{path}.weight", issues, strict_min=0)
        if None in (s, w):
            return None
        return Seminorm.lattice(s, w)
    if kind == "matrix":
        if ("rows" in obj) == ("path" in obj):
            issues.append((path, "matrix kind needs exactly one of 'rows' or 'path'"))
            return None
        mat = _load_rows(obj, path, issues)
        return None if mat is None else Seminorm.from_matrix(mat)
    if kind == "l2":
        dim = _number(obj.get("dim"), f"{path}.dim", issues, minimum=1, integer=True)
        return None if dim is None else Seminorm.l2(dim)
    issues.append((f"{path}.kind", "must be 'lattice_power', 'matrix' or 'l2'"))
    return None


def _build_growth(obj, path, issues):
    if not _check_keys(obj, path, {"kind", "eps", "a"}, issues):
        return None
    kind = obj.get("kind")
    if kind == "power":
        eps = _number(obj.get("eps"), f"{path}.eps", issues, strict_min=0)
        return None if eps is None else GrowthFunction.power(eps)
    if kind == "log_power":
        a = _number(obj.get("a"), f"{path}.a", issues, minimum=float(np.e))
        return None if a is None else GrowthFunction.log_power(a)
    issues.append((f"{path}.kind", "must be 'power' or 'log_power'"))
    return None


def _build_model(obj, issues):
    if not _check_keys(obj, "model", {"lambda", "K", "p", "q", "f", "alpha"}, issues):
        return None
    missing = [k for k in ("lambda", "K", "q", "alpha") if k not in obj]
    for k in missing:
        issues.append((f"model.{k}", "required field missing"))
    if missing:
        return None
    lam = _build_lambda(obj["lambda"], "model.lambda", issues)
    k = _build_compact(obj["K"], "model.K", issues)
    q = _build_seminorm(obj["q"], "model.q", issues)
    alpha = _number(obj["alpha"], "model.alpha", issues, strict_min=0)
    p = f = None
    if obj.get("p") is not None:
        p = _build_seminorm(obj["p"], "model.p", issues)
    if obj.get("f") is not None:
        f = _build_growth(obj["f"], "model.f", issues)
    if (p is None) != (f is None) and not issues:
        issues.append(("model", "'p' and 'f' must be provided together or both null"))
    if issues or None in (lam, k, q, alpha):
        return None
    try:
        model = SpectralModel(lam=lam, K=k, p=p, q=q, f=f, alpha=alpha)
        model.check_dimensions()
    except Exception as exc:
        issues.append(("model", str(exc)))
        return None
    return model


def _build_phi4(obj, issues):
    allowed = {"sites", "mass", "spacing", "coupling", "alpha_grid"}
    if not _check_keys(obj, "phi4", allowed, issues):
        return None
    sites = _number(obj.get("sites"), "phi4.sites", issues, minimum=2, integer=True)
    mass = _number(obj.get("mass"), "phi4.mass", issues, strict_min=0)
    spacing = _number(obj.get("spacing", 1.0), "phi4.spacing", issues, strict_min=0)
    coupling = _number(obj.get("coupling", 1.0), "phi4.coupling", issues, minimum=0)
    grid = _number_list(obj.get("alpha_grid", [0.5, 2.0, 8.0]), "phi4.alpha_grid", issues)
    if grid is not None and any(a <= 0 for a in grid):
        issues.append(("phi4.alpha_grid", "alpha must be > 0"))
        grid = None
    if None in (sites, mass, spacing, coupling, grid):
        return None
    return LatticeConfig(sites=sites, mass=mass, spacing=spacing,
                         coupling=coupling, alpha_grid=tuple(grid))


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document (strict: unknown fields
    are errors).  Raises ConfigError carrying (path, reason) pairs."""
    issues: list[tuple[str, str]] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("<document>", f"not valid JSON: {exc}")])
    if not isinstance(doc, dict):
        raise ConfigError([("<document>", "top level must be an object")])
    _check_keys(doc, "<document>", {"model", "run", "output", "phi4", "tail"}, issues)

    model = None
    if isinstance(doc.get("model"), dict):
        model = _build_model(doc["model"], issues)
    elif "model" in doc:
        issues.append(("model", "expected an object"))

    samples, seed, schedule, atol = 100_000, 0, None, 1e-4
    if "run" in doc and _check_keys(doc["run"], "run",
                                    {"samples", "seed", "schedule", "atol"}, issues):
        run = doc["run"]
        if "samples" in run:
            samples = _number(run["samples"], "run.samples", issues, minimum=1,
                              integer=True) or samples
        if "seed" in run:
            seed = _number(run["seed"], "run.seed", issues, minimum=0, integer=True)
            seed = 0 if seed is None else seed
        if "schedule" in run:
            sched = _number_list(run["schedule"], "run.schedule", issues)
            if sched is not None:
                if any(int(n) != n or n < 1 for n in sched):
                    issues.append(("run.schedule", "entries must be positive integers"))
                else:
                    schedule = tuple(int(n) for n in sched)
        if "atol" in run:
            parsed = _number(run["atol"], "run.atol", issues, minimum=0.0)
            if parsed is not None:
                atol = parsed

    out_path, out_format = None, "csv"
    if "output" in doc and _check_keys(doc["output"], "output", {"path", "format"}, issues):
        out = doc["output"]
        if "path" in out:
            if not isinstance(out["path"], str):
                issues.append(("output.path", "expected a string"))
            else:
                out_path = out["path"]
        if "format" in out:
            if out["format"] not in ("csv", "json"):
                issues.append(("output.format", "must be 'csv' or 'json'"))
            else:
                out_format = out["format"]

    phi4_cfg = None
    if "phi4" in doc:
        phi4_cfg = _build_phi4(doc["phi4"], issues)

    tail_n = tail_r = None
    if "tail" in doc and _check_keys(doc["tail"], "tail", {"n_grid", "r_grid"}, issues):
        tail = doc["tail"]
        if "n_grid" in tail:
            ns = _number_list(tail["n_grid"], "tail.n_grid", issues)
            if ns is not None:
                tail_n = tuple(int(n) for n in ns)
        if "r_grid" in tail:
            rs = _number_list(tail["r_grid"], "tail.r_grid", issues)
            if rs is not None:
                tail_r = tuple(float(r) for r in rs)

    warnings: list[str] = []
    if model is not None and not issues:
        report = validate_model(model)
        for check in report.failures():
            msg = f"model validation: {check.name}: {check.detail or 'failed'}"
            if check.name in _HARD_CHECKS:
                issues.append(("model", msg))
            else:
                warnings.append(msg)

    if issues:
        raise ConfigError(issues)
    return RunConfig(model=model, samples=samples, seed=seed, schedule=schedule,
                     atol=atol, out_path=out_path, out_format=out_format,
                     phi4=phi4_cfg, tail_n=tail_n, tail_r=tail_r,
                     warnings=tuple(warnings))


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _require_model(cfg: RunConfig) -> SpectralModel:
    if cfg.model is None:
        raise ConfigError([("model", "this subcommand requires a model section")])
    return cfg.model


def _cmd_certify(cfg: RunConfig, args) -> int:
    model = _require_model(cfg)
    cert = build_certificate(model, key=cfg.seed)
    text = reports.certificate_json(cert) if cfg.out_format == "json" else cert.to_text()
    _emit(text, cfg.out_path)
    return EXIT_OK


def _cmd_integrate(cfg: RunConfig, args) -> int:
    model = _require_model(cfg)
    rep = convergence_run(model, schedule=cfg.schedule, samples=cfg.samples,
                          key=cfg.seed, atol=cfg.atol, threads=args.threads)
    text = (reports.convergence_json(rep) if cfg.out_format == "json"
            else reports.convergence_csv(rep))
    _emit(text, cfg.out_path)
    if rep.verdict == "bound_violated":
        return EXIT_BOUND_VIOLATED
    if "divergent" in rep.flags:
        return EXIT_DIVERGENCE
    return EXIT_OK


def _cmd_tailbound(cfg: RunConfig, args) -> int:
    model = _require_model(cfg)
    lam = model.lam
    cert = build_certificate(model, key=cfg.seed)
    n_grid = cfg.tail_n or default_schedule(model.dim)
    r_grid = cfg.tail_r or (0.0, 1.0, 2.0, 5.0)
    rows, violated = [], False
    for n in n_grid:
        for big_r in r_grid:
            mc = tail_mass_mc(lam, n, big_r, cfg.samples, cfg.seed,
                              threads=args.threads)
            rec_b = recursion_tail_bound(lam, n, big_r)
            try:
                zeta_b = zeta_tail_bound(cert, big_r)
            except TailBoundDomainError:
                zeta_b = None
            tol = 3.0 * mc.stderr
            if mc.mean > rec_b + tol or (zeta_b is not None and mc.mean > zeta_b + tol):
                violated = True
            rows.append((n, big_r, mc.mean, mc.stderr, rec_b, zeta_b))
    text = (reports.tailbound_json(rows) if cfg.out_format == "json"
            else reports.tailbound_csv(rows))
    _emit(text, cfg.out_path)
    return EXIT_BOUND_VIOLATED if violated else EXIT_OK


def _cmd_phi4(cfg: RunConfig, args) -> int:
    if cfg.phi4 is None:
        raise ConfigError([("phi4", "this subcommand requires a phi4 section")])
    reps = counterterm_sweep(cfg.phi4, samples=cfg.samples, key=cfg.seed,
                             schedule=cfg.schedule, atol=cfg.atol,
                             threads=args.threads)
    alphas = cfg.phi4.alpha_grid
    if cfg.out_path is not None:
        base = Path(cfg.out_path)
        for i, rep in enumerate(reps):
            per = base.with_name(f"{base.stem}.a{i}{base.suffix}")
            text = (reports.convergence_json(rep) if cfg.out_format == "json"
                    else reports.convergence_csv(rep))
            per.write_text(text)
    summary = reports.sweep_summary_csv(alphas, reps)
    _emit(summary, cfg.out_path)
    if any(r.verdict == "bound_violated" for r in reps):
        return EXIT_BOUND_VIOLATED
    if any("divergent" in r.flags for r in reps):
        return EXIT_DIVERGENCE
    return EXIT_OK


def _cmd_oracle(cfg: RunConfig, args) -> int:
    model = _require_model(cfg)
    n = min(model.dim, 3)
    value = quadrature_oracle(model, n)
    mc = integrate_projected(model, n, cfg.samples, cfg.seed, threads=args.threads)
    doc = {"n": n, "oracle": value, "mc_mean": mc.mean, "mc_stderr": mc.stderr,
           "abs_diff": abs(mc.mean - value),
           "sigmas": abs(mc.mean - value) / mc.stderr if mc.stderr else None}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg.out_path)
    return EXIT_OK


_COMMANDS = {"certify": _cmd_certify, "integrate": _cmd_integrate,
             "tailbound": _cmd_tailbound, "phi4": _cmd_phi4, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="supergauss",
        description="Estimate super-Gaussian integrals with analytic certificates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("certify", "compute the analytic certificate"),
            ("integrate", "Monte-Carlo convergence run over the dimension schedule"),
            ("tailbound", "MC tail masses vs recursion and zeta bounds on a grid"),
            ("phi4", "lattice quartic-interaction counterterm sweep"),
            ("oracle", "quadrature cross-check of the MC estimate (n <= 3)")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True, help="path to a JSON run config")
        s.add_argument("--seed", type=int, help="override run.seed")
        s.add_argument("--samples", type=int, help="override run.samples")
        s.add_argument("--out", help="override output.path")
        s.add_argument("--format", choices=("csv", "json"), help="override output.format")
        s.add_argument("--threads", type=int, default=1,
                       help="worker threads (does not change results)")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
        if args.seed is not None:
            cfg = _replace(cfg, seed=args.seed)
        if args.samples is not None:
            if args.samples < 1:
                raise ConfigError([("--samples", "must be >= 1")])
            cfg = _replace(cfg, samples=args.samples)
        if args.out is not None:
            cfg = _replace(cfg, out_path=args.out)
        if args.format is not None:
            cfg = _replace(cfg, out_format=args.format)
        for warning in cfg.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        for path, reason in exc.issues:
            print(f"config: {path}: {reason}", file=sys.stderr)
        return EXIT_CONFIG
    except IncompatibleKernelsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergentBalanceError, GaussianDivergenceError) as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _replace(cfg: RunConfig, **kw) -> RunConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


if __name__ == "__main__":
    sys.exit(main())

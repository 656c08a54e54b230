"""Command-line front end.

Every command prints (or writes with --out) a JSON report and exits 0 when
all of its checks pass, 1 when any check fails, and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus
from .coarea import CSV_HEADER as TRACE_HEADER
from .coarea import integrate_coarea, trace_level_set
from .density import GramError, density_report
from .matrix_ball import DemoConfig, demo_report
from .measure import (
    MIN_GRID,
    MIN_SAMPLES,
    SkippedFiberError,
    alpha_grid,
    assemble,
    clark_rhs,
    disintegration_check,
    poisson_check,
)
from .poly import PolynomialFormatError
from .report import check, close, dumps, write_csv, write_json, write_text
from .rif import MATRIX_BALL, POLYDISC, NotInnerError, RationalInnerFn
from .roots import TOL_CIRCLE, TOL_RANK, RootFindingError
from .selftest import INTERIOR_POINTS, TEST_FUNCTIONS, SelftestConfig, run_selftest

COMMANDS = ("compute", "verify", "density", "demo-i22", "selftest")
MAX_GRID = 8192
MAX_SAMPLES = 1_000_000


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    phi: str | None = None
    alpha: str = "1"
    grid: int = 512
    samples: int = 10_000
    trace_points: int = 2048
    seed: int = 0
    degree: int = 6
    out: str | None = None
    workers: int = 1
    tol_circle: float = TOL_CIRCLE
    tol_rank: float = TOL_RANK
    x1: list = field(default_factory=list)
    no_timing: bool = False

    def validate(self) -> None:
        if not MIN_GRID <= self.grid <= MAX_GRID:
            raise ConfigError(f"--grid must be in [{MIN_GRID}, {MAX_GRID}], got {self.grid}")
        if not 100 <= self.samples <= MAX_SAMPLES:
            raise ConfigError(f"--samples must be in [100, {MAX_SAMPLES}], got {self.samples}")
        for name in ("tol_circle", "tol_rank"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"--{name.replace('_', '-')} must be positive")
        if self.degree < 1:
            raise ConfigError("--degree must be at least 1")
        if self.workers < 1:
            raise ConfigError("--workers must be at least 1")
        if self.trace_points < MIN_GRID:
            raise ConfigError(f"--trace-points must be at least {MIN_GRID}")

    def echo(self) -> dict:
        d = dict(self.__dict__)
        d.pop("no_timing")
        return d


# -- parsing helpers ---------------------------------------------------------------


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as a complex number") from None


def parse_alphas(text: str) -> list[complex]:
    text = str(text).strip()
    if text.startswith("count:"):
        try:
            n = int(text[6:])
        except ValueError:
            raise ConfigError(f"bad alpha grid {text!r}; expected count:N") from None
        if n < 1:
            raise ConfigError("alpha count must be positive")
        return [complex(a) for a in alpha_grid(n)]
    alphas = [parse_complex(t) for t in text.split(",") if t.strip()]
    for a in alphas:
        if abs(abs(a) - 1) > 1e-9:
            raise ConfigError(f"alpha must be unimodular, got {a}")
    if not alphas:
        raise ConfigError("no alpha given")
    return alphas


def load_phi(value: str | None, validate: bool = True) -> RationalInnerFn:
    """A corpus name, a path to a JSON file, or an inline JSON object."""
    if value is None:
        raise ConfigError("--phi is required")
    text, source = value, "--phi"
    try:
        return corpus.named(value)
    except KeyError:
        pass
    path = Path(value)
    if not value.lstrip().startswith("{") and path.is_file():
        text, source = path.read_text(), str(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict) or "p" not in obj:
        raise ConfigError(f"{source}: expected an object with keys 'p', optional 'q' and 'domain'")
    try:
        return RationalInnerFn.from_json(obj, validate=validate)
    except PolynomialFormatError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except NotInnerError as exc:
        raise ConfigError(f"{source}: not a rational inner function: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _size(cfg: RunConfig, phi: RationalInnerFn) -> int:
    return cfg.grid if phi.domain == POLYDISC else cfg.samples


def _stem(cfg: RunConfig) -> Path | None:
    if cfg.out is None:
        return None
    p = Path(cfg.out)
    return p.with_suffix("") if p.suffix == ".json" else p


# -- commands ------------------------------------------------------------------


def cmd_compute(cfg: RunConfig) -> dict:
    phi = load_phi(cfg.phi)
    results, checks = [], []
    stem = _stem(cfg)
    for k, a in enumerate(parse_alphas(cfg.alpha)):
        mu = assemble(phi, a, _size(cfg, phi), cfg.seed, workers=cfg.workers, tol_circle=cfg.tol_circle)
        zero = np.zeros(phi.nvars)
        mass, expected = mu.total_mass(), clark_rhs(phi, a, zero)
        checks.append(check(f"mass alpha={k}", mass, expected, 1e-3, close(mass, expected, 1e-3)))
        entry = {
            "alpha": a,
            "n_fibers": len(mu.reps),
            "n_atoms": len(mu.atom_w),
            "skipped_fibers": mu.n_skipped,
            "total_mass": mass,
        }
        if stem is not None:
            tag = f".alpha{k}" if k else ""
            measure_path = Path(f"{stem}{tag}.measure.json")
            atoms_path = Path(f"{stem}{tag}.atoms.csv")
            write_json(measure_path, mu.to_json())
            header = ["fiber", "re_w", "im_w", "weight"]
            for j in range(phi.nvars):
                header += [f"re_z{j + 1}", f"im_z{j + 1}"]
            write_csv(atoms_path, header, mu.atom_rows())
            entry["files"] = {"measure": str(measure_path), "atoms": str(atoms_path)}
        results.append(entry)
    return {"results": results, "checks": checks}


MATRIX_TEST_FUNCTIONS = {
    "1": TEST_FUNCTIONS["1"],
    "|a+d|^2": lambda z: np.abs(z[:, 0] + z[:, 3]) ** 2,
}


def _poisson_points(phi: RationalInnerFn) -> list:
    if phi.domain == MATRIX_BALL:
        return [(0.0,) * 4]
    if phi.nvars == 2:
        return list(INTERIOR_POINTS)
    return [(0.0,) * phi.nvars, (0.3,) * phi.nvars, (-0.2j,) * phi.nvars]


def cmd_verify(cfg: RunConfig) -> dict:
    phi = load_phi(cfg.phi)
    alphas = parse_alphas(cfg.alpha)
    size = _size(cfg, phi)
    bivariate = phi.domain == POLYDISC and phi.nvars == 2
    stem = _stem(cfg)
    checks, measures = [], []
    for k, a in enumerate(alphas):
        mu = assemble(phi, a, size, cfg.seed, workers=cfg.workers, tol_circle=cfg.tol_circle)
        measures.append(mu)
        for z in _poisson_points(phi):
            lhs, rhs = poisson_check(mu, phi, z)
            checks.append(check(f"poisson alpha={a} z={list(z)}", lhs, rhs, 1e-3, close(lhs, rhs, 1e-3)))
        if bivariate:
            level = trace_level_set(phi, a, cfg.trace_points, cfg.seed, cfg.tol_circle)
            if stem is not None:
                tag = f".alpha{k}" if k else ""
                write_csv(Path(f"{stem}{tag}.trace.csv"), TRACE_HEADER, level.csv_rows())
            for fname, f in TEST_FUNCTIONS.items():
                lhs, rhs = mu.integrate(f), integrate_coarea(level, f)
                checks.append(check(f"coarea alpha={a} f={fname}", lhs, rhs, 1e-3, close(rhs, lhs, 1e-3)))

    # the disintegration average needs a uniform alpha grid: reuse the measures if we have one
    if bivariate or phi.domain == MATRIX_BALL:
        if not str(cfg.alpha).startswith("count:"):
            measures = [assemble(phi, a, size, cfg.seed, workers=cfg.workers) for a in alpha_grid(64)]
        fset = TEST_FUNCTIONS if bivariate else MATRIX_TEST_FUNCTIONS
        for fname, f in fset.items():
            lhs, rhs = disintegration_check(phi, f, len(measures), size, cfg.seed, measures=measures)
            checks.append(check(f"disintegration f={fname}", lhs, rhs, 1e-2, close(lhs, rhs, 1e-2, 1.0)))
    return {"results": {"n_alpha": len(alphas), "size": size}, "checks": checks}


def cmd_density(cfg: RunConfig) -> dict:
    phi = load_phi(cfg.phi)
    if phi.domain != POLYDISC or phi.nvars != 2:
        raise ConfigError("density verdicts are implemented for bivariate polydisc functions only")
    reports, checks = [], []
    for a in parse_alphas(cfg.alpha):
        mu = assemble(phi, a, cfg.grid, cfg.seed, workers=cfg.workers, tol_circle=cfg.tol_circle)
        rep = density_report(phi, a, mu, (cfg.degree,), cfg.tol_rank, cfg.tol_circle, cfg.trace_points)
        reports.append(rep.to_json())
        checks.append(
            {
                "name": f"verdict vs residual alpha={a}",
                "prediction": rep.prediction,
                "max_residual": rep.max_residual(cfg.degree),
                "pass": rep.consistent(cfg.degree),
            }
        )
        if rep.verdict.dense:
            checks.append({"name": f"r_j validated alpha={a}", "errors": rep.rj_errors, "pass": not rep.rj_errors})
    return {"results": reports, "checks": checks}


def cmd_demo(cfg: RunConfig) -> dict:
    alphas = parse_alphas(cfg.alpha)
    if len(alphas) != 1:
        raise ConfigError("demo-i22 takes a single alpha")
    dcfg = DemoConfig(
        alpha=alphas[0],
        n_samples=max(cfg.samples, MIN_SAMPLES),
        n_inner=10 * cfg.samples,
        max_degree=cfg.degree,
        seed=cfg.seed,
        workers=cfg.workers,
    )
    if cfg.x1:
        xs = tuple(parse_complex(x) for x in cfg.x1)
        bad = [x for x in xs if not abs(x) < 1]
        if bad:
            raise ConfigError(f"--x1 values must satisfy |x1| < 1, got {bad[0]}")
        dcfg.x1_values = xs
    rep = demo_report(dcfg)
    checks = [{"name": k, "pass": v} for k, v in rep.pop("checks").items()]
    return {"results": rep, "checks": checks}


def cmd_selftest(cfg: RunConfig) -> dict:
    st = SelftestConfig(
        seed=cfg.seed,
        grid=cfg.grid,
        trace_points=cfg.trace_points,
        degree=cfg.degree,
        workers=cfg.workers,
        timing=not cfg.no_timing,
    )
    rep = run_selftest(st)
    checks = [{"name": f"criterion {r['criterion']}: {r['title']}", "pass": r["pass"]} for r in rep["criteria"]]
    return {"results": rep, "checks": checks}


HANDLERS = {
    "compute": cmd_compute,
    "verify": cmd_verify,
    "density": cmd_density,
    "demo-i22": cmd_demo,
    "selftest": cmd_selftest,
}


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clark-rif", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file of defaults; flags override it")
    ap.add_argument("--phi", help="corpus name, JSON file, or inline JSON {p, q, domain}")
    ap.add_argument("--alpha", help="complex value(s) separated by commas, or count:N for a uniform grid")
    ap.add_argument("--grid", type=int, help=f"fibers per torus angle ({MIN_GRID}-{MAX_GRID})")
    ap.add_argument("--samples", type=int, help="Haar samples on U(2) (100-1000000)")
    ap.add_argument("--trace-points", type=int, help="angles used to trace level curves")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--degree", type=int, help="polynomial degree N for least-squares fits")
    ap.add_argument("--out", help="report path; CSV/measure sidecars share its stem")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--tol-circle", type=float)
    ap.add_argument("--tol-rank", type=float)
    ap.add_argument("--x1", action="append", help="demo-i22: torus-family parameter (repeatable)")
    ap.add_argument("--no-timing", action="store_true", default=None, help="omit wall-time fields")
    return ap


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(base, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        base = {k.replace("-", "_"): v for k, v in base.items()}
    known = set(RunConfig.__dataclass_fields__) - {"command"}
    unknown = set(base) - known
    if unknown:
        raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
    if isinstance(base.get("phi"), dict):
        base["phi"] = json.dumps(base["phi"])
    for k in known:
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    cfg = RunConfig(command=args.command, **base)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    t0 = time.perf_counter()
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        body = HANDLERS[cfg.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SkippedFiberError, RootFindingError, GramError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    passed = all(c["pass"] for c in body["checks"])
    report = {"command": cfg.command, "config": cfg.echo(), **body, "pass": passed}
    if not cfg.no_timing:
        report["wall_time"] = time.perf_counter() - t0
    text = dumps(report)
    if cfg.out:
        write_text(cfg.out, text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())

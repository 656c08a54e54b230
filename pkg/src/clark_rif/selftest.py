"""Acceptance battery: one function per numbered criterion, all driven by one seed."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import corpus
from .coarea import integrate_coarea, trace_level_set
from .density import (
    RjConstructionError,
    build_rj,
    gram_residual,
    hull_gauge,
    lemma_lower_bound_test,
    obstruction_detect,
    rj_ray_bound_check,
)
from .matrix_ball import DemoConfig, demo_report
from .measure import alpha_grid, assemble_polydisc, poisson_check, torus_average
from .poly import UniPoly
from .report import check, close

ALPHAS = (1.0, 1j, complex(np.exp(0.7j)))
DENSITY_ALPHAS = (1.0, 1j)
INTERIOR_POINTS = (
    (0.0, 0.0),
    (0.3, -0.2j),
    (-0.4 + 0.1j, 0.25),
    (0.5j, -0.5),
    (0.35 + 0.35j, 0.1 - 0.45j),
)

TEST_FUNCTIONS = {
    "1": lambda z: np.ones(len(z)),
    "zeta1": lambda z: z[:, 0],
    "zeta1*zeta2": lambda z: z[:, 0] * z[:, 1],
    "|zeta1+zeta2|^2": lambda z: np.abs(z[:, 0] + z[:, 1]) ** 2,
}

RUNTIME_LIMITS = {1: 10.0, 2: 30.0, 3: 60.0, 4: 120.0, 7: 120.0}


@dataclass
class SelftestConfig:
    seed: int = 0
    grid: int = 512
    trace_points: int = 2048
    n_alpha: int = 64
    degree: int = 6
    poisson_tol: float = 1e-3
    cross_tol: float = 1e-3
    disintegration_tol: float = 1e-2
    dense_residual: float = 1e-3
    not_dense_residual: float = 0.1
    lemma_instances: int = 100
    lemma_grid: int = 10_000
    workers: int = 1
    timing: bool = True


def _alpha_label(a: complex) -> str:
    a = complex(a)
    return f"{a.real:.6g}{a.imag:+.6g}i"


def poisson_reproduction(cfg: SelftestConfig) -> dict:
    checks = []
    for name in corpus.BIDISC_TRIO:
        phi = corpus.named(name)
        for a in ALPHAS:
            mu = assemble_polydisc(phi, a, cfg.grid, cfg.seed, workers=cfg.workers)
            for z in INTERIOR_POINTS:
                lhs, rhs = poisson_check(mu, phi, z)
                checks.append(
                    check(
                        f"{name} alpha={_alpha_label(a)} z={list(z)}",
                        lhs,
                        rhs,
                        cfg.poisson_tol,
                        close(lhs, rhs, cfg.poisson_tol),
                    )
                )
    return {"checks": checks}


def cross_method(cfg: SelftestConfig) -> dict:
    checks = []
    for name in corpus.BIDISC_TRIO:
        phi = corpus.named(name)
        for a in ALPHAS:
            mu = assemble_polydisc(phi, a, cfg.grid, cfg.seed, workers=cfg.workers)
            level = trace_level_set(phi, a, cfg.trace_points, cfg.seed)
            for fname, f in TEST_FUNCTIONS.items():
                lhs, rhs = mu.integrate(f), integrate_coarea(level, f)
                checks.append(
                    check(
                        f"{name} alpha={_alpha_label(a)} f={fname}",
                        lhs,
                        rhs,
                        cfg.cross_tol,
                        close(rhs, lhs, cfg.cross_tol),
                    )
                )
    return {"checks": checks}


def disintegration(cfg: SelftestConfig) -> dict:
    checks = []
    alphas = alpha_grid(cfg.n_alpha)
    for name in corpus.BIDISC_TRIO:
        phi = corpus.named(name)
        measures = [assemble_polydisc(phi, a, cfg.grid, cfg.seed, workers=cfg.workers) for a in alphas]
        for fname, f in TEST_FUNCTIONS.items():
            lhs = sum(m.integrate(f) for m in measures) / len(measures)
            rhs = torus_average(f, 2, cfg.grid)
            checks.append(
                check(f"{name} f={fname}", lhs, rhs, cfg.disintegration_tol, close(lhs, rhs, cfg.disintegration_tol, 1.0))
            )
    return {"checks": checks}


def decision_consistency(cfg: SelftestConfig) -> dict:
    cases = []
    for name in corpus.DENSITY_CORPUS:
        phi = corpus.named(name)
        for a in DENSITY_ALPHAS:
            verdict = obstruction_detect(phi, a)
            mu = assemble_polydisc(phi, a, cfg.grid, cfg.seed, workers=cfg.workers)
            res = [gram_residual(mu, j, cfg.degree).residual for j in range(2)]
            if verdict.dense:
                ok = max(res) <= cfg.dense_residual
            else:
                ok = max(res) >= cfg.not_dense_residual
            cases.append(
                {
                    "name": f"{name} alpha={_alpha_label(a)}",
                    "prediction": verdict.prediction,
                    "residuals": res,
                    "N": cfg.degree,
                    "pass": ok,
                }
            )
    return {"checks": cases}


def step_one_construction(cfg: SelftestConfig) -> dict:
    cases = []
    for name in corpus.DENSITY_CORPUS:
        phi = corpus.named(name)
        for a in DENSITY_ALPHAS:
            if not obstruction_detect(phi, a).dense:
                continue
            pts = trace_level_set(phi, a, cfg.trace_points, cfg.seed).points
            mu = assemble_polydisc(phi, a, cfg.grid, cfg.seed, workers=cfg.workers)
            for j in range(2):
                entry = {"name": f"{name} alpha={_alpha_label(a)} j={j + 1}"}
                try:
                    r = build_rj(phi, a, j, points=pts)
                except RjConstructionError as exc:
                    entry["error"] = str(exc)
                    entry["pass"] = False
                    cases.append(entry)
                    continue
                ray = rj_ray_bound_check(r, mu=mu)
                entry["validation_pass_rate"] = r.validation_pass_rate
                entry["ray"] = ray.to_json()
                entry["pass"] = r.validation_pass_rate >= 0.99 and ray.monotone and ray.bound_holds
                cases.append(entry)
    return {"checks": cases}


def random_lemma_instance(rng: np.random.Generator, max_k: int = 5):
    """A random (p, eps) with p zero-free on the hull of B(0, eps) and 1."""
    eps = float(rng.uniform(0.05, 1.0))
    k = int(rng.integers(0, max_k + 1))
    roots = []
    while len(roots) < k:
        z = complex(*rng.uniform(-3, 3, 2))
        if not hull_gauge(z, eps):
            roots.append(z)
    lead = complex(*rng.normal(size=2))
    return UniPoly.from_roots(roots, lead), eps


def lemma_suite(cfg: SelftestConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    cases = []
    for i in range(cfg.lemma_instances):
        p, eps = random_lemma_instance(rng)
        res = lemma_lower_bound_test(p, eps, cfg.lemma_grid)
        cases.append(
            {"name": f"instance {i}", "k": res.k, "eps": eps, "min_ratio": res.min_ratio, "bound": res.bound, "pass": res.holds}
        )
    return {"checks": cases}


def example_reproduction(cfg: SelftestConfig) -> dict:
    rep = demo_report(DemoConfig(seed=cfg.seed, workers=cfg.workers, max_degree=cfg.degree))
    checks = [{"name": k, "pass": v} for k, v in rep.pop("checks").items()]
    return {"checks": checks, "demo": rep}


CRITERIA = {
    1: ("Poisson reproduction", poisson_reproduction),
    2: ("fiber vs coarea equivalence", cross_method),
    3: ("Aleksandrov disintegration", disintegration),
    4: ("obstruction vs Gram residual consistency", decision_consistency),
    5: ("explicit conjugate construction", step_one_construction),
    6: ("polynomial lower bound on [0, 1]", lemma_suite),
    7: ("matrix-ball example reproduction", example_reproduction),
}


def run_criterion(number: int, cfg: SelftestConfig) -> dict:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    out = fn(cfg)
    elapsed = time.perf_counter() - t0
    out = {"criterion": number, "title": title, **out}
    out["pass"] = all(c["pass"] for c in out["checks"])
    out["n_failed"] = sum(not c["pass"] for c in out["checks"])
    if cfg.timing:
        out["wall_time"] = elapsed
    return out


def run_selftest(cfg: SelftestConfig | None = None, criteria=None) -> dict:
    cfg = cfg or SelftestConfig()
    results = [run_criterion(n, cfg) for n in (criteria or sorted(CRITERIA))]
    return {"seed": cfg.seed, "criteria": results, "pass": all(r["pass"] for r in results)}

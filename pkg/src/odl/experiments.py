"""Experiment runners, deterministic reporting, and fixture calibration.

Every runner is deterministic in (config, seed): random streams are keyed by
(seed, experiment, trial index), so trials are order-independent and a rerun
reproduces the output byte for byte.  Wall time is carried on the report
object but never serialized into it.
"""

from __future__ import annotations

import json
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .circle_dyn import (
    CounterexampleSet,
    Rotation,
    build_counterexample,
    dilation_density_fraction,
    geometric_schedule,
    glasner_min_dilation,
    qd_pair_profile,
    qd_profile,
)
from .config import ExperimentConfig, EXPERIMENTS
from .errors import ConfigError
from .geometry import (
    Metric,
    PointSet,
    Space,
    circle_gap,
    interval_gap,
    is_eps_dense,
    torus_gap_upper,
)
from .harmonic import build_bump, decay_ratio_table, ramanujan_dft_table, ramanujan_bruteforce, ramanujan_formula
from .iet import ThreeIET, iet_qd_profile
from .scalars import QuadSurd, render_scalar, to_float
from .torus_group import (
    IntMatrix,
    enumerate_ball,
    lyapunov_data,
    chi_density_search,
    search_eps_dense,
    standard_generators,
    subordinate_search_eps_dense,
    walk_equidistribution,
)

FIXTURE_PACKAGE = "odl.fixtures"


def rng_for(seed: int, experiment: str, trial: int) -> np.random.Generator:
    """Independent, reproducible stream keyed by (seed, experiment, trial)."""
    key = zlib.crc32(experiment.encode())
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key, trial)))


def _map_trials(fn: Callable[[int], object], n: int, workers: int) -> list:
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return render_scalar(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class RunReport:
    config: ExperimentConfig
    columns: list[str]
    rows: list[tuple]
    summary: dict
    wall_time: float = 0.0

    def render(self) -> str:
        lines = [f"# odl-version: {__version__}"]
        for k, v in self.config.echo():
            lines.append(f"# {k}: {_fmt(v)}")
        for k, v in sorted(self.summary.items()):
            lines.append(f"# summary {k}: {_fmt(v)}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        Path(path).write_bytes(self.render().encode("utf-8"))


# ---------------------------------------------------------------------------
# set builders


def dyadic_set(space: str, size: int) -> PointSet:
    vals = [Fraction(0)] + [Fraction(1, 2**j) for j in range(1, size + 1)]
    if space == "circle":
        return PointSet.circle(vals)
    return PointSet.interval(vals)


def _alpha_named(name: str) -> QuadSurd:
    if name == "golden":
        return QuadSurd.golden()
    if name == "silver":
        return QuadSurd.silver()
    raise ConfigError(f"unknown quadratic alpha {name!r} (golden or silver)")


def make_action(name: str):
    """Named commuting families used by the abelian experiments."""
    if name == "fibonacci-t2":
        return lyapunov_data([IntMatrix([[2, 1], [1, 1]])])
    if name == "cubic-t3":
        # companion matrix of the totally real cubic x^3 + x^2 - 2x - 1 and
        # its Galois-conjugate unit M^2 - 2I; a rank-2 commuting pair on T^3
        m = IntMatrix([[0, 0, 1], [1, 0, 2], [0, 1, -1]])
        m2 = m @ m
        shifted = [[m2.rows[i][j] - (2 if i == j else 0) for j in range(3)] for i in range(3)]
        return lyapunov_data([m, IntMatrix(shifted)])
    raise ConfigError(f"unknown action {name!r} (fibonacci-t2 or cubic-t3)")


def unstable_line_set(action, size: int, spacing: float, rng: np.random.Generator, chi_index: Optional[int] = None) -> tuple[PointSet, int]:
    """Random points along the most expanding real leaf direction through 0."""
    if chi_index is None:
        chi_index = int(np.argmax([e.max() for e in action.exponents]))
    v = action.directions[chi_index]
    if v is None:
        raise ConfigError("chosen exponent has no real leaf direction")
    ps = np.sort(rng.random(size)) * size * spacing
    pts = (ps[:, None] * v[None, :]) % 1.0
    return PointSet.torus(pts.tolist(), action.dim), chi_index


# ---------------------------------------------------------------------------
# runners


def _run_gap(cfg: ExperimentConfig):
    space = cfg.params["space"]
    rows_in = cfg.params["points"]
    if space == "circle":
        A = PointSet.circle([row[0] for row in rows_in])
        gap = circle_gap(A)
    elif space == "interval":
        A = PointSet.interval([row[0] for row in rows_in])
        gap = interval_gap(A)
    elif space == "torus":
        A = PointSet.torus(rows_in, cfg.params["dim"])
        metric = Metric.TORUS_L2 if cfg.params["metric"] == "l2" else Metric.TORUS_LINF
        gap = torus_gap_upper(A, cfg.params["resolution"], metric)
    else:
        raise ConfigError(f"unknown space {space!r}")
    rows = [(space, len(A), to_float(gap))]
    return ["space", "points", "gap"], rows, {"gap": to_float(gap)}


def _run_glasner(cfg: ExperimentConfig):
    p = cfg.params

    def one(trial: int):
        rng = rng_for(cfg.seed, "glasner-dilation", trial)
        A = PointSet.circle(rng.random(p["set_size"]).tolist())
        res = glasner_min_dilation(A, p["eps"], p["n_max"])
        frac = dilation_density_fraction(A, p["eps"], p["density_n_max"])
        return trial, res, frac

    out = _map_trials(one, p["trials"], cfg.workers)
    rows = []
    for trial, res, frac in out:
        rows.append((trial, int(res.found), res.m if res.found else -1, res.gap, frac))
    found = sum(r[1] for r in rows)
    rows.sort()
    return (
        ["trial", "found", "m", "gap", "density_fraction"],
        rows,
        {"found_fraction": found / max(1, len(rows)), "min_density_fraction": min(r[4] for r in rows)},
    )


def _profile_minima(profiles) -> list[float]:
    return [to_float(pr.min_scaled()) for pr in profiles]


def _run_rotation_qd(cfg: ExperimentConfig):
    p = cfg.params
    A = dyadic_set("circle", p["set_size"]) if p["set"] == "dyadic" else None
    schedule = geometric_schedule(p["n_max"], p["schedule_ratio"], extra=(10, 100))

    def one(trial: int):
        rng = rng_for(cfg.seed, "rotation-qd", trial)
        alpha = float(rng.random())
        base = A if A is not None else PointSet.circle(rng.random(p["set_size"]).tolist())
        return trial, alpha, qd_profile(Rotation(alpha), base, p["n_max"], schedule)

    out = _map_trials(one, p["alphas"], cfg.workers)
    rows = []
    minima = []
    for trial, alpha, prof in sorted(out, key=lambda t: t[0]):
        minima.append(to_float(prof.min_scaled()))
        for rec in prof.records:
            rows.append((trial, alpha, rec.n, to_float(rec.gap), to_float(rec.scaled)))
    return (
        ["trial", "alpha", "n", "gap", "scaled"],
        rows,
        {"min_scaled_per_trial": tuple(minima)},
    )


def _run_counterexample(cfg: ExperimentConfig):
    p = cfg.params
    alpha = _alpha_named(p["alpha"])
    cx = build_counterexample(alpha, p["growth"], p["depth"])
    schedule = geometric_schedule(p["n_max"], extra=tuple(range(1, 101)) + (1000,))
    prof = qd_profile(Rotation(float(alpha)), cx.point_set(), p["n_max"], schedule)
    early = min(to_float(r.scaled) for r in prof.records if 1 <= r.n <= 100)
    late = min(to_float(r.scaled) for r in prof.records if 1000 <= r.n <= p["n_max"])
    rows = [(r.n, to_float(r.gap), to_float(r.scaled)) for r in prof.records]
    summary = {
        "q_values": tuple(cx.q_values),
        "points": tuple(cx.to_csv_lines()[1:]),
        "window_early_min": early,
        "window_late_min": late,
        "window_ratio": late / early,
        "min_scaled": min(to_float(r.scaled) for r in prof.records),
    }
    return ["n", "gap", "scaled"], rows, summary


def _run_pair_qd(cfg: ExperimentConfig):
    p = cfg.params
    schedule = geometric_schedule(p["n_max"], extra=(10,))

    def one(trial: int):
        rng = rng_for(cfg.seed, "pair-qd", trial)
        alpha = float(rng.random())
        A1 = PointSet.circle(rng.random(p["set_size"]).tolist())
        A2 = PointSet.circle(rng.random(p["set_size"]).tolist())
        return trial, alpha, qd_pair_profile(Rotation(alpha), A1, A2, p["n_max"], schedule)

    out = _map_trials(one, p["alphas"], cfg.workers)
    rows, decayed = [], 0
    minima, baselines = [], []
    for trial, alpha, prof in sorted(out, key=lambda t: t[0]):
        m = to_float(prof.min_scaled())
        b = to_float(prof.scaled_at(10))
        minima.append(m)
        baselines.append(b)
        decayed += m < 0.1 * b
        for rec in prof.records:
            rows.append((trial, alpha, rec.n, to_float(rec.gap), to_float(rec.scaled)))
    return (
        ["trial", "alpha", "n", "gap", "scaled"],
        rows,
        {
            "decayed_fraction": decayed / max(1, len(minima)),
            "min_scaled_per_trial": tuple(minima),
            "baseline10_per_trial": tuple(baselines),
        },
    )


def _run_iet_qd(cfg: ExperimentConfig):
    p = cfg.params
    A = dyadic_set("interval", p["set_size"])
    schedule = geometric_schedule(p["n_max"])

    def one(trial: int):
        rng = rng_for(cfg.seed, "iet-qd", trial)
        ell = float(rng.uniform(0.05, 0.9))
        alpha = float(rng.uniform(0.02, 1 - ell - 0.02))
        P = ThreeIET(alpha, alpha + ell)
        return trial, alpha, alpha + ell, iet_qd_profile(P, A, p["n_max"], schedule)

    out = _map_trials(one, p["samples"], cfg.workers)
    rows, minima = [], []
    for trial, a, b, prof in sorted(out, key=lambda t: t[0]):
        minima.append(to_float(prof.min_scaled()))
        for rec in prof.records:
            rows.append((trial, a, b, rec.n, to_float(rec.gap), to_float(rec.scaled)))
    return (
        ["trial", "alpha", "beta", "n", "gap", "scaled"],
        rows,
        {"min_scaled_per_trial": tuple(minima)},
    )


def _run_sl_search(cfg: ExperimentConfig):
    p = cfg.params
    gens = standard_generators(p["dim"])
    ball = enumerate_ball(gens, p["radius"], budget=p["ball_budget"])

    def one(trial: int):
        rng = rng_for(cfg.seed, "sl-search", trial)
        A = PointSet.torus(rng.random((p["set_size"], p["dim"])).tolist(), p["dim"])
        return trial, search_eps_dense(A, p["eps"], ball, p["resolution"])

    out = _map_trials(one, p["sets"], cfg.workers)
    rows = []
    for trial, res in sorted(out, key=lambda t: t[0]):
        rows.append(
            (
                trial,
                p["set_size"],
                p["eps"],
                p["radius"],
                int(res.found),
                res.word_length if res.found else -1,
                res.gap if res.found else res.best_gap,
            )
        )
    found = sum(r[4] for r in rows)
    return (
        ["k", "eps", "radius", "found", "word_length", "gap"],
        [r[1:] for r in rows],
        {"found_fraction": found / max(1, len(rows)), "ball_size": len(ball)},
    )


def _run_walk(cfg: ExperimentConfig):
    p = cfg.params
    coords = p["x"]
    dim = len(coords)
    x = PointSet.torus([coords], dim).points[0]
    gens = standard_generators(dim)
    report = walk_equidistribution(x, gens, p["steps"], p["trials"], seed=cfg.seed)
    rows = []
    for trial, tvs in enumerate(report.tv):
        for h in report.horizons:
            rows.append((trial, h, tvs[h]))
    return (
        ["trial", "steps", "tv"],
        rows,
        {"orbit_size": report.orbit_size, "denominator": report.q, "final_tv": tuple(report.final_tv())},
    )


def _run_abelian(cfg: ExperimentConfig):
    p = cfg.params
    action = make_action(p["action"])
    if p["mode"] == "chi":
        n = chi_density_search(action, p["chi_index"], p["eps"], p["box_radius"])
        found = n is not None
        rows = [(p["mode"], int(found), _fmt(n) if found else "", abs(action.chi(p["chi_index"], n)) if found else -1.0)]
        summary = {"found": int(found), "general_position": int(action.general_position)}
    elif p["mode"] == "subordinate":
        rng = rng_for(cfg.seed, "abelian-search", 0)
        A, chi_index = unstable_line_set(action, p["set_size"], p["spacing"], rng)
        res = subordinate_search_eps_dense(action, A, p["eps"], p["box_radius"], p["resolution"], chi_index)
        rows = [(p["mode"], int(res.found), _fmt(res.n) if res.found else "", res.gap if res.found else res.best_gap)]
        summary = {"found": int(res.found), "chi_index": chi_index}
    else:
        raise ConfigError(f"unknown mode {p['mode']!r} (chi or subordinate)")
    return ["mode", "found", "n", "value"], rows, summary


def _run_ramanujan(cfg: ExperimentConfig):
    import itertools
    from math import gcd

    p = cfg.params
    rows = []
    mismatches = 0
    bound_violations = 0
    for n in p["dims"]:
        m_values = [m for m in itertools.product(range(-p["m_max"], p["m_max"] + 1), repeat=n) if any(m)]
        for q in range(1, p["q_max"] + 1):
            table = None if n == 1 else ramanujan_dft_table(n, q)
            bad = 0
            bv = 0
            for m in m_values:
                brute = ramanujan_bruteforce(m, q) if n == 1 else int(table[tuple(v % q for v in m)])
                formula = ramanujan_formula(m, q)
                if brute != formula:
                    bad += 1
                g = 0
                for v in m:
                    g = gcd(g, abs(v))
                if abs(formula) > g**n:
                    bv += 1
            mismatches += bad
            bound_violations += bv
            rows.append((n, q, bad, bv))
    return (
        ["n", "q", "mismatches", "bound_violations"],
        rows,
        {"total_mismatches": mismatches, "total_bound_violations": bound_violations},
    )


def _run_bump_decay(cfg: ExperimentConfig):
    p = cfg.params
    rows = []
    summary = {}
    for eps in p["eps_list"]:
        bump = build_bump(eps, 1, p["grid"])
        table = decay_ratio_table(bump, p["m_max"])
        for m, coeff, ratio in table:
            rows.append((eps, m, coeff, ratio))
        summary[f"max_ratio_eps_{eps}"] = max(t[2] for t in table)
        summary[f"integral_eps_{eps}"] = bump.integral()
        summary[f"l2_eps_{eps}"] = bump.l2_mass()
    return ["eps", "m_norm", "abs_coeff", "decay_ratio"], rows, summary


_RUNNERS = {
    "gap": _run_gap,
    "glasner-dilation": _run_glasner,
    "rotation-qd": _run_rotation_qd,
    "rotation-counterexample": _run_counterexample,
    "pair-qd": _run_pair_qd,
    "iet-qd": _run_iet_qd,
    "sl-search": _run_sl_search,
    "walk-equi": _run_walk,
    "abelian-search": _run_abelian,
    "ramanujan-verify": _run_ramanujan,
    "bump-decay": _run_bump_decay,
}

assert set(_RUNNERS) == set(EXPERIMENTS)


def run(config: ExperimentConfig) -> RunReport:
    """Dispatch to the experiment runner; deterministic given (config, seed)."""
    t0 = time.perf_counter()
    columns, rows, summary = _RUNNERS[config.experiment](config)
    report = RunReport(config, columns, rows, summary, wall_time=time.perf_counter() - t0)
    return report


# ---------------------------------------------------------------------------
# calibration fixtures

_CALIBRATABLE = {
    "rotation-qd",
    "glasner-dilation",
    "rotation-counterexample",
    "pair-qd",
    "iet-qd",
    "bump-decay",
}


def calibrate(config: ExperimentConfig) -> dict:
    """Run the designated oracle pass and distill a fixture for the test suite.

    Exact-path experiments have nothing to calibrate and are refused.
    """
    if config.experiment not in _CALIBRATABLE:
        raise ConfigError(f"experiment {config.experiment!r} is exact; nothing to calibrate")
    report = run(config)
    s = report.summary
    if config.experiment == "rotation-qd":
        minima = sorted(s["min_scaled_per_trial"])
        thr = minima[min(len(minima) - 1, int(np.ceil(0.85 * len(minima))))]
        data = {"minima": list(s["min_scaled_per_trial"]), "threshold": float(thr)}
    elif config.experiment == "glasner-dilation":
        fracs = [row[4] for row in report.rows]
        data = {
            "found_fraction": s["found_fraction"],
            "density_fractions": fracs,
            "density_fraction_threshold": float(0.9 * min(fracs)),
        }
    elif config.experiment == "rotation-counterexample":
        data = {
            "min_scaled": s["min_scaled"],
            "window_early_min": s["window_early_min"],
            "window_late_min": s["window_late_min"],
            "window_ratio": s["window_ratio"],
            "q_values": list(s["q_values"]),
        }
    elif config.experiment == "pair-qd":
        data = {
            "decayed_fraction": s["decayed_fraction"],
            "minima": list(s["min_scaled_per_trial"]),
            "baseline10": list(s["baseline10_per_trial"]),
        }
    elif config.experiment == "iet-qd":
        minima = sorted(s["min_scaled_per_trial"])
        thr = minima[min(len(minima) - 1, int(np.ceil(0.85 * len(minima))))]
        data = {"minima": list(s["min_scaled_per_trial"]), "threshold": float(thr)}
    else:  # bump-decay: freeze the measured L2-mass constant
        eps_list = config.params["eps_list"]
        l2 = {str(e): report.summary[f"l2_eps_{e}"] for e in eps_list}
        data = {"l2_mass": l2, "c_constant": max(e * report.summary[f"l2_eps_{e}"] for e in eps_list)}
    return {
        "experiment": config.experiment,
        "seed": config.seed,
        "params": {k: _fmt(v) for k, v in sorted(config.params.items())},
        "odl_version": __version__,
        "data": data,
    }


def fixture_name(experiment: str) -> str:
    return experiment.replace("-", "_") + ".json"


def write_fixture(fixture: dict, path: str) -> None:
    Path(path).write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_fixture(experiment: str) -> dict:
    """Committed calibration fixture for an experiment, from package data."""
    name = fixture_name(experiment)
    ref = resources.files(FIXTURE_PACKAGE).joinpath(name)
    return json.loads(ref.read_text(encoding="utf-8"))

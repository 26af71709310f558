"""Fail-closed INI configuration for the experiment runner.

One section per experiment, flat `key = value` pairs.  Unknown keys abort
before any computation; every run echoes its fully resolved configuration.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .errors import ConfigError


def _parse_int(s: str) -> int:
    return int(s)


def _parse_float(s: str) -> float:
    return float(s)


def _parse_str(s: str) -> str:
    return s.strip()


def _parse_fraction(s: str) -> Fraction:
    return Fraction(s.strip())


def _parse_scalar_list(s: str) -> tuple:
    """Comma list of exact rationals (p/q) or floats; exact wins when all are."""
    items = [t.strip() for t in s.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    if all(("/" in t or "." not in t) for t in items):
        return tuple(Fraction(t) for t in items)
    return tuple(float(t) for t in items)


def _parse_point_rows(s: str) -> tuple:
    """Semicolon-separated coordinate rows, each a comma list."""
    rows = [r.strip() for r in s.split(";") if r.strip()]
    return tuple(_parse_scalar_list(r) for r in rows)


def _parse_float_list(s: str) -> tuple[float, ...]:
    return tuple(float(t.strip()) for t in s.split(",") if t.strip())


def _parse_int_list(s: str) -> tuple[int, ...]:
    return tuple(int(t.strip()) for t in s.split(",") if t.strip())


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], object]
    default: object = None
    required: bool = False


_COMMON = {
    "seed": Key(_parse_int, 0),
    "workers": Key(_parse_int, 1),
}

EXPERIMENT_SCHEMAS: dict[str, dict[str, Key]] = {
    "gap": {
        "space": Key(_parse_str, "circle"),
        "dim": Key(_parse_int, 2),
        "metric": Key(_parse_str, "linf"),
        "points": Key(_parse_point_rows, required=True),
        "resolution": Key(_parse_int, 64),
    },
    "glasner-dilation": {
        "trials": Key(_parse_int, 20),
        "set_size": Key(_parse_int, 25),
        "eps": Key(_parse_float, 0.05),
        "n_max": Key(_parse_int, 5000),
        "density_n_max": Key(_parse_int, 2000),
    },
    "rotation-qd": {
        "alphas": Key(_parse_int, 50),
        "set": Key(_parse_str, "dyadic"),
        "set_size": Key(_parse_int, 30),
        "n_max": Key(_parse_int, 100_000),
        "schedule_ratio": Key(_parse_float, 1.25),
    },
    "rotation-counterexample": {
        "alpha": Key(_parse_str, "golden"),
        "growth": Key(_parse_str, "square"),
        "depth": Key(_parse_int, 4),
        "n_max": Key(_parse_int, 10_000),
    },
    "pair-qd": {
        "alphas": Key(_parse_int, 20),
        "set_size": Key(_parse_int, 10),
        "n_max": Key(_parse_int, 10_000),
    },
    "iet-qd": {
        "samples": Key(_parse_int, 50),
        "set": Key(_parse_str, "dyadic"),
        "set_size": Key(_parse_int, 20),
        "n_max": Key(_parse_int, 10_000),
    },
    "sl-search": {
        "sets": Key(_parse_int, 10),
        "set_size": Key(_parse_int, 10),
        "dim": Key(_parse_int, 2),
        "eps": Key(_parse_float, 0.2),
        "radius": Key(_parse_int, 8),
        "resolution": Key(_parse_int, 32),
        "ball_budget": Key(_parse_int, 200_000),
    },
    "walk-equi": {
        "x": Key(_parse_scalar_list, (Fraction(1, 5), Fraction(2, 5))),
        "steps": Key(_parse_int, 100_000),
        "trials": Key(_parse_int, 3),
    },
    "abelian-search": {
        "action": Key(_parse_str, "cubic-t3"),
        "mode": Key(_parse_str, "chi"),
        "chi_index": Key(_parse_int, 0),
        "eps": Key(_parse_float, 0.01),
        "box_radius": Key(_parse_int, 50),
        "resolution": Key(_parse_int, 32),
        "set_size": Key(_parse_int, 30),
        "spacing": Key(_parse_float, 1e-3),
    },
    "ramanujan-verify": {
        "q_max": Key(_parse_int, 100),
        "dims": Key(_parse_int_list, (1, 2, 3)),
        "m_max": Key(_parse_int, 10),
    },
    "bump-decay": {
        "eps_list": Key(_parse_float_list, (0.05, 0.1, 0.2)),
        "grid": Key(_parse_int, 2048),
        "m_max": Key(_parse_int, 200),
    },
}

EXPERIMENTS = tuple(EXPERIMENT_SCHEMAS)


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict = field(default_factory=dict)
    output_path: Optional[str] = None
    workers: int = 1

    def echo(self) -> list[tuple[str, object]]:
        items = [("experiment", self.experiment), ("seed", self.seed), ("workers", self.workers)]
        items.extend(sorted(self.params.items()))
        return items


def resolve_config(
    experiment: str,
    raw: dict[str, str],
    seed_override: Optional[int] = None,
    out_override: Optional[str] = None,
) -> ExperimentConfig:
    """Validate raw key/value pairs against the experiment schema, fail-closed."""
    if experiment not in EXPERIMENT_SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    schema = {**_COMMON, **EXPERIMENT_SCHEMAS[experiment]}
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown key(s) for {experiment}: {', '.join(sorted(unknown))}")
    values: dict[str, object] = {}
    for key, spec in schema.items():
        if key in raw:
            try:
                values[key] = spec.parse(raw[key])
            except Exception as exc:
                raise ConfigError(f"bad value for {key!r}: {raw[key]!r} ({exc})") from exc
        elif spec.required:
            raise ConfigError(f"missing required key {key!r} for {experiment}")
        else:
            values[key] = spec.default
    config_seed = values.pop("seed")
    seed = seed_override if seed_override is not None else config_seed
    workers = values.pop("workers")
    return ExperimentConfig(experiment, int(seed), values, out_override, int(workers))


def load_config(
    path: Optional[str],
    experiment: str,
    seed_override: Optional[int] = None,
    out_override: Optional[str] = None,
) -> ExperimentConfig:
    """Read the INI file (if given) and resolve the experiment's section."""
    raw: dict[str, str] = {}
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keys are case-sensitive; unknown keys must not hide
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
        if parser.has_section(experiment):
            raw = dict(parser.items(experiment))
        else:
            sections = parser.sections()
            if sections:
                raise ConfigError(
                    f"config file has no [{experiment}] section (found {', '.join(sections)})"
                )
    return resolve_config(experiment, raw, seed_override, out_override)

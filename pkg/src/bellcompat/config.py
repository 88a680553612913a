"""Declarative simulation configs (TOML).

Top-level keys::

    model = "table" | "context" | "threshold" | "drift"
    trials = 100000          # per context; --trials overrides
    seed = 0                 # --seed overrides
    workers = 1
    inequality = "bell"      # optional: evaluate across contexts
    inequality_settings_deg = [0, 60, 30]

    [[context]]              # one per pair of settings
    settings_deg = [0, 60]
    table = [0.125, 0.375, 0.375, 0.125]   # model "table" only; default singlet
    hidden = { kind = "discrete", values = [1, -1], probs = [0.5, 0.5] }

    [hidden]                 # default hidden density for "context"/"drift"
    kind = "uniform"         # uniform (low, high) | discrete (values, probs)
    rule = "sign_cos2"       # sign_cos2 | shared_sign | flip_at
    flip_setting_deg = 30    # flip_at only

    [instrument]             # optional, same density kinds, both stations
    [detection]              # optional: kind = "constant" (efficiency) | "cos2"

    [threshold]              # model "threshold"
    pulse_energy = 1.0
    threshold = 1.0
    noise = { kind = "uniform", low = -0.999, high = 0.999 }   # or kind = "zero"
    modulation = "none"      # none | cos2

    [drift]                  # model "drift"
    runs = 4
    densities = [{ kind = ... }, { kind = ... }]   # cycled run by run
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import PairwiseTable
from .simulate import (
    ContextSpec,
    DiscreteDensity,
    RunDriftSpec,
    ThresholdDetectionSpec,
    UniformDensity,
    ZeroDensity,
    shared_sign,
    sign_cos2,
)
from .singlet import singlet_pair_table

MODELS = ("table", "context", "threshold", "drift")


class ConfigError(ValueError):
    pass


@dataclass
class SimulationConfig:
    model: str
    trials: int
    seed: int
    workers: int
    contexts: list = field(default_factory=list)
    threshold: ThresholdDetectionSpec | None = None
    drift_runs: int = 1
    inequality: str | None = None
    inequality_settings: tuple | None = None
    source: dict = field(default_factory=dict)


def density_from(spec: dict, where: str):
    kind = spec.get("kind")
    try:
        if kind == "uniform":
            return UniformDensity(float(spec.get("low", 0.0)), float(spec.get("high", math.pi)))
        if kind == "discrete":
            return DiscreteDensity([float(v) for v in spec["values"]], spec["probs"])
        if kind == "zero":
            return ZeroDensity()
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown density kind {kind!r}")


def flip_at(setting: float):
    """``sign(lam)``, negated at ``setting`` when ``|lam| != 1``."""

    def rule(theta, lam, lam_theta=None):
        lam = np.asarray(lam, dtype=float)
        s = np.where(lam >= 0, 1, -1)
        if abs(math.remainder(theta - setting, 2 * math.pi)) < 1e-9:
            s = np.where(np.abs(lam) == 1, s, -s)
        return s.astype(np.int8)

    return rule


def rule_from(hidden: dict):
    name = hidden.get("rule", "sign_cos2")
    if name == "sign_cos2":
        return sign_cos2
    if name == "shared_sign":
        return shared_sign
    if name == "flip_at":
        if "flip_setting_deg" not in hidden:
            raise ConfigError("hidden: rule 'flip_at' needs flip_setting_deg")
        return flip_at(math.radians(float(hidden["flip_setting_deg"])))
    raise ConfigError(f"hidden: unknown rule {name!r}")


def detection_from(spec: dict | None):
    if spec is None:
        return None
    kind = spec.get("kind")
    if kind == "constant":
        eff = float(spec.get("efficiency", 1.0))
        if not 0 <= eff <= 1:
            raise ConfigError(f"detection: efficiency {eff} outside [0, 1]")
        return lambda theta, lam, lam_theta: np.full(np.shape(lam), eff)
    if kind == "cos2":
        return lambda theta, lam, lam_theta: np.abs(np.cos(2.0 * (np.asarray(lam) - theta)))
    raise ConfigError(f"detection: unknown kind {kind!r}")


def _settings(ctx: dict, k: int) -> tuple[float, float]:
    try:
        t1, t2 = ctx["settings_deg"]
    except (KeyError, ValueError):
        raise ConfigError(f"context {k}: settings_deg must be a pair of angles") from None
    return math.radians(float(t1)), math.radians(float(t2))


def load_config(path) -> SimulationConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return build_config(raw)


def build_config(raw: dict) -> SimulationConfig:
    model = raw.get("model")
    if model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got {model!r}")
    cfg = SimulationConfig(
        model=model,
        trials=int(raw.get("trials", 100_000)),
        seed=int(raw.get("seed", 0)),
        workers=int(raw.get("workers", 1)),
        source=raw,
    )
    if "inequality" in raw:
        cfg.inequality = raw["inequality"]
        cfg.inequality_settings = tuple(math.radians(float(x)) for x in raw.get("inequality_settings_deg", ()))
    contexts = raw.get("context", [])
    if not contexts:
        raise ConfigError("at least one [[context]] is required")

    if model == "table":
        for k, ctx in enumerate(contexts):
            s = _settings(ctx, k)
            table = PairwiseTable((0, 1), ctx["table"]) if "table" in ctx else singlet_pair_table(*s)
            bad = table.violations()
            if bad:
                raise ConfigError(f"context {k}: " + "; ".join(bad))
            cfg.contexts.append((s, table))
        return cfg

    if model == "threshold":
        th = raw.get("threshold")
        if th is None:
            raise ConfigError("model 'threshold' needs a [threshold] table")
        modulation = th.get("modulation", "none")
        if modulation not in ("none", "cos2"):
            raise ConfigError(f"threshold: unknown modulation {modulation!r}")
        try:
            cfg.threshold = ThresholdDetectionSpec(
                pulse_energy=float(th.get("pulse_energy", 1.0)),
                noise_law=density_from(th.get("noise", {"kind": "zero"}), "threshold.noise"),
                threshold=float(th.get("threshold", 1.0)),
                modulation=(lambda theta, lam: np.abs(np.cos(2.0 * (lam - theta)))) if modulation == "cos2" else None,
            )
        except ValueError as exc:
            raise ConfigError(f"threshold: {exc}") from None
        cfg.contexts = [(_settings(ctx, k), None) for k, ctx in enumerate(contexts)]
        return cfg

    hidden = raw.get("hidden", {"kind": "uniform"})
    rule = rule_from(hidden)
    instrument = density_from(raw["instrument"], "instrument") if "instrument" in raw else None
    detection = detection_from(raw.get("detection"))
    for k, ctx in enumerate(contexts):
        s = _settings(ctx, k)
        system = density_from(ctx.get("hidden", hidden), f"context {k} hidden")
        cfg.contexts.append((s, ContextSpec(s, system, rule, (instrument, instrument), detection)))

    if model == "drift":
        drift = raw.get("drift")
        if drift is None or not drift.get("densities"):
            raise ConfigError("model 'drift' needs [drift] with a nonempty densities list")
        densities = [density_from(d, f"drift.densities[{i}]") for i, d in enumerate(drift["densities"])]
        cfg.drift_runs = int(drift.get("runs", len(densities)))
        cfg.contexts = [
            (s, RunDriftSpec(spec, cfg.drift_runs, lambda r, _d, ds=densities: ds[r % len(ds)]))
            for s, spec in cfg.contexts
        ]
    return cfg

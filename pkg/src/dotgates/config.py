"""Flat JSON configuration for the command-line runners.

A config file is a single JSON object of scalar (or list) values; every
key has a default, unknown keys are rejected by name, and the same keys
can be overridden on the command line with ``--set key=value``.  Each
experiment kind accepts its own key set:

* ``cphase``     - dot parameters, one calibrated pulse, validity
  thresholds, optionally ``ratios`` (list of omega/v_f values) to emit a
  family of runs, or ``commensurate`` to snap the square-pulse duration
  to whole spectator periods.
* ``zrot``       - dot parameters (``omega_a`` defaults to a scaled-down
  2e3 meV so the lab-frame carrier is integrable), one pi pulse, and the
  ``wait`` between the two pulses.
* ``raman``      - Raman drive parameters, optionally ``detunings`` and
  ``gammas`` lists for a family of runs.
* ``conditions`` - dot parameters plus a pulse; no integration.
* ``sweep``      - ``sweep_kind``, ``sweep_param``, ``sweep_values`` plus
  any base keys of the child kind.

The pulse is described by ``pulse_shape`` (``square`` or ``gaussian``),
``omega`` (peak Rabi energy in meV) and either an explicit ``duration`` /
``sigma`` or ``null`` to derive the calibrated value for the experiment's
target area.
"""

from __future__ import annotations

import difflib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Mapping

from .dynamics import IntegratorConfig
from .gates import RamanParams, ZGateParams, commensurate_gate_time
from .model import DotPairParams, GaussianPulse, SquarePulse
from .operators import HBAR_MEV_PS

__all__ = ["ConfigError", "ExperimentConfig", "load_config_file",
           "apply_overrides", "build_config", "EXPERIMENT_KINDS"]

_SQRT2 = math.sqrt(2.0)
_TWO_PI = 2.0 * math.pi

EXPERIMENT_KINDS = ("cphase", "zrot", "raman", "conditions", "sweep")


class ConfigError(ValueError):
    """A configuration file or override is invalid."""


def _float(key: str, v: Any, *, positive: bool = False, nonneg: bool = False,
           nonzero: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {v!r}")
    x = float(v)
    if not math.isfinite(x):
        raise ConfigError(f"key {key!r} must be finite, got {v!r}")
    if positive and x <= 0:
        raise ConfigError(f"key {key!r} must be > 0, got {v!r}")
    if nonneg and x < 0:
        raise ConfigError(f"key {key!r} must be >= 0, got {v!r}")
    if nonzero and x == 0:
        raise ConfigError(f"key {key!r} must be nonzero")
    return x


def _make_float(**kw: bool) -> Callable[[str, Any], float]:
    return lambda key, v: _float(key, v, **kw)


def _make_opt_float(**kw: bool) -> Callable[[str, Any], float | None]:
    return lambda key, v: None if v is None else _float(key, v, **kw)


def _make_float_list(**kw: bool) -> Callable[[str, Any], tuple[float, ...] | None]:
    def coerce(key: str, v: Any) -> tuple[float, ...] | None:
        if v is None:
            return None
        if not isinstance(v, (list, tuple)):
            raise ConfigError(f"key {key!r} must be a list of numbers, got {v!r}")
        return tuple(_float(f"{key}[{i}]", x, **kw) for i, x in enumerate(v))
    return coerce


def _bool(key: str, v: Any) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"key {key!r} must be true or false, got {v!r}")
    return v


def _make_choice(*choices: str) -> Callable[[str, Any], str]:
    def coerce(key: str, v: Any) -> str:
        if v not in choices:
            raise ConfigError(f"key {key!r} must be one of {choices}, got {v!r}")
        return str(v)
    return coerce


def _str(key: str, v: Any) -> str:
    if not isinstance(v, str) or not v:
        raise ConfigError(f"key {key!r} must be a nonempty string, got {v!r}")
    return v


_REQUIRED = object()


@dataclass(frozen=True)
class _Key:
    default: Any
    coerce: Callable[[str, Any], Any]
    sweepable: bool = False


_INTEGRATOR_KEYS: dict[str, _Key] = {
    "rtol": _Key(1e-9, _make_float(positive=True), True),
    "atol": _Key(1e-12, _make_float(positive=True), True),
    "max_step": _Key(None, _make_opt_float(positive=True), True),
    "sample_interval": _Key(0.01, _make_float(positive=True), True),
}

_PAIR_KEYS: dict[str, _Key] = {
    "omega_a": _Key(2.0e6, _make_float(positive=True), True),
    "v_f": _Key(0.85, _make_float(nonzero=True), True),
    "v_xx": _Key(5.0, _make_float(), True),
}

_PULSE_KEYS: dict[str, _Key] = {
    "pulse_shape": _Key("square", _make_choice("square", "gaussian")),
    "omega": _Key(0.1, _make_float(nonneg=True), True),
    "duration": _Key(None, _make_opt_float(nonneg=True), True),
    "sigma": _Key(None, _make_opt_float(positive=True), True),
    "truncation": _Key(4.0, _make_float(positive=True), True),
    "t_start": _Key(0.0, _make_float(), True),
}

_THRESHOLD_KEYS: dict[str, _Key] = {
    "threshold_biexciton": _Key(0.1, _make_float(positive=True), True),
    "threshold_spectator": _Key(0.1, _make_float(positive=True), True),
}


def _schema(kind: str) -> dict[str, _Key]:
    if kind == "cphase":
        return {
            **_PAIR_KEYS, **_PULSE_KEYS, **_THRESHOLD_KEYS, **_INTEGRATOR_KEYS,
            "commensurate": _Key(False, _bool),
            "ratios": _Key(None, _make_float_list(positive=True)),
        }
    if kind == "zrot":
        return {
            **_PAIR_KEYS,
            "omega_a": _Key(2.0e3, _make_float(positive=True), True),
            **_PULSE_KEYS,
            "omega": _Key(1.0, _make_float(nonneg=True), True),
            **_INTEGRATOR_KEYS,
            "wait": _Key(0.5, _make_float(nonneg=True), True),
        }
    if kind == "raman":
        return {
            **_INTEGRATOR_KEYS,
            "rabi": _Key(1.33, _make_float(positive=True), True),
            "detuning": _Key(4.0, _make_float(nonzero=True), True),
            "gamma": _Key(0.1, _make_float(nonneg=True), True),
            "target_angle": _Key(math.pi, _make_float(positive=True), True),
            "time_window": _Key(None, _make_opt_float(positive=True), True),
            "detunings": _Key(None, _make_float_list(nonzero=True)),
            "gammas": _Key(None, _make_float_list(nonneg=True)),
        }
    if kind == "conditions":
        return {**_PAIR_KEYS, **_PULSE_KEYS, **_THRESHOLD_KEYS}
    if kind == "sweep":
        return {
            "sweep_kind": _Key("cphase", _make_choice("cphase", "zrot", "raman",
                                                      "conditions")),
            "sweep_param": _Key(_REQUIRED, _str),
            "sweep_values": _Key(_REQUIRED, _make_float_list()),
        }
    raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}")


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file, reporting parse errors with line numbers."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid JSON in {path}: line {e.lineno} column {e.colno}: {e.msg}"
        ) from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config root in {path} must be a JSON object")
    return raw


def apply_overrides(raw: dict[str, Any], overrides: tuple[str, ...]) -> dict[str, Any]:
    """Apply ``key=value`` strings on top of ``raw``; values parse as JSON
    when possible and fall back to bare strings."""
    out = dict(raw)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A validated, fully-defaulted experiment description."""

    kind: str
    values: Mapping[str, Any]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def dot_params(self) -> DotPairParams:
        try:
            return DotPairParams(self["omega_a"], self["v_f"], self["v_xx"])
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def integrator(self) -> IntegratorConfig:
        ms = self["max_step"]
        return IntegratorConfig(rtol=self["rtol"], atol=self["atol"],
                                max_step=math.inf if ms is None else ms,
                                sample_interval=self["sample_interval"])

    def _target_area(self) -> float:
        # bare-pulse area for each calibrated experiment
        if self.kind in ("cphase", "conditions"):
            return _TWO_PI * HBAR_MEV_PS / _SQRT2
        if self.kind == "zrot":
            return math.pi * HBAR_MEV_PS
        raise ConfigError(f"kind {self.kind!r} does not define a pulse")

    def envelope(self, omega: float | None = None) -> SquarePulse | GaussianPulse:
        """Resolve the pulse; ``omega`` overrides the configured peak (used
        by family runs)."""
        om = self["omega"] if omega is None else float(omega)
        shape = self["pulse_shape"]
        t_start = self["t_start"]
        if shape == "square":
            duration = self["duration"]
            if duration is None:
                if om <= 0:
                    raise ConfigError("omega must be > 0 to derive the pulse duration")
                duration = self._target_area() / om
                if self.kind == "cphase" and self.values.get("commensurate"):
                    duration = commensurate_gate_time(self.dot_params(), om)
            elif self.values.get("commensurate"):
                raise ConfigError("commensurate timing requires duration=null")
            return SquarePulse(amplitude=om, duration=duration, t_start=t_start)
        if self.values.get("commensurate"):
            raise ConfigError("commensurate timing applies to square pulses only")
        sigma = self["sigma"]
        trunc = self["truncation"]
        if sigma is None:
            if om <= 0:
                raise ConfigError("omega must be > 0 to derive the pulse width")
            probe = GaussianPulse(peak=om, sigma=1.0, center=0.0, truncation=trunc)
            sigma = self._target_area() / probe.area()
        return GaussianPulse(peak=om, sigma=sigma, center=t_start + trunc * sigma,
                             truncation=trunc)

    def zgate(self) -> ZGateParams:
        return ZGateParams(pulse=self.envelope(), wait=self["wait"])

    def raman_params(self, detuning: float | None = None,
                     gamma: float | None = None) -> RamanParams:
        try:
            return RamanParams(
                rabi=self["rabi"],
                detuning=self["detuning"] if detuning is None else float(detuning),
                gamma=self["gamma"] if gamma is None else float(gamma),
                target_angle=self["target_angle"],
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def sweep_children(self) -> list[tuple[float, "ExperimentConfig"]]:
        if self.kind != "sweep":
            raise ConfigError("sweep_children applies to sweep configs only")
        base = dict(self["child_base"])
        param = self["sweep_param"]
        out = []
        for v in self["sweep_values"]:
            child = build_config({**base, "kind": self["sweep_kind"], param: v})
            out.append((float(v), child))
        return out


def _validate_keys(raw: dict[str, Any], kind: str,
                   schema: dict[str, _Key]) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for key, val in raw.items():
        if key == "kind":
            continue
        if key not in schema:
            hint = difflib.get_close_matches(key, schema, n=1)
            extra = f"; did you mean {hint[0]!r}?" if hint else ""
            raise ConfigError(f"unknown config key {key!r} for kind {kind!r}{extra}")
        values[key] = schema[key].coerce(key, val)
    for key, entry in schema.items():
        if key not in values:
            if entry.default is _REQUIRED:
                raise ConfigError(f"key {key!r} is required for kind {kind!r}")
            values[key] = entry.default
    return values


def build_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a flat config dict and return an :class:`ExperimentConfig`.

    Unknown keys, type errors, and out-of-range values raise
    :class:`ConfigError`; resolvable physics objects (dot parameters,
    pulse, integrator) are constructed once so bad combinations fail here
    rather than mid-run.
    """
    raw = dict(raw)
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError("config must state its experiment 'kind'")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}")

    if kind == "sweep":
        schema = _schema("sweep")
        own = {k: v for k, v in raw.items() if k in schema or k == "kind"}
        child_raw = {k: v for k, v in raw.items() if k not in schema and k != "kind"}
        values = _validate_keys(own, "sweep", schema)
        child_kind = values["sweep_kind"]
        child_schema = _schema(child_kind)
        param = values["sweep_param"]
        if param not in child_schema:
            raise ConfigError(
                f"sweep_param {param!r} is not a config key of kind {child_kind!r}")
        if not child_schema[param].sweepable:
            raise ConfigError(f"sweep_param {param!r} is not a numeric, sweepable key")
        # validate the child base once up front
        base = _validate_keys({**child_raw, "kind": child_kind}, child_kind, child_schema)
        cfg = ExperimentConfig("sweep", {**values, "child_base": dict(child_raw)})
        del base
        return cfg

    schema = _schema(kind)
    values = _validate_keys(raw, kind, schema)
    cfg = ExperimentConfig(kind, values)
    # eager construction: surface parameter problems as ConfigError now
    if kind in ("cphase", "zrot", "conditions"):
        cfg.dot_params()
        cfg.envelope()
    if kind in ("cphase", "zrot", "raman"):
        cfg.integrator()
    if kind == "raman":
        cfg.raman_params()
    return cfg

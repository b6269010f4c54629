"""Experiment configuration: parsing, validation, canonical digests, presets.

Config files are line-oriented ``key = value`` text.  Angles are degrees at
this interface (radians internally), ``#`` starts a comment, unknown keys are
rejected.  The canonical serialization of a parsed config -- not the raw file
bytes -- feeds the digest, so cosmetic edits do not change a run's identity.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .core import SettingsPair
from .errors import ConfigError

MODEL_QUANTUM = "quantum"
MODEL_GISIN_GISIN = "gisin_gisin"
MODEL_DETERMINISTIC = "deterministic"

_PROBABILITY_FIELDS = (
    "arm_transmission_a",
    "arm_transmission_b",
    "detector_efficiency_a",
    "detector_efficiency_b",
    "dark_count_prob",
)

_MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulated run."""

    model: str
    alice_angles_deg: tuple[float, float]
    bob_angles_deg: tuple[float, float]
    n_trials: int
    seed: int = 0
    visibility: float = 1.0
    arm_transmission_a: float = 1.0
    arm_transmission_b: float = 1.0
    detector_efficiency_a: float = 1.0
    detector_efficiency_b: float = 1.0
    dark_count_prob: float = 0.0
    lhv_symmetric: bool = False
    deterministic_table: tuple[int, int, int, int] | None = field(default=None)

    def __post_init__(self):
        if self.model not in (MODEL_QUANTUM, MODEL_GISIN_GISIN, MODEL_DETERMINISTIC):
            raise ConfigError(
                f"model: must be one of quantum, gisin_gisin, deterministic:<table>, "
                f"got {self.model!r}"
            )
        if self.model == MODEL_DETERMINISTIC:
            t = self.deterministic_table
            if t is None or len(t) != 4 or any(o not in (+1, -1) for o in t):
                raise ConfigError(
                    "model: deterministic requires a table of four +1/-1 outputs "
                    "(a0,a1,b0,b1)"
                )
        elif self.deterministic_table is not None:
            raise ConfigError("deterministic_table: only valid with model = deterministic")
        for name in ("alice_angles_deg", "bob_angles_deg"):
            angles = getattr(self, name)
            if len(angles) != 2 or not all(math.isfinite(a) for a in angles):
                raise ConfigError(f"{name}: need two finite angles in degrees, got {angles!r}")
        if not isinstance(self.n_trials, int) or self.n_trials < 1:
            raise ConfigError(f"n_trials: must be an integer >= 1, got {self.n_trials!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed <= _MAX_SEED):
            raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (0.0 <= self.visibility <= 1.0):
            raise ConfigError(f"visibility: must be in [0, 1], got {self.visibility!r}")
        for name in _PROBABILITY_FIELDS:
            p = getattr(self, name)
            if not (isinstance(p, float) and 0.0 <= p <= 1.0):
                raise ConfigError(f"{name}: must be a probability in [0, 1], got {p!r}")

    @property
    def model_spec(self) -> str:
        """The model token as written in config files."""
        if self.model == MODEL_DETERMINISTIC:
            table = ",".join(f"{o:+d}" for o in self.deterministic_table)
            return f"deterministic:{table}"
        return self.model

    def settings_pair(self) -> SettingsPair:
        """The four analyzer angles converted to normalized radians."""
        return SettingsPair.from_degrees(self.alice_angles_deg, self.bob_angles_deg)

    def canonical_lines(self) -> list[str]:
        """Stable ``key = value`` serialization; the digest is taken over this."""

        def fmt(x: float) -> str:
            return repr(float(x))

        return [
            f"model = {self.model_spec}",
            f"alice_angles_deg = {fmt(self.alice_angles_deg[0])}, {fmt(self.alice_angles_deg[1])}",
            f"bob_angles_deg = {fmt(self.bob_angles_deg[0])}, {fmt(self.bob_angles_deg[1])}",
            f"visibility = {fmt(self.visibility)}",
            f"arm_transmission_a = {fmt(self.arm_transmission_a)}",
            f"arm_transmission_b = {fmt(self.arm_transmission_b)}",
            f"detector_efficiency_a = {fmt(self.detector_efficiency_a)}",
            f"detector_efficiency_b = {fmt(self.detector_efficiency_b)}",
            f"dark_count_prob = {fmt(self.dark_count_prob)}",
            f"lhv_symmetric = {'true' if self.lhv_symmetric else 'false'}",
            f"n_trials = {self.n_trials}",
            f"seed = {self.seed}",
        ]

    def digest(self) -> str:
        payload = "\n".join(self.canonical_lines()).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:12]

    def with_overrides(self, seed: int | None = None, n_trials: int | None = None) -> "ExperimentConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if n_trials is not None:
            cfg = replace(cfg, n_trials=n_trials)
        return cfg


def _parse_key_values(text: str, *, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _parse_float(key: str, value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: must be finite, got {value!r}")
    return x


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value, 10)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_bool(key: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _parse_angle_pair(key: str, value: str) -> tuple[float, float]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected two comma-separated angles in degrees, got {value!r}")
    return (_parse_float(key, parts[0]), _parse_float(key, parts[1]))


def _parse_model(value: str) -> tuple[str, tuple[int, int, int, int] | None]:
    if value in (MODEL_QUANTUM, MODEL_GISIN_GISIN):
        return value, None
    if value.startswith(MODEL_DETERMINISTIC + ":"):
        body = value.split(":", 1)[1]
        entries = [p.strip() for p in body.split(",")]
        try:
            table = tuple(int(p) for p in entries)
        except ValueError:
            raise ConfigError(f"model: bad deterministic table {body!r}") from None
        return MODEL_DETERMINISTIC, table
    raise ConfigError(
        f"model: must be quantum, gisin_gisin, or deterministic:<a0,a1,b0,b1>, got {value!r}"
    )


def config_from_mapping(pairs: dict[str, str], *, source: str = "<config>") -> ExperimentConfig:
    required = {"model", "alice_angles_deg", "bob_angles_deg", "n_trials"}
    missing = sorted(required - pairs.keys())
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(missing)}")

    known = required | {
        "seed",
        "visibility",
        "arm_transmission_a",
        "arm_transmission_b",
        "detector_efficiency_a",
        "detector_efficiency_b",
        "dark_count_prob",
        "lhv_symmetric",
    }
    unknown = sorted(pairs.keys() - known)
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")

    model, table = _parse_model(pairs["model"])
    kwargs = {
        "model": model,
        "deterministic_table": table,
        "alice_angles_deg": _parse_angle_pair("alice_angles_deg", pairs["alice_angles_deg"]),
        "bob_angles_deg": _parse_angle_pair("bob_angles_deg", pairs["bob_angles_deg"]),
        "n_trials": _parse_int("n_trials", pairs["n_trials"]),
    }
    if "seed" in pairs:
        kwargs["seed"] = _parse_int("seed", pairs["seed"])
    if "visibility" in pairs:
        kwargs["visibility"] = _parse_float("visibility", pairs["visibility"])
    if "lhv_symmetric" in pairs:
        kwargs["lhv_symmetric"] = _parse_bool("lhv_symmetric", pairs["lhv_symmetric"])
    for name in _PROBABILITY_FIELDS:
        if name in pairs:
            kwargs[name] = _parse_float(name, pairs[name])
    return ExperimentConfig(**kwargs)


def parse_config(text: str, *, source: str = "<config>") -> ExperimentConfig:
    return config_from_mapping(_parse_key_values(text, source=source), source=source)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def preset_names() -> list[str]:
    """Run presets shipped with the package (illustrative, not measured)."""
    pkg = resources.files("bellsim.presets")
    return sorted(p.name[: -len(".cfg")] for p in pkg.iterdir() if p.name.endswith(".cfg"))


def load_preset(name: str) -> ExperimentConfig:
    pkg = resources.files("bellsim.presets")
    candidate = pkg / f"{name}.cfg"
    if not candidate.is_file():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return parse_config(candidate.read_text(encoding="utf-8"), source=f"preset:{name}")


def preset_geometry_path(name: str) -> Path:
    """Filesystem path of a shipped geometry preset (.geom)."""
    pkg = resources.files("bellsim.presets")
    candidate = pkg / f"{name}.geom"
    if not candidate.is_file():
        available = sorted(
            p.name[: -len(".geom")] for p in pkg.iterdir() if p.name.endswith(".geom")
        )
        raise ConfigError(f"unknown geometry preset {name!r}; available: {', '.join(available)}")
    return Path(str(candidate))

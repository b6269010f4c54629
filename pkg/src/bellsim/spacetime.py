"""Lightcone audits of experiment geometry (1+1-dimensional, lab frame).

Stations sit on the line through the source; each station has a setting
choice that starts at one event and an output record that completes at a
later event.  A run is free of the locality loophole when each station's
choice is spacelike-separated from the other station's output completion.
The margin factor |dx| / (c |dt|) quantifies by how much; its reciprocal is
the deficit when the condition fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from .errors import GeometryError

#: Exact defined value, m/s.
SPEED_OF_LIGHT = 299_792_458.0

#: Relative tolerance inside which an interval is called lightlike.
LIGHTLIKE_RTOL = 1e-12

SPACELIKE = "spacelike"
LIGHTLIKE = "lightlike"
TIMELIKE = "timelike"

_FLOAT_FMT = "{:.9g}"


@dataclass(frozen=True)
class SpacetimeEvent:
    """Lab-frame event: time in seconds, position in meters along the axis."""

    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError(f"event coordinates must be finite, got t={self.t!r}, x={self.x!r}")


@dataclass(frozen=True)
class CausalVerdict:
    """Interval classification with the separation margin |dx| / (c |dt|)."""

    classification: Literal["spacelike", "lightlike", "timelike"]
    margin_factor: float
    degenerate: bool = False


def classify_interval(e1: SpacetimeEvent, e2: SpacetimeEvent) -> CausalVerdict:
    """Classify the interval between two events by the sign of (c dt)^2 - dx^2.

    The null interval (same event twice) is lightlike by convention, margin 1,
    flagged degenerate.  Simultaneous distant events have infinite margin.
    """
    dx = abs(e2.x - e1.x)
    cdt = SPEED_OF_LIGHT * abs(e2.t - e1.t)
    if dx == 0.0 and cdt == 0.0:
        return CausalVerdict(LIGHTLIKE, 1.0, degenerate=True)
    if abs(dx - cdt) <= LIGHTLIKE_RTOL * max(dx, cdt):
        return CausalVerdict(LIGHTLIKE, dx / cdt if cdt > 0.0 else 1.0)
    margin = dx / cdt if cdt > 0.0 else math.inf
    return CausalVerdict(SPACELIKE if dx > cdt else TIMELIKE, margin)


@dataclass(frozen=True)
class StationTimeline:
    """One station's choice-start and output-complete events.

    ``signal_speed_in_fiber`` is documentary only (it explains arrival times,
    never the verdict); ``station_extent`` is the allowed position spread
    between the two events of a finite-size station.
    """

    choice_start: SpacetimeEvent
    output_complete: SpacetimeEvent
    signal_speed_in_fiber: float | None = None
    station_extent: float = 0.0

    def __post_init__(self):
        if self.choice_start.t > self.output_complete.t:
            raise ValueError("choice_start must not be later than output_complete")
        if abs(self.choice_start.x - self.output_complete.x) > self.station_extent:
            raise ValueError(
                "choice and output events must share the station position "
                f"within extent {self.station_extent!r}"
            )
        u = self.signal_speed_in_fiber
        if u is not None and not (0.0 < u <= SPEED_OF_LIGHT):
            raise ValueError(f"fiber signal speed must be in (0, c], got {u!r}")


@dataclass(frozen=True)
class LightconeAuditReport:
    """Both cross checks of a two-station audit."""

    alice_choice_to_bob_output: CausalVerdict
    bob_choice_to_alice_output: CausalVerdict
    passed: bool
    min_margin_factor: float

    @property
    def deficit_factor(self) -> float:
        """Reciprocal of the worst margin; > 1 quantifies a failed audit."""
        m = self.min_margin_factor
        return math.inf if m == 0.0 else 1.0 / m

    def render(self) -> str:
        f = _FLOAT_FMT.format
        a, b = self.alice_choice_to_bob_output, self.bob_choice_to_alice_output
        lines = [
            "report = lightcone_audit",
            f"alice_choice_to_bob_output = {a.classification}",
            f"alice_choice_to_bob_output_margin = {f(a.margin_factor)}",
            f"bob_choice_to_alice_output = {b.classification}",
            f"bob_choice_to_alice_output_margin = {f(b.margin_factor)}",
            f"min_margin_factor = {f(self.min_margin_factor)}",
            f"verdict = {'pass' if self.passed else 'fail'}",
        ]
        return "\n".join(lines) + "\n"


def lightcone_audit(alice: StationTimeline, bob: StationTimeline) -> LightconeAuditReport:
    """Pass iff each station's choice start is spacelike-separated from the
    other station's output completion."""
    ab = classify_interval(alice.choice_start, bob.output_complete)
    ba = classify_interval(bob.choice_start, alice.output_complete)
    return LightconeAuditReport(
        alice_choice_to_bob_output=ab,
        bob_choice_to_alice_output=ba,
        passed=(ab.classification == SPACELIKE and ba.classification == SPACELIKE),
        min_margin_factor=min(ab.margin_factor, ba.margin_factor),
    )


# ---------------------------------------------------------------------------
# Geometry input files: key = value, positions in meters, times in seconds
# (plain numbers) or nanoseconds (trailing "ns").
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = tuple(
    f"{station}_{event}_{coord}"
    for station in ("alice", "bob")
    for event in ("choice", "output")
    for coord in ("t", "x")
)
_OPTIONAL_KEYS = ("fiber_speed", "station_extent")


def _parse_time(key: str, value: str) -> float:
    text = value.strip()
    scale = 1.0
    if text.endswith("ns"):
        text = text[: -len("ns")].strip()
        scale = 1e-9
    try:
        t = float(text) * scale
    except ValueError:
        raise GeometryError(f"{key}: expected seconds or '<n> ns', got {value!r}") from None
    if not math.isfinite(t):
        raise GeometryError(f"{key}: must be finite, got {value!r}")
    return t


def _parse_length(key: str, value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise GeometryError(f"{key}: expected meters, got {value!r}") from None
    if not math.isfinite(x):
        raise GeometryError(f"{key}: must be finite, got {value!r}")
    return x


def parse_geometry(text: str, *, source: str = "<geometry>") -> tuple[StationTimeline, StationTimeline]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GeometryError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise GeometryError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key in pairs:
            raise GeometryError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value

    missing = sorted(set(_REQUIRED_KEYS) - pairs.keys())
    if missing:
        raise GeometryError(f"{source}: missing required keys: {', '.join(missing)}")
    unknown = sorted(pairs.keys() - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
    if unknown:
        raise GeometryError(f"{source}: unknown keys: {', '.join(unknown)}")

    fiber = _parse_length("fiber_speed", pairs["fiber_speed"]) if "fiber_speed" in pairs else None
    extent = (
        _parse_length("station_extent", pairs["station_extent"])
        if "station_extent" in pairs
        else 0.0
    )

    def station(name: str) -> StationTimeline:
        try:
            return StationTimeline(
                choice_start=SpacetimeEvent(
                    t=_parse_time(f"{name}_choice_t", pairs[f"{name}_choice_t"]),
                    x=_parse_length(f"{name}_choice_x", pairs[f"{name}_choice_x"]),
                ),
                output_complete=SpacetimeEvent(
                    t=_parse_time(f"{name}_output_t", pairs[f"{name}_output_t"]),
                    x=_parse_length(f"{name}_output_x", pairs[f"{name}_output_x"]),
                ),
                signal_speed_in_fiber=fiber,
                station_extent=extent,
            )
        except ValueError as exc:
            raise GeometryError(f"{source}: station {name}: {exc}") from exc

    return station("alice"), station("bob")


def load_geometry(path: str | Path) -> tuple[StationTimeline, StationTimeline]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GeometryError(f"cannot read geometry file {path}: {exc}") from exc
    return parse_geometry(text, source=str(path))

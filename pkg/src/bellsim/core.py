"""Analytic predictions for the polarization singlet and the CHSH combination.

Conventions used throughout the package:

* Angles are plane polarization-analyzer angles, stored in radians.  All
  external interfaces (config files, CLI flags) speak degrees; ingest goes
  through :func:`angle_from_degrees`, which also normalizes to [0, pi) since
  polarization analyzers are pi-periodic.
* The two-channel correlator of the singlet under analyzers at ``alpha`` and
  ``beta`` is ``E = -v * cos 2(alpha - beta)``, with ``v`` the visibility
  (both analyzers measured with the same rotation sense).  Under this
  convention different placements of the minus sign in the CHSH combination
  give different values, so the combination is always evaluated for all four
  groupings and reports carry every one of them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

TWO_SQRT_TWO = 2.0 * math.sqrt(2.0)

#: Correlator labels in grouping order: E(a0,b0), E(a0,b1), E(a1,b0), E(a1,b1).
CORRELATOR_LABELS = ("e00", "e01", "e10", "e11")

# Index of the correlator sharing no setting index with each minus position;
# that partner joins the minus term in the |difference| of the combination.
_PARTNER = (3, 2, 1, 0)


class DegenerateSettingsWarning(UserWarning):
    """Emitted when a settings pair contains duplicate analyzer angles."""


def normalize_angle(radians: float) -> float:
    """Reduce an analyzer angle to [0, pi); analyzers are pi-periodic."""
    if not math.isfinite(radians):
        raise ValueError(f"angle must be finite, got {radians!r}")
    return radians % math.pi


def angle_from_degrees(degrees: float) -> float:
    """Convert a configuration angle (degrees) to normalized radians."""
    if not math.isfinite(degrees):
        raise ValueError(f"angle must be finite, got {degrees!r}")
    return normalize_angle(math.radians(degrees))


@dataclass(frozen=True)
class SettingsPair:
    """The four analyzer angles of a two-station run, in radians.

    ``alice`` holds (a0, a1), ``bob`` holds (b0, b1).  Duplicate angles are
    legal but degenerate (the four setting pairs stop being distinct), so
    they are flagged with :class:`DegenerateSettingsWarning`.
    """

    alice: tuple[float, float]
    bob: tuple[float, float]

    def __post_init__(self):
        angles = (*self.alice, *self.bob)
        for a in angles:
            if not math.isfinite(a):
                raise ValueError(f"settings angles must be finite, got {a!r}")
        if len({round(a, 15) for a in angles}) < 4:
            warnings.warn(
                "settings pair contains duplicate analyzer angles; the four "
                "setting pairs are not all distinct",
                DegenerateSettingsWarning,
                stacklevel=2,
            )

    @classmethod
    def from_degrees(cls, alice: tuple[float, float], bob: tuple[float, float]) -> "SettingsPair":
        return cls(
            alice=(angle_from_degrees(alice[0]), angle_from_degrees(alice[1])),
            bob=(angle_from_degrees(bob[0]), angle_from_degrees(bob[1])),
        )


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Probabilities of the four coincidence outcomes (+,+), (+,-), (-,+), (-,-)."""

    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    #: Absolute tolerance on the normalization sum (double precision).
    NORMALIZATION_TOL = 1e-12

    def __post_init__(self):
        for name, p in self.as_dict().items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {p!r}")
        total = self.p_pp + self.p_pm + self.p_mp + self.p_mm
        if abs(total - 1.0) > self.NORMALIZATION_TOL:
            raise ValueError(f"probabilities must sum to 1 within 1e-12, got {total!r}")

    def as_dict(self) -> dict[str, float]:
        return {"p_pp": self.p_pp, "p_pm": self.p_pm, "p_mp": self.p_mp, "p_mm": self.p_mm}

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_pp, self.p_pm, self.p_mp, self.p_mm)


def _check_visibility(v: float) -> None:
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"visibility must be in [0, 1], got {v!r}")


def singlet_joint_probabilities(alpha: float, beta: float, v: float = 1.0) -> JointOutcomeDistribution:
    """Joint outcome probabilities of the visibility-degraded singlet.

    At visibility 1 these are the Born-rule probabilities of the
    antisymmetric two-photon polarization state under analyzers at ``alpha``
    and ``beta`` (radians); the visibility enters as linear mixing of the
    correlator, leaving the uniform marginals untouched.
    """
    _check_visibility(v)
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("analyzer angles must be finite")
    c = v * math.cos(2.0 * (alpha - beta))
    anti = (1.0 + c) / 4.0
    corr = (1.0 - c) / 4.0
    return JointOutcomeDistribution(p_pp=corr, p_pm=anti, p_mp=anti, p_mm=corr)


def ideal_correlator(alpha: float, beta: float, v: float = 1.0) -> float:
    """Expectation of the +-1 outcome product: ``-v * cos 2(alpha - beta)``."""
    p = singlet_joint_probabilities(alpha, beta, v)
    return p.p_pp + p.p_mm - p.p_pm - p.p_mp


def _check_correlators(correlators: tuple[float, float, float, float]) -> None:
    for label, e in zip(CORRELATOR_LABELS, correlators):
        if not math.isfinite(e) or abs(e) > 1.0:
            raise ValueError(
                f"correlator {label} must lie in [-1, 1], got {e!r} "
                "(corrupted estimate upstream?)"
            )


def chsh_value(e00: float, e01: float, e10: float, e11: float, minus_position: int) -> float:
    """CHSH combination with the minus sign on the selected correlator.

    ``minus_position`` indexes (e00, e01, e10, e11).  The correlator sharing
    no setting index with the minus term joins it in the absolute difference;
    the remaining two form the absolute sum:

        S(k) = |E_partner(k) - E_k| + |E_i + E_j|
    """
    if minus_position not in (0, 1, 2, 3):
        raise ValueError(f"minus_position must be in 0..3, got {minus_position!r}")
    e = (e00, e01, e10, e11)
    _check_correlators(e)
    k = minus_position
    p = _PARTNER[k]
    i, j = (m for m in range(4) if m not in (k, p))
    return abs(e[p] - e[k]) + abs(e[i] + e[j])


def chsh_all_groupings(e00: float, e01: float, e10: float, e11: float) -> tuple[float, float, float, float]:
    """CHSH values for all four minus positions, in index order."""
    return tuple(chsh_value(e00, e01, e10, e11, k) for k in range(4))


def chsh_max_grouping(e00: float, e01: float, e10: float, e11: float) -> tuple[float, int]:
    """Maximum CHSH value over the four groupings and its minus position.

    Ties break toward the lowest index, which makes the result independent
    of any sign convention for the correlators.
    """
    values = chsh_all_groupings(e00, e01, e10, e11)
    best = max(values)
    return best, values.index(best)

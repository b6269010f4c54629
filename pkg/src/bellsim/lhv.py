"""Local-hidden-variable trial generators.

Two families live here:

* :class:`DeterministicStrategy` -- classical strategies that always answer
  and always detect.  Exhaustive enumeration over them (plus a shared random
  bit) realizes the classical CHSH bound of exactly 2.
* :class:`GisinGisinModel` -- a local model with setting-dependent detection
  on one side, in the style of Gisin & Gisin, Phys. Lett. A 260, 323 (1999).
  Post-selected on coincidences it reproduces the singlet correlator
  ``-cos 2(alpha - beta)`` exactly, so a fair-sampling analysis of its output
  violates the CHSH bound even though the model is local by construction.
  Counting every trial (non-detections as outcome 0) keeps it at or below 2.

Outcomes use the three-symbol alphabet {+1, -1, 0}, 0 meaning no detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .core import chsh_value

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per-setting output tables for both stations; detection always occurs."""

    alice_outputs: tuple[int, int]
    bob_outputs: tuple[int, int]

    def __post_init__(self):
        for side, outs in (("alice", self.alice_outputs), ("bob", self.bob_outputs)):
            if len(outs) != 2 or any(o not in (+1, -1) for o in outs):
                raise ValueError(f"{side}_outputs must be two values in {{+1, -1}}, got {outs!r}")

    def correlators(self) -> tuple[float, float, float, float]:
        """Exact correlators E(x, y) = a(x) * b(y), in (e00, e01, e10, e11) order."""
        return tuple(
            float(self.alice_outputs[x] * self.bob_outputs[y])
            for x in range(2)
            for y in range(2)
        )


def sample_deterministic_trial(
    strategy: DeterministicStrategy, alice_setting_index: int, bob_setting_index: int
) -> tuple[int, int]:
    """Read both outcomes from the strategy tables (no randomness, no losses)."""
    if alice_setting_index not in (0, 1) or bob_setting_index not in (0, 1):
        raise ValueError("setting indices must be 0 or 1")
    return (
        strategy.alice_outputs[alice_setting_index],
        strategy.bob_outputs[bob_setting_index],
    )


@dataclass(frozen=True)
class GisinGisinModel:
    """One-sided detection-loophole model over a hidden angle theta.

    Per trial, theta is uniform on [0, 2*pi).  Alice outputs
    ``sign(cos(theta - 2*alpha))`` and always detects; Bob outputs
    ``-sign(cos(theta - 2*beta))`` and detects with probability
    ``|cos(theta - 2*beta)|``.  Each station's response depends only on its
    own setting, theta, and local randomness.

    ``symmetric=True`` applies the same ``|cos|`` detection rule on Alice's
    side as well (Monte-Carlo-checked variant; the asymmetric form is the
    analytically transparent default).
    """

    symmetric: bool = False

    def sample(self, alice_setting: float, bob_setting: float, rng: np.random.Generator) -> tuple[int, int]:
        # Fixed draw layout (theta, alice detection, bob detection) keeps the
        # two stations' consumed randomness independent of the remote setting.
        u = rng.random(3)
        theta = TWO_PI * u[0]
        cos_a = math.cos(theta - 2.0 * alice_setting)
        cos_b = math.cos(theta - 2.0 * bob_setting)
        alice = 1 if cos_a >= 0.0 else -1
        if self.symmetric and not (u[1] < abs(cos_a)):
            alice = 0
        bob = -1 if cos_b >= 0.0 else 1
        if not (u[2] < abs(cos_b)):
            bob = 0
        return alice, bob


def sample_lhv_trial(
    model: GisinGisinModel,
    alice_setting: float,
    bob_setting: float,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Draw one trial from a detection-loophole model; 0 means no detection."""
    return model.sample(alice_setting, bob_setting, rng)


def iter_strategy_pairs():
    """All 256 pairs of per-station response functions over a shared random bit.

    Each station's strategy maps (own setting, shared bit) -> {+1, -1}; there
    are 16 such functions per side.  The diagonal where a strategy ignores the
    bit recovers the 16 pure deterministic strategy pairs, so enumerating all
    16 x 16 pairs covers every classical strategy, pure or one-bit-mixed.
    """
    for fa in product((+1, -1), repeat=4):
        for fb in product((+1, -1), repeat=4):
            yield fa, fb


def strategy_pair_correlators(fa, fb) -> tuple[float, float, float, float]:
    """Exact correlators of a response-function pair, averaged over the shared bit."""
    return tuple(
        0.5 * (fa[2 * x] * fb[2 * y] + fa[2 * x + 1] * fb[2 * y + 1])
        for x in range(2)
        for y in range(2)
    )


def enumerate_deterministic_chsh_bound(minus_position: int | None = None) -> float:
    """Maximum CHSH value over all 256 classical strategy pairs; exactly 2.

    With ``minus_position`` given, the maximum is taken over that single
    grouping only (it is still exactly 2: the all-plus strategy saturates
    every grouping).
    """
    groupings = range(4) if minus_position is None else (minus_position,)
    best = 0.0
    for fa, fb in iter_strategy_pairs():
        e = strategy_pair_correlators(fa, fb)
        for k in groupings:
            best = max(best, chsh_value(*e, minus_position=k))
    return best

"""Counting and estimation: counts tables, correlators, CHSH reports.

Two correlator estimators are provided for the same counts:

* ``fair_sampling_correlator`` -- coincidences only, the post-selected
  estimator normalized by detected pairs.  Valid under the fair-sampling
  assumption that detected pairs are an unbiased sample of all pairs.
* ``inclusive_correlator`` -- every valid trial counts; a non-detection
  enters the outcome product as 0 and the denominator counts all trials.
  This is the estimator a strictly local analysis must use.

On a log with no non-detections the two agree bitwise (identical integer
numerators and denominators).  Double-fire trials are excluded from both and
reported separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CORRELATOR_LABELS, chsh_all_groupings
from .errors import NoDataError
from .sim import EventLog

MODE_FAIR_SAMPLING = "fair_sampling"
MODE_INCLUSIVE = "inclusive"

#: Outcome-axis order of the 3x3 count matrices.
OUTCOME_ORDER = (+1, -1, 0)

_FLOAT_FMT = "{:.9g}"


@dataclass(frozen=True)
class CountsTable:
    """Per-setting-pair 3x3 outcome counts plus excluded double-fire counts.

    ``counts[2*x + y, i, j]`` is the number of valid trials with settings
    (x, y) and outcomes (OUTCOME_ORDER[i], OUTCOME_ORDER[j]).
    """

    counts: np.ndarray       # (4, 3, 3) int64
    double_fire: np.ndarray  # (4,) int64

    def __post_init__(self):
        if self.counts.shape != (4, 3, 3) or self.double_fire.shape != (4,):
            raise ValueError("counts must be (4,3,3) and double_fire (4,)")
        if (self.counts < 0).any() or (self.double_fire < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def n_trials(self) -> int:
        return int(self.counts.sum() + self.double_fire.sum())

    @property
    def n_excluded(self) -> int:
        return int(self.double_fire.sum())

    def pair_counts(self, alice_index: int, bob_index: int) -> np.ndarray:
        _check_pair(alice_index, bob_index)
        return self.counts[2 * alice_index + bob_index]


def _check_pair(alice_index: int, bob_index: int) -> None:
    if alice_index not in (0, 1) or bob_index not in (0, 1):
        raise ValueError(f"setting indices must be 0 or 1, got ({alice_index}, {bob_index})")


def tabulate(log: EventLog) -> CountsTable:
    """Count every trial into exactly one cell (or the exclusion bucket)."""
    pair = (log.a_set.astype(np.intp) << 1) | log.b_set
    # outcome +1 -> 0, -1 -> 1, 0 -> 2
    a_idx = (log.a_out != 1).astype(np.intp) + (log.a_out == 0)
    b_idx = (log.b_out != 1).astype(np.intp) + (log.b_out == 0)
    ok = log.valid == 0
    flat = (pair * 9 + a_idx * 3 + b_idx)[ok]
    counts = np.bincount(flat, minlength=36).reshape(4, 3, 3).astype(np.int64)
    double_fire = np.bincount(pair[~ok], minlength=4).astype(np.int64)
    return CountsTable(counts=counts, double_fire=double_fire)


@dataclass(frozen=True)
class CorrelatorEstimate:
    """A correlator estimate with its binomial-style standard error."""

    value: float
    stderr: float
    n_effective: int

    def __post_init__(self):
        if not (-1.0 <= self.value <= 1.0):
            raise ValueError(f"correlator estimate out of [-1, 1]: {self.value!r}")
        if self.stderr < 0.0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr!r}")
        if self.n_effective <= 0:
            raise ValueError("zero-denominator estimates are an error, not a value")


def _estimate(numerator: int, denominator: int) -> tuple[float, float]:
    value = numerator / denominator
    stderr = math.sqrt(max(0.0, 1.0 - value * value) / denominator)
    return value, stderr


def fair_sampling_correlator(table: CountsTable, setting_pair: tuple[int, int]) -> CorrelatorEstimate:
    """Coincidence-normalized correlator: (N++ + N-- - N+- - N-+) / N_coinc."""
    c = table.pair_counts(*setting_pair)
    n_same = int(c[0, 0] + c[1, 1])
    n_diff = int(c[0, 1] + c[1, 0])
    n_coinc = n_same + n_diff
    if n_coinc == 0:
        raise NoDataError(
            f"no coincidences for setting pair (a{setting_pair[0]}, b{setting_pair[1]})"
        )
    value, stderr = _estimate(n_same - n_diff, n_coinc)
    return CorrelatorEstimate(value=value, stderr=stderr, n_effective=n_coinc)


def inclusive_correlator(table: CountsTable, setting_pair: tuple[int, int]) -> CorrelatorEstimate:
    """All-events correlator: non-detections contribute product 0 and are
    counted in the denominator along with every other valid trial."""
    c = table.pair_counts(*setting_pair)
    n_same = int(c[0, 0] + c[1, 1])
    n_diff = int(c[0, 1] + c[1, 0])
    n_all = int(c.sum())
    if n_all == 0:
        raise NoDataError(
            f"no valid trials for setting pair (a{setting_pair[0]}, b{setting_pair[1]})"
        )
    value, stderr = _estimate(n_same - n_diff, n_all)
    return CorrelatorEstimate(value=value, stderr=stderr, n_effective=n_all)


_ESTIMATORS = {
    MODE_FAIR_SAMPLING: fair_sampling_correlator,
    MODE_INCLUSIVE: inclusive_correlator,
}


@dataclass(frozen=True)
class ChshReport:
    """CHSH values for all four groupings with propagated uncertainty."""

    mode: str
    config_digest: str | None
    correlators: tuple[CorrelatorEstimate, CorrelatorEstimate, CorrelatorEstimate, CorrelatorEstimate]
    s_by_grouping: tuple[float, float, float, float]
    s_max: float
    minus_position: int
    s_stderr: float
    sigma_excess: float
    n_excluded: int

    def render(self) -> str:
        """Stable key = value rendering (golden-file safe)."""
        f = _FLOAT_FMT.format
        lines = [
            "report = chsh",
            f"mode = {self.mode}",
            f"config_digest = {self.config_digest or 'unknown'}",
            f"excluded_double_fire = {self.n_excluded}",
        ]
        for label, est in zip(CORRELATOR_LABELS, self.correlators):
            lines.append(f"{label} = {f(est.value)}")
            lines.append(f"{label}_stderr = {f(est.stderr)}")
            lines.append(f"{label}_n = {est.n_effective}")
        for label, s in zip(CORRELATOR_LABELS, self.s_by_grouping):
            lines.append(f"s_minus_{label} = {f(s)}")
        lines.append(f"s_max = {f(self.s_max)}")
        lines.append(f"s_max_grouping = minus_{CORRELATOR_LABELS[self.minus_position]}")
        lines.append(f"s_stderr = {f(self.s_stderr)}")
        lines.append(f"sigma_excess = {f(self.sigma_excess)}")
        return "\n".join(lines) + "\n"


def chsh_report(table: CountsTable, mode: str, config_digest: str | None = None) -> ChshReport:
    """Estimate all four correlators and evaluate every CHSH grouping.

    The standard error of S is the root-sum-square of the four correlator
    standard errors (each correlator enters every grouping with unit weight);
    ``sigma_excess`` measures the violation of the classical bound 2.
    """
    try:
        estimator = _ESTIMATORS[mode]
    except KeyError:
        raise ValueError(f"mode must be one of {sorted(_ESTIMATORS)}, got {mode!r}") from None

    estimates = tuple(estimator(table, (x, y)) for x in range(2) for y in range(2))
    values = [e.value for e in estimates]
    s_all = chsh_all_groupings(*values)
    s_max = max(s_all)
    minus_position = s_all.index(s_max)
    s_stderr = math.sqrt(sum(e.stderr**2 for e in estimates))
    if s_stderr > 0.0:
        sigma_excess = (s_max - 2.0) / s_stderr
    elif s_max == 2.0:
        sigma_excess = 0.0
    else:
        sigma_excess = math.copysign(math.inf, s_max - 2.0)
    return ChshReport(
        mode=mode,
        config_digest=config_digest,
        correlators=estimates,
        s_by_grouping=s_all,
        s_max=s_max,
        minus_position=minus_position,
        s_stderr=s_stderr,
        sigma_excess=sigma_excess,
        n_excluded=table.n_excluded,
    )


def _two_sample_z(x1: int, n1: int, x2: int, n2: int) -> float:
    """z-score for a difference of two binomial proportions (pooled)."""
    p1, p2 = x1 / n1, x2 / n2
    pooled = (x1 + x2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if var <= 0.0:
        return 0.0 if p1 == p2 else math.inf
    return abs(p1 - p2) / math.sqrt(var)


def no_signaling_max_sigma(table: CountsTable) -> float:
    """Largest z-score for a station's outcome marginals depending on the
    remote setting; small values are the statistical face of locality."""
    worst = 0.0
    for own in range(2):
        # Alice: marginal over her outcomes, comparing Bob's settings.
        rows = [table.counts[2 * own + y].sum(axis=1) for y in range(2)]
        totals = [int(r.sum()) for r in rows]
        if all(totals):
            for o in range(3):
                worst = max(
                    worst, _two_sample_z(int(rows[0][o]), totals[0], int(rows[1][o]), totals[1])
                )
        # Bob: marginal over his outcomes, comparing Alice's settings.
        cols = [table.counts[2 * x + own].sum(axis=0) for x in range(2)]
        totals = [int(c.sum()) for c in cols]
        if all(totals):
            for o in range(3):
                worst = max(
                    worst, _two_sample_z(int(cols[0][o]), totals[0], int(cols[1][o]), totals[1])
                )
    return worst

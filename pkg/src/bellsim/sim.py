"""Trial-level Monte Carlo engine and event-log I/O.

The apparatus topology per trial: a pair source, one analyzer with a random
binary setting choice per station, two arms with transmission losses, and a
pair of detectors per station with finite efficiency and dark counts.  Each
side resolves to +1, -1, 0 (no detector fired) or a double fire (both
detectors on one side fired, a dark-count artifact; such trials are flagged
and excluded from all estimators).

Determinism contract: trials are partitioned into fixed-size chunks and each
chunk's random substream is derived from (seed, chunk_index) alone, so a
given (config, seed) produces a bit-identical log for any thread count and
either kernel backend.  One trial consumes one fixed row of 13 uniforms (see
``_kernels_py`` for the layout) whether or not the model uses every column.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import kernels
from .config import (
    MODEL_DETERMINISTIC,
    MODEL_GISIN_GISIN,
    MODEL_QUANTUM,
    ExperimentConfig,
)
from .core import singlet_joint_probabilities
from .errors import ConfigError, LogParseError

#: Trials per random substream; fixed, part of the reproducibility contract.
CHUNK_TRIALS = 1 << 16

#: Sentinel returned by :func:`resolve_detection` when both detectors fire.
DOUBLE_FIRE = 2

VALIDITY_OK = "ok"
VALIDITY_DOUBLE_FIRE = "double_fire"

_LOG_HEADER = "trial,a_set,b_set,a_out,b_out,valid"
_OUT_TOKEN = {1: "+1", -1: "-1", 0: "0"}
_VALID_TOKEN = ("ok", "dbl")


@dataclass(frozen=True)
class TrialRecord:
    """One trial of an event log."""

    trial_id: int
    alice_setting_index: int
    bob_setting_index: int
    alice_outcome: int
    bob_outcome: int
    validity: str


@dataclass
class EventLog:
    """Columnar event log: per-trial settings and outcomes plus a config header.

    Outcomes are {+1, -1, 0} with 0 = no detection; ``valid`` is 0 for an ok
    trial and 1 for a double fire (serialized ``ok``/``dbl``).
    """

    header: dict[str, str]
    a_set: np.ndarray
    b_set: np.ndarray
    a_out: np.ndarray
    b_out: np.ndarray
    valid: np.ndarray

    def __len__(self) -> int:
        return self.a_set.shape[0]

    @property
    def config_digest(self) -> str | None:
        return self.header.get("config_digest")

    def record(self, i: int) -> TrialRecord:
        return TrialRecord(
            trial_id=i,
            alice_setting_index=int(self.a_set[i]),
            bob_setting_index=int(self.b_set[i]),
            alice_outcome=int(self.a_out[i]),
            bob_outcome=int(self.b_out[i]),
            validity=VALIDITY_DOUBLE_FIRE if self.valid[i] else VALIDITY_OK,
        )

    def iter_records(self) -> Iterator[TrialRecord]:
        return (self.record(i) for i in range(len(self)))


def resolve_detection(channel: int, survival: float, dark_prob: float, rng: np.random.Generator) -> int:
    """Resolve one station's detection: +1, -1, 0, or :data:`DOUBLE_FIRE`.

    The photon routed to ``channel`` reaches its detector with probability
    ``survival``; either detector can additionally dark-fire with probability
    ``dark_prob``.  Both firing is a double fire; neither is outcome 0.
    """
    if channel not in (+1, -1):
        raise ValueError(f"channel must be +1 or -1, got {channel!r}")
    for name, p in (("survival", survival), ("dark_prob", dark_prob)):
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"{name} must be in [0, 1], got {p!r}")
    u = rng.random(3)
    survived = u[0] < survival
    plus = (survived and channel == +1) or (u[1] < dark_prob)
    minus = (survived and channel == -1) or (u[2] < dark_prob)
    if plus and minus:
        return DOUBLE_FIRE
    if plus:
        return +1
    if minus:
        return -1
    return 0


@dataclass(frozen=True)
class _RuntimeParams:
    """Kernel-ready view of a config (angles folded into threshold tables)."""

    model_id: int
    qcum: np.ndarray        # (4, 3) cumulative joint-outcome thresholds
    a_off: np.ndarray       # (2,) alice angles / pi
    b_off: np.ndarray       # (2,) bob angles / pi
    a_angles: np.ndarray    # (2,) radians
    b_angles: np.ndarray    # (2,) radians
    det_table: np.ndarray   # (4,) int8
    symmetric: bool
    trans_a: float
    trans_b: float
    eff_a: float
    eff_b: float
    dark: float


def _prepare_runtime(config: ExperimentConfig) -> _RuntimeParams:
    pair = config.settings_pair()
    a_angles = np.asarray(pair.alice, dtype=np.float64)
    b_angles = np.asarray(pair.bob, dtype=np.float64)

    qcum = np.zeros((4, 3), dtype=np.float64)
    det_table = np.zeros(4, dtype=np.int8)
    if config.model == MODEL_QUANTUM:
        model_id = kernels.MODEL_ID_QUANTUM
        for x in range(2):
            for y in range(2):
                p = singlet_joint_probabilities(a_angles[x], b_angles[y], config.visibility)
                qcum[2 * x + y, 0] = p.p_pp
                qcum[2 * x + y, 1] = p.p_pp + p.p_pm
                qcum[2 * x + y, 2] = p.p_pp + p.p_pm + p.p_mp
    elif config.model == MODEL_GISIN_GISIN:
        model_id = kernels.MODEL_ID_GISIN_GISIN
    elif config.model == MODEL_DETERMINISTIC:
        model_id = kernels.MODEL_ID_DETERMINISTIC
        det_table = np.asarray(config.deterministic_table, dtype=np.int8)
    else:  # pragma: no cover - ExperimentConfig already validates
        raise ConfigError(f"unknown model {config.model!r}")

    return _RuntimeParams(
        model_id=model_id,
        qcum=qcum,
        a_off=a_angles / math.pi,
        b_off=b_angles / math.pi,
        a_angles=a_angles,
        b_angles=b_angles,
        det_table=det_table,
        symmetric=config.lhv_symmetric,
        trans_a=config.arm_transmission_a,
        trans_b=config.arm_transmission_b,
        eff_a=config.detector_efficiency_a,
        eff_b=config.detector_efficiency_b,
        dark=config.dark_count_prob,
    )


def _chunk_uniforms(seed: int, chunk_index: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.PCG64(ss)).random((n, kernels.N_DRAW_COLS))


_EMPTY = np.zeros(0, dtype=np.float64)


def _model_thresholds(u: np.ndarray, rt: _RuntimeParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial detection thresholds needing transcendentals (hidden-angle model).

    Computed here with numpy for both kernel backends so they stay
    bit-identical; the setting-choice rule must match the kernels'.
    """
    if rt.model_id != kernels.MODEL_ID_GISIN_GISIN:
        return _EMPTY, _EMPTY
    theta = (2.0 * math.pi) * u[:, 2]
    b_sel = rt.b_angles[(u[:, 1] >= 0.5).astype(np.intp)]
    bthr = np.abs(np.cos(theta - 2.0 * b_sel))
    if rt.symmetric:
        a_sel = rt.a_angles[(u[:, 0] >= 0.5).astype(np.intp)]
        athr = np.abs(np.cos(theta - 2.0 * a_sel))
    else:
        athr = _EMPTY
    return athr, bthr


def _header_for(config: ExperimentConfig) -> dict[str, str]:
    header = {"config_digest": config.digest()}
    for line in config.canonical_lines():
        key, value = line.split(" = ", 1)
        header[key] = value
    return header


def run_experiment(
    config: ExperimentConfig,
    threads: int = 1,
    backend: str | None = None,
) -> EventLog:
    """Simulate ``config.n_trials`` trials; deterministic in (config, seed).

    ``threads`` caps worker threads without changing the output (chunk
    substreams depend only on the seed and chunk index); ``backend`` selects
    the kernel implementation, also without changing the output.
    """
    if not isinstance(threads, int) or threads < 1:
        raise ValueError(f"threads must be an integer >= 1, got {threads!r}")
    rt = _prepare_runtime(config)
    resolver = kernels.get_resolver(backend)
    n = config.n_trials

    a_set = np.empty(n, dtype=np.uint8)
    b_set = np.empty(n, dtype=np.uint8)
    a_out = np.empty(n, dtype=np.int8)
    b_out = np.empty(n, dtype=np.int8)
    valid = np.empty(n, dtype=np.uint8)

    def work(chunk_index: int) -> None:
        start = chunk_index * CHUNK_TRIALS
        size = min(CHUNK_TRIALS, n - start)
        u = _chunk_uniforms(config.seed, chunk_index, size)
        athr, bthr = _model_thresholds(u, rt)
        res = resolver(
            u,
            rt.model_id,
            rt.qcum,
            rt.a_off,
            rt.b_off,
            athr,
            bthr,
            rt.det_table,
            rt.symmetric,
            rt.trans_a,
            rt.trans_b,
            rt.eff_a,
            rt.eff_b,
            rt.dark,
        )
        sl = slice(start, start + size)
        a_set[sl], b_set[sl], a_out[sl], b_out[sl], valid[sl] = res

    n_chunks = (n + CHUNK_TRIALS - 1) // CHUNK_TRIALS
    if threads == 1 or n_chunks == 1:
        for c in range(n_chunks):
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # Consume the iterator to surface worker exceptions.
            list(pool.map(work, range(n_chunks)))

    return EventLog(
        header=_header_for(config),
        a_set=a_set,
        b_set=b_set,
        a_out=a_out,
        b_out=b_out,
        valid=valid,
    )


# ---------------------------------------------------------------------------
# Event-log file format
# ---------------------------------------------------------------------------

def event_log_to_text(log: EventLog) -> str:
    """Serialize a log: '#'-prefixed config header, then one CSV record per trial."""
    parts = ["# bellsim event log v1\n"]
    for key, value in log.header.items():
        parts.append(f"# {key} = {value}\n")
    parts.append(_LOG_HEADER + "\n")
    a_set = log.a_set.tolist()
    b_set = log.b_set.tolist()
    a_out = log.a_out.tolist()
    b_out = log.b_out.tolist()
    valid = log.valid.tolist()
    out_tok = _OUT_TOKEN
    val_tok = _VALID_TOKEN
    parts.extend(
        f"{i},{a},{b},{out_tok[ao]},{out_tok[bo]},{val_tok[v]}\n"
        for i, (a, b, ao, bo, v) in enumerate(zip(a_set, b_set, a_out, b_out, valid))
    )
    return "".join(parts)


def write_event_log(log: EventLog, path: str | Path) -> None:
    Path(path).write_text(event_log_to_text(log), encoding="utf-8")


def parse_event_log(text: str) -> EventLog:
    header: dict[str, str] = {}
    lines = text.splitlines()
    if not lines:
        raise LogParseError("empty event-log file")
    i = 0
    for i, line in enumerate(lines):
        if line.startswith("#"):
            body = line[1:].strip()
            if " = " in body:
                key, value = body.split(" = ", 1)
                header[key.strip()] = value.strip()
            continue
        break
    else:
        raise LogParseError("no record header line found")

    if lines[i].strip() != _LOG_HEADER:
        raise LogParseError(f"expected header {_LOG_HEADER!r}, got {lines[i]!r}", line_number=i + 1)

    records = lines[i + 1 :]
    n = len(records)
    a_set = np.empty(n, dtype=np.uint8)
    b_set = np.empty(n, dtype=np.uint8)
    a_out = np.empty(n, dtype=np.int8)
    b_out = np.empty(n, dtype=np.int8)
    valid = np.empty(n, dtype=np.uint8)

    count = 0
    for offset, line in enumerate(records):
        lineno = i + 2 + offset
        if not line.strip():
            if offset == n - 1:  # tolerate one trailing blank line
                continue
            raise LogParseError("blank record line", line_number=lineno)
        fields = line.split(",")
        if len(fields) != 6:
            raise LogParseError(f"expected 6 fields, got {len(fields)}", line_number=lineno)
        try:
            trial = int(fields[0])
            a_s = int(fields[1])
            b_s = int(fields[2])
            a_o = int(fields[3])
            b_o = int(fields[4])
        except ValueError as exc:
            raise LogParseError(str(exc), line_number=lineno) from None
        if trial != count:
            raise LogParseError(
                f"trial ids must increase from 0; expected {count}, got {trial}",
                line_number=lineno,
            )
        if a_s not in (0, 1) or b_s not in (0, 1):
            raise LogParseError(f"setting indices must be 0 or 1, got {a_s},{b_s}", line_number=lineno)
        if a_o not in (1, -1, 0) or b_o not in (1, -1, 0):
            raise LogParseError(f"outcomes must be +1, -1 or 0, got {a_o},{b_o}", line_number=lineno)
        token = fields[5].strip()
        if token == "ok":
            v = 0
        elif token == "dbl":
            v = 1
        else:
            raise LogParseError(f"validity must be 'ok' or 'dbl', got {token!r}", line_number=lineno)
        a_set[count] = a_s
        b_set[count] = b_s
        a_out[count] = a_o
        b_out[count] = b_o
        valid[count] = v
        count += 1

    return EventLog(
        header=header,
        a_set=a_set[:count],
        b_set=b_set[:count],
        a_out=a_out[:count],
        b_out=b_out[:count],
        valid=valid[:count],
    )


def read_event_log(path: str | Path) -> EventLog:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LogParseError(f"cannot read event log {path}: {exc}") from exc
    return parse_event_log(text)


def verify_header_digest(log: EventLog) -> bool | None:
    """Check the embedded digest against the embedded config; None if absent."""
    stated = log.header.get("config_digest")
    if stated is None:
        return None
    import hashlib

    lines = [f"{k} = {v}" for k, v in log.header.items() if k != "config_digest"]
    recomputed = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()[:12]
    return recomputed == stated

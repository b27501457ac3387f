"""Seeded synthetic students: latent traits, event logs and feature tables.

Each student gets a latent ability and engagement in [0, 1] (Beta(5, 2) and
Beta(2, 2) marginals tied by a Gaussian copula with correlation 0.5). Their
activity in the eTextbook is simulated as a sequence of timestamped events;
the feature row is tallied while the events are emitted, so it serves as an
independent expectation for :func:`edumine.ingest.build_feature_table`.

The exam score is
``100 * clamp(scale * (0.7 * ability + 0.25 * engagement) + offset)`` plus
Gaussian noise, clipped to [0, 100]. ``scale`` (0.6) keeps the top of the
class off the 100 ceiling; ``offset`` is solved per seed so that
``round(bad_fraction * n)`` students score at or below 65.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import List

import numpy as np
from scipy import stats

from .dataset import FeatureTable
from .errors import ContractError
from .ingest import EventKind, EventRecord, SessionRule
from .metrics import r_squared
from .schema import COLUMNS, PASS_THRESHOLD, FeatureRow


N_PE = 40
N_SE = 60
N_SS = 25
N_MODULES = 20
ABILITY_WEIGHT = 0.7
ENGAGEMENT_WEIGHT = 0.25
SCORE_SCALE = 0.6
PE_NOISE = 0.01
COPULA_RHO = 0.5
T0_MS = 1_580_000_000_000


@dataclass(frozen=True)
class SynthConfig:
    n_students: int = 200
    noise_sd: float = 1.2
    bad_fraction: float = 0.07
    seed: int = 0
    emit_events: bool = False
    missing_rows: int = 0

    def __post_init__(self):
        if self.n_students < 10:
            raise ContractError("n_students must be >= 10")
        if not 0 < self.bad_fraction < 0.5:
            raise ContractError("bad_fraction must lie in (0, 0.5)")
        if self.noise_sd < 0:
            raise ContractError("noise_sd must be >= 0")
        if not 0 <= self.missing_rows <= self.n_students:
            raise ContractError("missing_rows must lie in [0, n_students]")


@dataclass(frozen=True)
class GroundTruth:
    ability: np.ndarray
    engagement: np.ndarray
    ability_weight: float
    engagement_weight: float
    scale: float
    offset: float
    noise_sd: float
    seed: int

    def expected_etest(self):
        """Noise-free exam score implied by the latent traits."""
        score = self.scale * (
            self.ability_weight * self.ability + self.engagement_weight * self.engagement
        )
        return np.clip(100.0 * np.clip(score + self.offset, 0.0, 1.0), 0.0, 100.0)

    def to_dict(self):
        return {
            "ability": self.ability.tolist(),
            "engagement": self.engagement.tolist(),
            "ability_weight": self.ability_weight,
            "engagement_weight": self.engagement_weight,
            "scale": self.scale,
            "offset": self.offset,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["ability"], dtype=float),
            np.asarray(d["engagement"], dtype=float),
            float(d["ability_weight"]),
            float(d["engagement_weight"]),
            float(d["scale"]),
            float(d["offset"]),
            float(d["noise_sd"]),
            int(d["seed"]),
        )


def student_ids(n):
    width = max(4, len(str(n)))
    return [f"s{i:0{width}d}" for i in range(1, n + 1)]


def _latents(n, seed):
    rng = np.random.default_rng([seed, 0])
    cov = [[1.0, COPULA_RHO], [COPULA_RHO, 1.0]]
    z = rng.multivariate_normal([0.0, 0.0], cov, size=n, method="cholesky")
    u = stats.norm.cdf(z)
    ability = stats.beta.ppf(u[:, 0], 5, 2)
    engagement = stats.beta.ppf(u[:, 1], 2, 2)
    return ability, engagement


class _Timeline:
    """Emits one student's events and tallies time on task as it goes.

    Waits accumulate until the next event; the whole gap is then capped and
    credited to the content type of the event before it.
    """

    def __init__(self, sid, t0_ms, rule):
        self.sid = sid
        self.t = t0_ms
        self.rule = rule
        self.events = []
        self.times = {"pe": 0.0, "ss": 0.0, "other": 0.0}
        self._last = None
        self._gap = 0

    def emit(self, kind, obj="", attempt=None, hint=None, content="other"):
        if self._last is not None:
            self.times[self._last] += min(self._gap, self.rule.max_gap)
        self.events.append(EventRecord(self.sid, self.t, kind, obj, attempt, hint))
        self._last = content
        self._gap = 0

    def wait(self, seconds):
        seconds = int(seconds)
        self._gap += seconds
        self.t += seconds * 1000


_GAP_RANGE = {"pe": (20, 240), "ss": (5, 40), "other": (5, 90)}


def _simulate(sid, ability, engagement, rng, t0_ms, rule):
    """Simulate one student. Returns (events, FeatureRow without etest)."""
    a, e = ability, engagement
    tl = _Timeline(sid, t0_ms, rule)
    skill = ABILITY_WEIGHT * a + ENGAGEMENT_WEIGHT * e

    pe_done = int(np.rint(N_PE * np.clip(skill + rng.normal(0, PE_NOISE), 0, 1)))
    pe_open = int(rng.binomial(N_PE - pe_done, 0.4 * e))
    se_tried = int(np.rint(N_SE * np.clip(0.3 + 0.6 * e + rng.normal(0, 0.05), 0, 1)))
    ss_seen = int(np.rint(N_SS * np.clip(0.2 + 0.7 * e + rng.normal(0, 0.05), 0, 1)))
    modules = max(1, int(np.rint(N_MODULES * np.clip(0.5 + 0.5 * e, 0, 1))))

    tally = dict(pe_attempts=0, pe_reset=0, pe_model=0, ss_visit=0, se_attempts=0,
                 hints=0, gaming=0, se_correct=0)
    blocks = []

    pe_ids = rng.permutation(N_PE)[: pe_done + pe_open]
    for j, ex in enumerate(pe_ids):
        attempts = 1 + int(rng.poisson(2.0 * (1 - a)))
        resets = int(rng.poisson(1.2 * (1 - a)))
        models = int(rng.poisson(0.6 * (1 - a)))
        done = j < pe_done
        steps = [("pe_attempt", k) for k in range(attempts)]
        steps += [("pe_reset", None)] * resets + [("pe_model_answer", None)] * models
        order = rng.permutation(len(steps))
        steps = [steps[0]] + [steps[i] for i in order if i != 0]
        # attempts are emitted in counter order regardless of interleaving
        k = 0
        script = []
        for kind, _ in steps:
            if kind == "pe_attempt":
                script.append((EventKind.PE_ATTEMPT, k, None))
                k += 1
            elif kind == "pe_reset":
                script.append((EventKind.PE_RESET, None, None))
            else:
                script.append((EventKind.PE_MODEL_ANSWER, None, None))
        if done:
            script.append((EventKind.PE_COMPLETE, None, None))
        tally["pe_attempts"] += attempts
        tally["pe_reset"] += resets
        tally["pe_model"] += models
        blocks.append(("pe", f"pe{ex:02d}", script))

    ss_ids = rng.permutation(N_SS)[:ss_seen]
    for ss in ss_ids:
        for _ in range(1 + int(rng.poisson(1.0 * e))):
            n_steps = int(rng.integers(3, 11))
            script = [(EventKind.SLIDESHOW_LOAD, None, None)]
            script += [(EventKind.SLIDESHOW_STEP, None, None)] * n_steps
            tally["ss_visit"] += 1
            blocks.append(("ss", f"ss{ss:02d}", script))

    se_ids = rng.permutation(N_SE)[:se_tried]
    for q in se_ids:
        attempts = 1 + int(rng.poisson(1.5 * (1 - a)))
        hints = int(rng.poisson(1.0 * (1 - a)))
        correct = rng.random() < np.clip(0.4 + 0.6 * a, 0, 1)
        script = [(EventKind.SE_HINT, None, h) for h in range(hints)]
        script += [(EventKind.SE_ATTEMPT, k, None) for k in range(attempts)]
        if correct:
            script.append((EventKind.SE_CORRECT, None, None))
            tally["se_correct"] += 1
        tally["se_attempts"] += attempts
        tally["hints"] += hints
        blocks.append(("other", f"q{q:02d}", script))

    for m in range(modules):
        blocks.append(("other", f"mod{m:02d}", [(EventKind.MODULE_LOAD, None, None)]))
    for _ in range(int(rng.poisson(2 + 6 * (1 - e)))):
        blocks.append(("other", "page", [(EventKind.PAGE_RELOAD, None, None)]))
        tally["gaming"] += 1
    for _ in range(int(rng.poisson(2 * e))):
        blocks.append(("other", "gradebook", [(EventKind.GRADEBOOK_LOAD, None, None)]))
    for _ in range(int(rng.poisson(3))):
        blocks.append(("other", "menu", [(EventKind.NAVIGATION, None, None)]))

    order = rng.permutation(len(blocks))
    n_sessions = max(1, len(blocks) // 25)
    starts = rng.choice(np.arange(1, len(blocks)), size=n_sessions - 1, replace=False)
    breaks = set(starts.tolist())

    # think time after every scripted event, drawn in one go; an occasional
    # long pause tests the gap cap
    kinds = [blocks[b][0] for b in order for _ in blocks[b][2]]
    lo = np.array([_GAP_RANGE[c][0] for c in kinds], dtype=np.int64)
    hi = np.array([_GAP_RANGE[c][1] for c in kinds], dtype=np.int64)
    gaps = rng.integers(lo, hi)
    long_pause = rng.random(len(kinds)) < 0.02
    gaps[long_pause] = rng.integers(700, 5000, size=int(long_pause.sum()))
    gaps = gaps.tolist()

    first = True
    g = 0
    for pos, b in enumerate(order):
        content, obj, script = blocks[b]
        if pos == 0 or pos in breaks:
            if not first:
                tl.wait(rng.integers(3600, 3 * 86400))
            tl.emit(EventKind.AUTH)
            tl.wait(rng.integers(2, 20))
            first = False
        for kind, att, hint in script:
            tl.emit(kind, obj, att, hint, content)
            tl.wait(gaps[g])
            g += 1

    pe_t, ss_t, other_t = tl.times["pe"], tl.times["ss"], tl.times["other"]
    row = FeatureRow(
        PE_total_time=float(pe_t),
        PE_total_attempts=tally["pe_attempts"],
        PE_reset=tally["pe_reset"],
        PE_model=tally["pe_model"],
        PE_exercise=pe_done,
        SS_total_time=float(ss_t),
        SS_total_visit=tally["ss_visit"],
        slide=ss_seen,
        Interaction=len(tl.events),
        Total_time=float(pe_t + ss_t + other_t),
        Total_attempts=tally["se_attempts"],
        Total_hints=tally["hints"],
        gaming=tally["gaming"],
        exercise=pe_done + tally["se_correct"],
    )
    return tl.events, row


def _bad_count(score, noise, offset):
    etest = np.clip(100.0 * np.clip(score + offset, 0.0, 1.0) + noise, 0.0, 100.0)
    return int((etest <= PASS_THRESHOLD).sum())


def _calibrate_offset(score, noise, target):
    """Offset placing exactly ``target`` students at or below the threshold.

    The count is non-increasing in the offset; two bisections find the
    interval of offsets giving ``target`` and its midpoint is returned.
    """

    def first_at_most(k):
        lo, hi = -2.0, 2.0
        for _ in range(80):
            mid = (lo + hi) / 2
            if _bad_count(score, noise, mid) <= k:
                hi = mid
            else:
                lo = mid
        return hi

    upper = first_at_most(target - 1) if target > 0 else 2.0
    lower = first_at_most(target)
    return (lower + upper) / 2


def _simulate_all(cfg: SynthConfig, rule: SessionRule):
    n = cfg.n_students
    target = round(cfg.bad_fraction * n)
    if target < 1:
        raise ContractError(
            f"bad_fraction={cfg.bad_fraction} gives no bad students for n={n}"
        )
    ability, engagement = _latents(n, cfg.seed)
    ids = student_ids(n)
    events, rows = [], []
    for i, sid in enumerate(ids):
        rng = np.random.default_rng([cfg.seed, 1, i])
        start = T0_MS + int(rng.integers(0, 7 * 86400)) * 1000
        ev, row = _simulate(sid, ability[i], engagement[i], rng, start, rule)
        events.append(ev)
        rows.append(row)

    score = SCORE_SCALE * (ABILITY_WEIGHT * ability + ENGAGEMENT_WEIGHT * engagement)
    noise = np.random.default_rng([cfg.seed, 2]).normal(0.0, 1.0, size=n) * cfg.noise_sd
    offset = _calibrate_offset(score, noise, target)
    got = _bad_count(score, noise, offset)
    if abs(got - target) > 2:
        raise ContractError(
            f"cannot reach {target} bad students (got {got}); bad_fraction infeasible"
        )
    truth = GroundTruth(ability, engagement, ABILITY_WEIGHT, ENGAGEMENT_WEIGHT,
                        SCORE_SCALE, offset, cfg.noise_sd, cfg.seed)
    etest = np.clip(truth.expected_etest() + noise, 0.0, 100.0)
    rows = [replace(r, etest=float(v)) for r, v in zip(rows, etest)]
    return ids, rows, events, truth


def _blank_cells(values, cfg):
    if not cfg.missing_rows:
        return values
    rng = np.random.default_rng([cfg.seed, 3])
    values = values.copy()
    which = rng.choice(values.shape[0], size=cfg.missing_rows, replace=False)
    cols = rng.integers(len(COLUMNS), size=cfg.missing_rows)
    values[which, cols] = np.nan
    return values


def generate_dataset(cfg: SynthConfig = SynthConfig(), rule: SessionRule = SessionRule()):
    """Return ``(FeatureTable, GroundTruth)`` for ``cfg``.

    The table carries student ids. With ``cfg.missing_rows`` that many rows
    have one cell blanked, to exercise cleaning.
    """
    ids, rows, _, truth = _simulate_all(cfg, rule)
    table = FeatureTable.from_rows(rows, ids)
    return FeatureTable(_blank_cells(table.values, cfg), ids), truth


def generate_event_log(cfg: SynthConfig = SynthConfig(), rule: SessionRule = SessionRule()):
    """Return ``(events, expected_table, truth)``.

    Events of all students are merged in timestamp order (ties by student
    id). ``expected_table`` is what ingesting the log with ``rule`` and the
    returned grades must reproduce.
    """
    if not cfg.emit_events:
        raise ContractError("generate_event_log requires emit_events=True")
    ids, rows, events, truth = _simulate_all(cfg, rule)
    merged: List[EventRecord] = sorted(
        (ev for per in events for ev in per), key=lambda ev: (ev.timestamp, ev.student_id)
    )
    return merged, FeatureTable.from_rows(rows, ids), truth


def grades_of(table: FeatureTable):
    return {sid: float(v) for sid, v in zip(table.ids, table.etest) if not np.isnan(v)}


def oracle_r2(truth: GroundTruth, table: FeatureTable, warn_below=0.5) -> float:
    """R^2 of the noise-free generative scores against the table's etest.

    A value below ``warn_below`` usually means the truth and table come from
    different seeds; a warning is issued.
    """
    etest = table.etest
    if etest.size != truth.ability.size:
        raise ContractError("truth and table describe different numbers of students")
    keep = ~np.isnan(etest)
    r2 = r_squared(etest[keep], truth.expected_etest()[keep])
    if r2 < warn_below:
        warnings.warn(f"oracle R^2 is only {r2:.3f}; truth and table may not match")
    return r2


def scripted_events(student_id="s0001", t0_ms=T0_MS, step_s=60):
    """A fixed 12-event session, one event every ``step_s`` seconds.

    Two attempts on proficiency exercise ``A`` (counters 0 and 2), a reset
    and a model answer, three hints on question ``Q``, two page reloads and
    one slideshow viewed for one step, framed by a module load.
    """
    K = EventKind
    script = [
        (K.MODULE_LOAD, "m01", None, None),
        (K.PE_ATTEMPT, "A", 0, None),
        (K.PE_ATTEMPT, "A", 2, None),
        (K.PE_RESET, "A", None, None),
        (K.PE_MODEL_ANSWER, "A", None, None),
        (K.SE_HINT, "Q", None, 0),
        (K.SE_HINT, "Q", None, 1),
        (K.SE_HINT, "Q", None, 2),
        (K.PAGE_RELOAD, "m01", None, None),
        (K.PAGE_RELOAD, "m01", None, None),
        (K.SLIDESHOW_LOAD, "S1", None, None),
        (K.SLIDESHOW_STEP, "S1", None, None),
    ]
    return [
        EventRecord(student_id, t0_ms + i * step_s * 1000, kind, obj, att, hint)
        for i, (kind, obj, att, hint) in enumerate(script)
    ]

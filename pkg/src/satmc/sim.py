"""Monte Carlo cross-check by forward simulation of the race semantics.

Replications run in fixed-size batches, each with its own generator
spawned from the master seed, and all paths of a batch advance together
as numpy arrays. Batch statistics merge pairwise, so the estimate
depends only on the seed, the replication count and the batch size.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import norm

from .ctmc import Ctmc, RewardStructure
from .errors import ModelError
from .lang.csl import ProbQuery, RewardQuery, Until
from .lang.expr import Binary, Expr, evaluate
from .lang.parser import parse_expression, parse_property
from .lang.printer import format_property

BATCH_SIZE = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    replications: int = 100_000
    horizon: float = 1.0
    seed: int = 0
    confidence: float = 0.95
    batch_size: int = BATCH_SIZE

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not self.horizon >= 0 or math.isinf(self.horizon):
            raise ValueError("horizon must be finite and nonnegative")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")


@dataclass(frozen=True)
class Estimate:
    mean: float
    half_width: float
    replications: int
    seed: int
    confidence: float
    std: float = 0.0

    @property
    def ci_low(self) -> float:
        return self.mean - self.half_width

    @property
    def ci_high(self) -> float:
        return self.mean + self.half_width

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def at_confidence(self, confidence: float) -> "Estimate":
        """Same sample, interval recomputed at another confidence level."""
        hw = _z(confidence) * self.std / math.sqrt(self.replications)
        return Estimate(self.mean, hw, self.replications, self.seed, confidence, self.std)

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(
            self.mean * factor, self.half_width * abs(factor), self.replications, self.seed, self.confidence,
            self.std * abs(factor),
        )


def _z(confidence: float) -> float:
    return float(norm.ppf(0.5 + confidence / 2))


@dataclass(frozen=True)
class Trajectory:
    """Entry times and visited states; the last segment lasts until ``horizon``."""

    times: np.ndarray
    states: np.ndarray
    actions: tuple[str | None, ...]
    horizon: float

    def sojourns(self) -> np.ndarray:
        return np.diff(np.append(self.times, self.horizon))


class _JumpTable:
    """Transitions grouped by source with cumulative selection probabilities."""

    def __init__(self, c: Ctmc) -> None:
        order = np.lexsort((np.arange(len(c.src)), c.src))
        self.src = c.src[order]
        self.dst = c.dst[order]
        self.order = order
        self.exits = c.exit_rates
        cum = np.zeros(len(order))
        for s in np.unique(self.src):
            rows = np.flatnonzero(self.src == s)
            p = np.cumsum(c.rate[order][rows]) / self.exits[s]
            p[-1] = 1.0
            cum[rows] = p
        # one sorted key per slot: state index plus cumulative probability
        self.keys = self.src + cum

    def choose(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Slot index of the transition taken from each state given uniforms ``u``."""
        return np.searchsorted(self.keys, states + u, side="right")


def simulate_path(c: Ctmc, horizon: float, seed: int = 0, max_jumps: int = 10**7) -> Trajectory:
    """One trajectory up to ``horizon`` (absorbing states end it early)."""
    if not horizon >= 0:
        raise ValueError("horizon must be nonnegative")
    rng = np.random.default_rng(seed)
    table = _JumpTable(c)
    s, t = c.initial, 0.0
    times, states, actions = [0.0], [s], []
    for _ in range(max_jumps):
        e = table.exits[s]
        if e == 0:
            break
        t += rng.exponential() / e
        if t >= horizon:
            break
        slot = int(table.choose(np.array([s]), rng.random(1))[0])
        s = int(table.dst[slot])
        times.append(t)
        states.append(s)
        actions.append(c.actions[table.order[slot]])
    else:
        raise ModelError(f"more than {max_jumps} jumps before the horizon")
    return Trajectory(np.array(times), np.array(states, dtype=np.int64), tuple(actions), horizon)


# -- batched simulation -----------------------------------------------------------


def _run_batch(c, table, size, horizon, rng, *, target=None, avoid=None, at_time=False, reward=None):
    """Per-replication outcome for one batch.

    ``target`` without ``at_time``: 1 if the target is hit by ``horizon``
    before any ``avoid`` state. With ``at_time``: indicator of the state
    occupied at ``horizon``. ``reward``: accumulated (state, transition)
    reward values.
    """
    state = np.full(size, c.initial, dtype=np.int64)
    clock = np.zeros(size)
    out = np.zeros(size)
    alive = np.ones(size, dtype=bool)
    reach = target is not None and not at_time
    if reach:
        out[target[state]] = 1.0
        alive &= ~target[state]
        if avoid is not None:
            alive &= ~avoid[state]
    if reward is not None:
        state_reward, slot_reward = reward
    while True:
        idx = np.flatnonzero(alive)
        if len(idx) == 0:
            break
        s = state[idx]
        e = table.exits[s]
        draw = rng.standard_exponential(len(idx))
        dwell = np.divide(draw, e, out=np.full(len(idx), np.inf), where=e > 0)
        remaining = horizon - clock[idx]
        finished = dwell >= remaining
        if reward is not None:
            out[idx] += state_reward[s] * np.minimum(dwell, remaining)
        if at_time:
            done = idx[finished]
            out[done] = target[state[done]]
        alive[idx[finished]] = False
        move = idx[~finished]
        if len(move) == 0:
            continue
        slot = table.choose(state[move], rng.random(len(move)))
        if reward is not None:
            out[move] += slot_reward[slot]
        nxt = table.dst[slot]
        state[move] = nxt
        clock[move] += dwell[~finished]
        if reach:
            hit = target[nxt]
            out[move[hit]] = 1.0
            stop = hit if avoid is None else hit | avoid[nxt]
            alive[move[stop]] = False
    return out


def _simulate(c: Ctmc, cfg: SimConfig, **kwargs) -> Estimate:
    table = _JumpTable(c)
    if "reward" in kwargs and kwargs["reward"] is not None:
        rs: RewardStructure = kwargs["reward"]
        kwargs["reward"] = (np.asarray(rs.state_reward, dtype=float), rs.transition_values(c)[table.order])
    n_batches = -(-cfg.replications // cfg.batch_size)
    streams = np.random.SeedSequence(cfg.seed).spawn(n_batches)
    count, mean, m2 = 0, 0.0, 0.0
    for b, ss in enumerate(streams):
        size = min(cfg.batch_size, cfg.replications - b * cfg.batch_size)
        x = _run_batch(c, table, size, cfg.horizon, np.random.default_rng(ss), **kwargs)
        bm = float(x.mean())
        bm2 = float(((x - bm) ** 2).sum())
        # pairwise merge of running moments
        delta = bm - mean
        total = count + size
        mean += delta * size / total
        m2 += bm2 + delta * delta * count * size / total
        count = total
    std = math.sqrt(m2 / (count - 1)) if count > 1 else 0.0
    hw = _z(cfg.confidence) * std / math.sqrt(count)
    return Estimate(mean, hw, count, cfg.seed, cfg.confidence, std)


def _mask(c: Ctmc, phi) -> np.ndarray:
    if isinstance(phi, np.ndarray):
        return phi.astype(bool)
    expr = parse_expression(phi) if isinstance(phi, str) else phi
    return c.evaluate(expr).astype(bool)


def estimate_transient(c: Ctmc, target, cfg: SimConfig, mode: str = "reach", avoid=None) -> Estimate:
    """Probability of hitting ``target`` by the horizon (``mode="reach"``,
    target absorbing) or of occupying it at the horizon (``mode="at"``).
    ``avoid`` states end a reach path unsuccessfully.
    """
    if mode not in ("reach", "at"):
        raise ValueError("mode must be 'reach' or 'at'")
    mask = _mask(c, target)
    avoid_mask = None if avoid is None else _mask(c, avoid)
    return _simulate(c, cfg, target=mask, avoid=avoid_mask, at_time=(mode == "at"))


def estimate_cumulative_reward(c: Ctmc, rs: RewardStructure | str | None, cfg: SimConfig) -> Estimate:
    if not isinstance(rs, RewardStructure):
        rs = c.reward(rs)
    return _simulate(c, cfg, reward=rs)


def estimate_query(c: Ctmc, query: str | Expr, cfg: SimConfig) -> Estimate:
    """Estimate ``P=?[phi1 U<=t phi2]`` (``F`` included), ``R=?[C<=t]``, or
    either divided or multiplied by a constant. ``cfg.horizon`` is ignored;
    the time bound comes from the query.
    """
    expr = parse_property(query) if isinstance(query, str) else query
    factor = 1.0
    if isinstance(expr, Binary) and expr.op in ("/", "*"):
        k = float(evaluate(expr.right, c.constants))
        factor = 1.0 / k if expr.op == "/" else k
        expr = expr.left
    if isinstance(expr, ProbQuery) and expr.bound is None and isinstance(expr.path, Until):
        path = expr.path
        lower = float(evaluate(path.interval.lower, c.constants))
        if lower != 0 or path.interval.upper is None:
            raise ModelError("simulation supports only time-bounded until with lower bound 0")
        t = float(evaluate(path.interval.upper, c.constants))
        left, right = _mask(c, path.left), _mask(c, path.right)
        est = estimate_transient(c, right, _with_horizon(cfg, t), "reach", avoid=~left & ~right)
    elif isinstance(expr, RewardQuery) and expr.bound is None:
        t = float(evaluate(expr.time, c.constants))
        est = estimate_cumulative_reward(c, expr.name, _with_horizon(cfg, t))
    else:
        raise ModelError(f"cannot simulate {format_property(expr)!r}")
    return est.scaled(factor) if factor != 1.0 else est


def _with_horizon(cfg: SimConfig, t: float) -> SimConfig:
    return SimConfig(cfg.replications, t, cfg.seed, cfg.confidence, cfg.batch_size)


def estimates_csv(rows: Iterable[tuple[str, Estimate]], digits: int = 6) -> str:
    """Rows ``query,estimate,ci_low,ci_high,replications,seed``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query", "estimate", "ci_low", "ci_high", "replications", "seed"])
    for query, e in rows:
        writer.writerow(
            [query, f"{e.mean:.{digits}g}", f"{e.ci_low:.{digits}g}", f"{e.ci_high:.{digits}g}", e.replications, e.seed]
        )
    return buf.getvalue()

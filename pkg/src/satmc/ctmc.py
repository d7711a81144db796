"""Explicit continuous-time Markov chains built from guarded-command models."""

from __future__ import annotations

import itertools
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ModelError, StateSpaceError
from .lang.ast import ModelAst
from .lang.binding import bind_constants
from .lang.expr import Expr, LabelRef, evaluate

DEFAULT_MAX_STATES = 10**7


class DeadlockWarning(UserWarning):
    """Some reachable states have no outgoing transitions; they are treated as absorbing."""


@dataclass(frozen=True)
class Transition:
    src: int
    dst: int
    rate: float
    action: str | None


@dataclass(eq=False)
class Ctmc:
    """Explicit CTMC: states, initial state, rate matrix and labelling.

    ``states`` holds one row per state with the value of every variable
    (columns ordered as ``variables``). Transitions are kept per
    ``(src, dst, action)`` so that action-based rewards bind precisely;
    ``rates`` is their sum per state pair and may contain self-loops.
    """

    variables: tuple[str, ...]
    states: np.ndarray
    initial: int
    src: np.ndarray
    dst: np.ndarray
    rate: np.ndarray
    actions: tuple[str | None, ...]
    labels: Mapping[str, Expr] = field(default_factory=dict)
    constants: Mapping[str, Any] = field(default_factory=dict)
    rewards: Mapping[str, "RewardStructure"] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.states)
        self.rates = sp.csr_matrix((self.rate, (self.src, self.dst)), shape=(n, n))
        self.rates.sum_duplicates()
        self.exit_rates = np.asarray(self.rates.sum(axis=1)).ravel()

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_transitions(self) -> int:
        return len(self.rate)

    @property
    def transitions(self) -> list[Transition]:
        return [
            Transition(int(s), int(d), float(r), a)
            for s, d, r, a in zip(self.src, self.dst, self.rate, self.actions)
        ]

    @property
    def absorbing(self) -> np.ndarray:
        return self.exit_rates == 0

    def valuation(self, index: int) -> dict[str, int]:
        return {name: int(v) for name, v in zip(self.variables, self.states[index])}

    def index_of(self, **valuation: int) -> int:
        row = np.array([valuation[name] for name in self.variables])
        hits = np.flatnonzero((self.states == row).all(axis=1))
        if len(hits) == 0:
            raise KeyError(valuation)
        return int(hits[0])

    def env(self) -> dict[str, Any]:
        env = dict(self.constants)
        for j, name in enumerate(self.variables):
            env[name] = self.states[:, j]
        return env

    def evaluate(self, expr: Expr, extension=None) -> np.ndarray:
        """Value of ``expr`` in every state (labels are resolved lazily)."""
        value = evaluate(expr, self.env(), self.labels, extension)
        return np.broadcast_to(np.asarray(value), (self.num_states,)).copy()

    def satisfying(self, expr: Expr | str) -> np.ndarray:
        if isinstance(expr, str):
            from .lang.parser import parse_expression

            expr = parse_expression(expr)
        return self.evaluate(expr).astype(bool)

    def label(self, name: str) -> np.ndarray:
        return self.satisfying(LabelRef(name))

    def reward(self, name: str | None) -> "RewardStructure":
        if name is None:
            if not self.rewards:
                raise ModelError("model has no reward structures")
            return next(iter(self.rewards.values()))
        try:
            return self.rewards[name]
        except KeyError:
            raise ModelError(f"unknown reward structure {name!r}") from None

    def restrict(self, keep: np.ndarray) -> "Ctmc":
        """Copy in which only transitions whose mask entry is True remain."""
        keep = np.asarray(keep, dtype=bool)
        return Ctmc(
            self.variables,
            self.states,
            self.initial,
            self.src[keep],
            self.dst[keep],
            self.rate[keep],
            tuple(a for a, k in zip(self.actions, keep) if k),
            self.labels,
            self.constants,
            self.rewards,
        )

    def make_absorbing(self, mask: np.ndarray) -> "Ctmc":
        """Copy with every outgoing transition of the masked states removed."""
        mask = np.asarray(mask, dtype=bool)
        return self.restrict(~mask[self.src])

    def scaled(self, factor: float) -> "Ctmc":
        """Copy with every rate multiplied by ``factor`` (rewards unchanged)."""
        return Ctmc(
            self.variables,
            self.states,
            self.initial,
            self.src,
            self.dst,
            self.rate * factor,
            self.actions,
            self.labels,
            self.constants,
            self.rewards,
        )

    @classmethod
    def from_rates(
        cls,
        transitions: Iterable[tuple],
        num_states: int | None = None,
        initial: int = 0,
        labels: Mapping[str, Expr] | None = None,
    ) -> "Ctmc":
        """Chain over a single variable ``s`` from ``(src, dst, rate[, action])`` tuples."""
        rows = [tuple(t) + (None,) * (4 - len(t)) for t in transitions]
        if num_states is None:
            num_states = 1 + max([max(r[0], r[1]) for r in rows], default=0)
        src = np.array([r[0] for r in rows], dtype=np.int64)
        dst = np.array([r[1] for r in rows], dtype=np.int64)
        rate = np.array([r[2] for r in rows], dtype=float)
        if np.any(rate <= 0):
            raise ModelError("rates must be positive")
        return cls(
            ("s",),
            np.arange(num_states, dtype=np.int64).reshape(-1, 1),
            initial,
            src,
            dst,
            rate,
            tuple(r[3] for r in rows),
            dict(labels or {}),
        )


@dataclass
class RewardStructure:
    """State rewards accrue per unit time, transition rewards per firing."""

    name: str
    state_reward: np.ndarray
    transition_reward: dict[tuple[int, int, str | None], float] = field(default_factory=dict)

    def transition_values(self, c: Ctmc) -> np.ndarray:
        """Reward of each transition of ``c`` in storage order."""
        return np.array(
            [self.transition_reward.get((int(s), int(d), a), 0.0) for s, d, a in zip(c.src, c.dst, c.actions)],
            dtype=float,
        )

    def rate_vector(self, c: Ctmc) -> np.ndarray:
        """Expected reward earned per unit time in each state."""
        out = np.asarray(self.state_reward, dtype=float).copy()
        if self.transition_reward:
            np.add.at(out, c.src, c.rate * self.transition_values(c))
        return out


def exit_rate(c: Ctmc, s: int) -> float:
    return float(c.exit_rates[s])


def jump_probability(c: Ctmc, s: int, t: int) -> float:
    """Probability that the next jump out of ``s`` lands in ``t`` (0 if ``s`` is absorbing)."""
    total = c.exit_rates[s]
    if total == 0:
        return 0.0
    return float(c.rates[s, t] / total)


def timed_jump_probability(c: Ctmc, s: int, t: int, time: float) -> float:
    """Probability that ``s -> t`` wins the race within ``time``."""
    if time < 0:
        raise ValueError("time must be nonnegative")
    total = c.exit_rates[s]
    if total == 0 or time == 0:
        return 0.0
    return float(c.rates[s, t] / total * -math.expm1(-total * time))


def embedded_matrix(c: Ctmc) -> sp.csr_matrix:
    inv = np.divide(1.0, c.exit_rates, out=np.zeros_like(c.exit_rates), where=c.exit_rates > 0)
    return sp.diags(inv) @ c.rates


# -- state-space construction ---------------------------------------------


def _int(value, what: str, loc) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not float(value).is_integer()):
        raise ModelError(f"{what} must be an integer, got {value!r}", *_where(loc))
    return int(value)


def _where(loc) -> tuple:
    return () if loc is None else (loc.line, loc.column)


def build_state_space(
    ast: ModelAst,
    constants: Mapping[str, Any] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> Ctmc:
    """Explore the reachable states breadth-first and compile rewards.

    Unlabelled commands interleave; commands sharing an action label
    across modules fire together with the product of their rates. Rates
    of transitions with the same source, target and action add up.
    """
    if constants is not None or not ast.is_bound:
        ast = bind_constants(ast, constants)
    const_values = {c.name: c.value.value for c in ast.constants}

    variables = ast.variables
    names = tuple(v.name for v in variables)
    position = {name: i for i, name in enumerate(names)}
    ranges = [(v.low.value, v.high.value) for v in variables]
    init = tuple(_int(v.init.value, f"initial value of {v.name}", v.loc) for v in variables)

    # per-module command tables
    unlabelled = []
    by_action: dict[str, list[list]] = {}
    for m in ast.modules:
        for cmd in m.commands:
            if cmd.action is None:
                unlabelled.append(cmd)
        for action in sorted(m.alphabet):
            by_action.setdefault(action, []).append([c for c in m.commands if c.action == action])

    def env_of(state: tuple) -> dict:
        env = dict(const_values)
        env.update(zip(names, state))
        return env

    def rate_of(cmd, upd, env) -> float:
        r = evaluate(upd.rate, env)
        if isinstance(r, bool) or not (r > 0 and math.isfinite(r)):
            raise ModelError(f"rate evaluates to {r!r} (must be positive and finite)", *_where(cmd.loc))
        return float(r)

    def apply(state: tuple, env: dict, pairs) -> tuple:
        new = list(state)
        for cmd, upd in pairs:
            for name, e in upd.assignments:
                value = _int(evaluate(e, env), f"update of {name}", cmd.loc)
                lo, hi = ranges[position[name]]
                if not lo <= value <= hi:
                    line = "" if cmd.loc is None else f" (command at line {cmd.loc.line})"
                    raise StateSpaceError(
                        f"update sets {name}={value} outside its range [{lo}..{hi}]{line}", *_where(cmd.loc)
                    )
                new[position[name]] = value
        return tuple(new)

    def enabled(cmds, env):
        return [c for c in cmds if evaluate(c.guard, env)]

    index: dict[tuple, int] = {init: 0}
    order: list[tuple] = [init]
    queue = deque([init])
    aggregated: dict[tuple[int, int, str | None], float] = {}

    def add(src: int, target: tuple, rate: float, action: str | None) -> None:
        dst = index.get(target)
        if dst is None:
            if len(order) >= max_states:
                raise StateSpaceError(f"state space exceeds the cap of {max_states} states ({len(order)} explored)")
            dst = len(order)
            index[target] = dst
            order.append(target)
            queue.append(target)
        key = (src, dst, action)
        aggregated[key] = aggregated.get(key, 0.0) + rate

    while queue:
        state = queue.popleft()
        src = index[state]
        env = env_of(state)
        for cmd in enabled(unlabelled, env):
            for upd in cmd.updates:
                add(src, apply(state, env, [(cmd, upd)]), rate_of(cmd, upd, env), None)
        for action, per_module in by_action.items():
            choices = []
            for cmds in per_module:
                active = enabled(cmds, env)
                if not active:
                    break
                choices.append([(c, u) for c in active for u in c.updates])
            else:
                for combo in itertools.product(*choices):
                    rate = 1.0
                    for cmd, upd in combo:
                        rate *= rate_of(cmd, upd, env)
                    add(src, apply(state, env, combo), rate, action)

    keys = list(aggregated)
    c = Ctmc(
        names,
        np.array(order, dtype=np.int64).reshape(len(order), len(names)),
        0,
        np.array([k[0] for k in keys], dtype=np.int64),
        np.array([k[1] for k in keys], dtype=np.int64),
        np.array([aggregated[k] for k in keys], dtype=float),
        tuple(k[2] for k in keys),
        {label.name: label.expr for label in ast.labels},
        const_values,
    )
    dead = np.flatnonzero(c.absorbing)
    if len(dead):
        warnings.warn(f"{len(dead)} deadlock state(s) treated as absorbing (first: {c.valuation(dead[0])})", DeadlockWarning, stacklevel=2)
    c.rewards = {rs.name: compile_reward(c, rs) for rs in ast.rewards}
    return c


def compile_reward(c: Ctmc, decl) -> RewardStructure:
    state_reward = np.zeros(c.num_states)
    per_action: list = []
    for item in decl.items:
        guard = c.evaluate(item.guard).astype(bool)
        value = c.evaluate(item.value).astype(float)
        if not np.all(np.isfinite(value[guard])) or np.any(value[guard] < 0):
            raise ModelError(f"reward {decl.name!r} has a negative or non-finite value", *_where(item.loc))
        if item.transition:
            per_action.append((item.action, np.where(guard, value, 0.0)))
        else:
            state_reward += np.where(guard, value, 0.0)
    transition_reward: dict = {}
    for s, d, a in zip(c.src, c.dst, c.actions):
        total = sum(v[s] for action, v in per_action if action == a)
        if total:
            transition_reward[(int(s), int(d), a)] = float(total)
    return RewardStructure(decl.name, state_reward, transition_reward)

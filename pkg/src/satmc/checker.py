"""CSL model checking over explicit CTMCs."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from . import numerics
from .ctmc import Ctmc, embedded_matrix
from .errors import ModelError
from .lang.csl import Interval, Next, PathFormula, ProbQuery, Query, RewardQuery, SteadyQuery, Until
from .lang.expr import Expr, evaluate
from .lang.parser import parse_expression, parse_property
from .lang.printer import format_property

StateFormula = Union[str, Expr, np.ndarray]

_COMPARE = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
}


@dataclass
class QueryResult:
    query: str
    values: np.ndarray  # one entry per state
    initial: int
    tolerance: float
    seconds: float

    @property
    def is_boolean(self) -> bool:
        return self.values.dtype == np.bool_

    @property
    def value(self):
        """Result in the initial state."""
        v = self.values[self.initial]
        return bool(v) if self.is_boolean else float(v)

    @property
    def satisfying(self) -> np.ndarray:
        if not self.is_boolean:
            raise TypeError("numeric query has no satisfaction set")
        return np.flatnonzero(self.values)

    def format_value(self, digits: int = 6) -> str:
        if self.is_boolean:
            return "true" if self.value else "false"
        return f"{self.value:.{digits}g}"


def results_csv(results: Iterable[QueryResult], digits: int = 17) -> str:
    """Rows ``query,value,tolerance,seconds``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["query", "value", "tolerance", "seconds"])
    for r in results:
        writer.writerow([r.query, r.format_value(digits), f"{r.tolerance:g}", f"{r.seconds:.3f}"])
    return buf.getvalue()


class ModelChecker:
    """Evaluates CSL state formulas and numeric queries on one chain.

    ``eps`` bounds the Poisson truncation error of transient and reward
    computations; ``tol`` is the convergence tolerance of the iterative
    linear and steady-state solvers.
    """

    def __init__(self, ctmc: Ctmc, eps: float = numerics.DEFAULT_EPS, tol: float = numerics.DEFAULT_TOL) -> None:
        self.ctmc = ctmc
        self.eps = eps
        self.tol = tol
        self._steady: np.ndarray | None = None

    # -- entry points --------------------------------------------------------

    def check(self, prop: str | Expr) -> QueryResult:
        expr = parse_property(prop) if isinstance(prop, str) else prop
        text = prop if isinstance(prop, str) else format_property(prop)
        start = time.perf_counter()
        values = self.values(expr)
        if values.dtype != np.bool_:
            values = values.astype(float)
        return QueryResult(text, values, self.ctmc.initial, self.eps, time.perf_counter() - start)

    def values(self, expr: Expr) -> np.ndarray:
        """Per-state value of a property expression."""
        if isinstance(expr, PathFormula):
            raise TypeError("path formulas may only appear directly under P")
        return self.ctmc.evaluate(expr, extension=self._operator)

    def sat_states(self, phi: StateFormula) -> np.ndarray:
        """Boolean mask of the states satisfying ``phi``."""
        if isinstance(phi, np.ndarray):
            if phi.shape != (self.ctmc.num_states,):
                raise ValueError("state mask has the wrong length")
            return phi.astype(bool)
        if isinstance(phi, str):
            phi = parse_property(phi) if _looks_like_query(phi) else parse_expression(phi)
        values = self.values(phi)
        if values.dtype != np.bool_:
            raise TypeError("state formula must be Boolean")
        return values

    # -- operators -----------------------------------------------------------

    def _operator(self, node: Expr) -> np.ndarray:
        if isinstance(node, ProbQuery):
            values = self._path(node.path)
        elif isinstance(node, SteadyQuery):
            values = np.full(self.ctmc.num_states, self.steady(node.operand))
        elif isinstance(node, RewardQuery):
            values = self.reward(node.name, self._time(node.time))
        elif isinstance(node, PathFormula):
            raise TypeError("path formulas may only appear directly under P")
        else:
            raise ModelError(f"unsupported operator {type(node).__name__}")
        if isinstance(node, Query) and node.bound is not None:
            threshold = self._time(node.bound.threshold)
            return _COMPARE[node.bound.op](values, threshold)
        return values

    def _time(self, expr: Expr) -> float:
        value = evaluate(expr, self.ctmc.constants)
        if isinstance(value, np.ndarray):
            raise ModelError("time bounds and thresholds must not depend on the state")
        return float(value)

    def _interval(self, interval: Interval) -> tuple[float, float | None]:
        lower = self._time(interval.lower)
        upper = None if interval.upper is None else self._time(interval.upper)
        if lower < 0 or (upper is not None and upper < lower):
            raise ModelError(f"invalid time interval [{lower}, {upper}]")
        return lower, upper

    def _path(self, path: PathFormula) -> np.ndarray:
        if isinstance(path, Next):
            lower, upper = self._interval(path.interval)
            return self.prob_next(self.sat_states(path.operand), lower, upper)
        if isinstance(path, Until):
            lower, upper = self._interval(path.interval)
            return self.prob_until(self.sat_states(path.left), self.sat_states(path.right), lower, upper)
        raise TypeError(f"unknown path formula {type(path).__name__}")

    def prob_next(self, phi: StateFormula, lower: float = 0.0, upper: float | None = None) -> np.ndarray:
        target = self.sat_states(phi)
        c = self.ctmc
        exits = c.exit_rates
        into = c.rates @ target.astype(float)
        frac = np.divide(into, exits, out=np.zeros_like(into), where=exits > 0)
        late = 0.0 if upper is None else np.exp(-exits * upper)
        return frac * (np.exp(-exits * lower) - late)

    def prob_until(
        self, phi1: StateFormula, phi2: StateFormula, lower: float = 0.0, upper: float | None = None
    ) -> np.ndarray:
        """Per-state probability of ``phi1 U[lower, upper] phi2``."""
        left = self.sat_states(phi1)
        right = self.sat_states(phi2)
        if upper is None:
            values = self._until_unbounded(left, right)
        else:
            values = self._until_bounded(left, right, upper - lower)
        if lower > 0:
            # stay inside phi1 up to time `lower`, then continue from there
            c1 = self.ctmc.make_absorbing(~left)
            values = numerics.transient_backward(c1, lower, np.where(left, values, 0.0), self.eps)
        return values

    def _until_bounded(self, left: np.ndarray, right: np.ndarray, horizon: float) -> np.ndarray:
        stop = right | (~left & ~right)
        c = self.ctmc.make_absorbing(stop)
        values = numerics.transient_backward(c, horizon, right.astype(float), self.eps)
        values[stop] = right[stop]
        return values

    def _until_unbounded(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        c = self.ctmc
        can_reach = backward_reachable(c, right, through=left & ~right)
        maybe = can_reach & ~right
        P = embedded_matrix(c)
        b = np.asarray(P @ right.astype(float)).ravel()
        x = numerics.solve_linear_direct(P, np.where(maybe, b, 0.0), maybe)
        x[right] = 1.0
        return x

    def steady(self, phi: StateFormula) -> float:
        if self._steady is None:
            self._steady = numerics.steady_state(self.ctmc, self.tol)
        return float(self._steady[self.sat_states(phi)].sum())

    def reward(self, name: str | None, t: float) -> np.ndarray:
        rs = self.ctmc.reward(name)
        return numerics.cumulative_reward_backward(self.ctmc, rs, t, self.eps)


def backward_reachable(c: Ctmc, target: np.ndarray, through: np.ndarray) -> np.ndarray:
    """States that can reach ``target`` along paths whose other states lie in ``through``."""
    reverse = c.rates.T.tocsr()
    found = np.asarray(target, dtype=bool).copy()
    frontier = list(np.flatnonzero(found))
    while frontier:
        nxt = []
        for s in frontier:
            for p in range(reverse.indptr[s], reverse.indptr[s + 1]):
                pred = reverse.indices[p]
                if not found[pred] and through[pred]:
                    found[pred] = True
                    nxt.append(pred)
        frontier = nxt
    return found


def _looks_like_query(text: str) -> bool:
    return any(tok in text for tok in ("P=?", "S=?", "R{", "R=?", "P<", "P>", "S<", "S>"))


# -- functional interface ----------------------------------------------------


def check(c: Ctmc, prop: str | Expr, eps: float = numerics.DEFAULT_EPS, tol: float = numerics.DEFAULT_TOL) -> QueryResult:
    return ModelChecker(c, eps, tol).check(prop)


def sat_states(c: Ctmc, phi: StateFormula) -> np.ndarray:
    return ModelChecker(c).sat_states(phi)


def prob_until(
    c: Ctmc,
    phi1: StateFormula,
    phi2: StateFormula,
    lower: float = 0.0,
    upper: float | None = None,
    eps: float = numerics.DEFAULT_EPS,
) -> np.ndarray:
    return ModelChecker(c, eps).prob_until(phi1, phi2, lower, upper)


def prob_next(c: Ctmc, phi: StateFormula, lower: float = 0.0, upper: float | None = None) -> np.ndarray:
    return ModelChecker(c).prob_next(phi, lower, upper)


def steady_query(c: Ctmc, phi: StateFormula, tol: float = numerics.DEFAULT_TOL) -> float:
    return ModelChecker(c, tol=tol).steady(phi)


def reward_query(c: Ctmc, name: str | None, t: float, eps: float = numerics.DEFAULT_EPS) -> float:
    """Expected reward ``name`` cumulated up to ``t`` from the initial state."""
    if not t >= 0 or math.isinf(t):
        raise ValueError("time bound must be finite and nonnegative")
    return float(ModelChecker(c, eps).reward(name, t)[c.initial])

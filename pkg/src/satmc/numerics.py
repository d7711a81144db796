"""Numerical kernels: Poisson weights, uniformisation, steady state.

All transient quantities are computed by uniformisation. With
``q >= max_s E(s)`` the matrix ``P = I + (R - diag(E)) / q`` is
stochastic and the transient law at time ``t`` is the Poisson(q t)
mixture of its powers. The same power series with different
coefficients gives expected cumulative rewards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .ctmc import Ctmc, RewardStructure
from .errors import NotIrreducibleError, NumericalError

DEFAULT_EPS = 1e-10
DEFAULT_TOL = 1e-10
UNIFORMIZATION_FACTOR = 1.02
MAX_ITERATIONS = 10**8


@dataclass(frozen=True)
class PoissonWeights:
    """Truncated Poisson(``rate``) pmf on ``left..right``."""

    rate: float
    left: int
    right: int
    weights: np.ndarray  # weights[k - left] = pmf(k)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def dense(self) -> np.ndarray:
        """Weights indexed from 0 to ``right`` (zeros below ``left``)."""
        out = np.zeros(self.right + 1)
        out[self.left :] = self.weights
        return out


def poisson_weights(rate: float, eps: float = DEFAULT_EPS) -> PoissonWeights:
    """Poisson pmf truncated so that the omitted mass is at most ``eps``.

    Starts at the mode and walks outwards with the ratio recurrences
    ``w[k+1] = w[k] * rate / (k+1)`` and ``w[k-1] = w[k] * k / rate``,
    so nothing underflows near the mode even for rates of 1e6 and beyond.
    Each side stops once a geometric bound on its remaining tail drops
    below ``eps / 2``. The retained weights are then rescaled to sum to
    one: the mode value from ``lgamma`` carries a relative rounding error
    that grows with ``rate`` and would otherwise leak more mass than the
    truncation itself.
    """
    if rate < 0:
        raise ValueError("rate must be nonnegative")
    if not 0 < eps <= 1e-3:
        raise ValueError("eps must lie in (0, 1e-3]")
    if rate == 0:
        return PoissonWeights(0.0, 0, 0, np.ones(1))
    mode = int(math.floor(rate))
    log_mode = -rate + mode * math.log(rate) - math.lgamma(mode + 1)
    w_mode = math.exp(log_mode)
    half = eps / 2

    right_vals = []
    w, k = w_mode, mode
    while True:
        w *= rate / (k + 1)
        k += 1
        right_vals.append(w)
        ratio = rate / (k + 1)
        if ratio < 1 and w * ratio / (1 - ratio) <= half:
            break

    left_vals = []
    w, k = w_mode, mode
    while k > 0:
        ratio = k / rate  # w[k-1] / w[k]
        if ratio < 1 and w * ratio / (1 - ratio) <= half:
            break
        w *= ratio
        k -= 1
        left_vals.append(w)
    left = mode - len(left_vals)
    weights = np.array(left_vals[::-1] + [w_mode] + right_vals)
    weights /= math.fsum(weights)
    return PoissonWeights(float(rate), left, left + len(weights) - 1, weights)


@dataclass(frozen=True)
class UniformizedChain:
    rate: float  # uniformisation rate q
    matrix: sp.csr_matrix  # P = I + Q/q

    @property
    def transposed(self) -> sp.csr_matrix:
        return self.matrix.T.tocsr()


def uniformize(c: Ctmc, rate: float | None = None) -> UniformizedChain:
    exits = c.exit_rates
    if rate is None:
        top = float(exits.max()) if len(exits) else 0.0
        rate = UNIFORMIZATION_FACTOR * top if top > 0 else 1.0
    elif len(exits) and rate < exits.max():
        raise ValueError("uniformisation rate must dominate every exit rate")
    n = c.num_states
    P = (c.rates / rate + sp.diags(1.0 - exits / rate)).tocsr()
    P.sum_duplicates()
    P.sort_indices()
    assert P.shape == (n, n)
    return UniformizedChain(rate, P)


@numba.njit(cache=True)
def _series(indptr, indices, data, v0, coeffs, tails, detect_tol):
    """acc = sum_k coeffs[k] * A^k v0 with A in CSR form.

    When consecutive iterates differ by less than ``detect_tol`` the
    iterate is frozen and the remaining coefficient mass is applied to it.
    """
    n = v0.shape[0]
    K = coeffs.shape[0]
    acc = np.zeros(n)
    v = v0.copy()
    w = np.empty(n)
    for k in range(K):
        c = coeffs[k]
        if c != 0.0:
            for i in range(n):
                acc[i] += c * v[i]
        if k == K - 1:
            return acc, K
        diff = 0.0
        for i in range(n):
            s = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                s += data[p] * v[indices[p]]
            w[i] = s
            d = abs(s - v[i])
            if d > diff:
                diff = d
        tmp = v
        v = w
        w = tmp
        if diff < detect_tol:
            t = tails[k + 1]
            for i in range(n):
                acc[i] += t * v[i]
            return acc, k + 1
    return acc, K


def _run_series(A: sp.csr_matrix, v0: np.ndarray, coeffs: np.ndarray, eps: float, scale: float = 1.0) -> np.ndarray:
    tails = np.concatenate([np.cumsum(coeffs[::-1])[::-1], [0.0]])
    detect_tol = eps / max(len(coeffs), 1) * scale
    acc, _ = _series(
        A.indptr.astype(np.int64),
        A.indices.astype(np.int64),
        A.data.astype(np.float64),
        np.ascontiguousarray(v0, dtype=np.float64),
        np.ascontiguousarray(coeffs, dtype=np.float64),
        tails,
        detect_tol,
    )
    return acc


def _check_time(t: float) -> None:
    if not t >= 0 or math.isinf(t):
        raise ValueError(f"time bound must be finite and nonnegative, got {t!r}")


def _weights(uc: UniformizedChain, t: float, eps: float, max_iterations: int) -> PoissonWeights:
    # the right truncation point is at least q t, so fail before building weights
    needed = math.ceil(uc.rate * t)
    if needed < max_iterations:
        pw = poisson_weights(uc.rate * t, eps)
        needed = pw.right + 1
    if needed > max_iterations:
        raise NumericalError(
            f"uniformisation needs at least {needed} iterations (cap {max_iterations}); "
            "use a larger eps or a smaller time bound"
        )
    return pw


def initial_vector(c: Ctmc) -> np.ndarray:
    v = np.zeros(c.num_states)
    v[c.initial] = 1.0
    return v


def transient_distribution(
    c: Ctmc,
    t: float,
    eps: float = DEFAULT_EPS,
    start: np.ndarray | None = None,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """State distribution at time ``t`` (from ``s_init`` unless ``start`` is given)."""
    _check_time(t)
    pi0 = initial_vector(c) if start is None else np.asarray(start, dtype=float)
    if t == 0:
        return pi0.copy()
    uc = uniformize(c)
    pw = _weights(uc, t, eps, max_iterations)
    return _run_series(uc.transposed, pi0, pw.dense(), eps)


def transient_backward(
    c: Ctmc,
    t: float,
    values: np.ndarray,
    eps: float = DEFAULT_EPS,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """Per-state expectation of ``values`` at time ``t``: ``sum_k w_k P^k values``."""
    _check_time(t)
    values = np.asarray(values, dtype=float)
    if t == 0:
        return values.copy()
    uc = uniformize(c)
    pw = _weights(uc, t, eps, max_iterations)
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    return _run_series(uc.matrix, values, pw.dense(), eps, scale)


def _reward_coefficients(uc: UniformizedChain, pw: PoissonWeights) -> np.ndarray:
    """c_k = (1 - F(k)) / q for k = 0..right, F the Poisson cdf."""
    w = pw.dense()
    cdf = np.cumsum(w)
    upper = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])  # sum_{j>k} w_j
    survival = np.where(cdf < 0.5, 1.0 - cdf, upper)
    return survival / uc.rate


def cumulative_reward(
    c: Ctmc,
    rs: RewardStructure,
    t: float,
    eps: float = DEFAULT_EPS,
    start: np.ndarray | None = None,
    max_iterations: int = MAX_ITERATIONS,
) -> float:
    """Expected reward accumulated over ``[0, t]`` from the initial distribution."""
    _check_time(t)
    if t == 0:
        return 0.0
    pi0 = initial_vector(c) if start is None else np.asarray(start, dtype=float)
    uc = uniformize(c)
    pw = _weights(uc, t, eps, max_iterations)
    occupancy = _run_series(uc.transposed, pi0, _reward_coefficients(uc, pw), eps)
    return float(occupancy @ rs.rate_vector(c))


def cumulative_reward_backward(
    c: Ctmc,
    rs: RewardStructure,
    t: float,
    eps: float = DEFAULT_EPS,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """Expected reward accumulated over ``[0, t]`` from every state."""
    _check_time(t)
    rho = rs.rate_vector(c)
    if t == 0:
        return np.zeros(c.num_states)
    uc = uniformize(c)
    pw = _weights(uc, t, eps, max_iterations)
    scale = max(1.0, float(np.abs(rho).max(initial=0.0)))
    return _run_series(uc.matrix, rho, _reward_coefficients(uc, pw), eps, scale)


def is_irreducible(c: Ctmc) -> bool:
    if c.num_states == 1:
        return True
    count, _ = connected_components(c.rates, directed=True, connection="strong")
    return count == 1


@numba.njit(cache=True)
def _gauss_seidel_steady(col_ptr, row_idx, vals, out_rate, pi, tol, max_sweeps):
    """Gauss-Seidel sweeps on pi Q = 0 using the column (CSC) layout of R."""
    n = pi.shape[0]
    for sweep in range(max_sweeps):
        for j in range(n):
            s = 0.0
            for p in range(col_ptr[j], col_ptr[j + 1]):
                i = row_idx[p]
                if i != j:
                    s += pi[i] * vals[p]
            pi[j] = s / out_rate[j]
        total = pi.sum()
        for j in range(n):
            pi[j] /= total
        # residual of pi Q in the infinity norm
        res = 0.0
        for j in range(n):
            s = -pi[j] * out_rate[j]
            for p in range(col_ptr[j], col_ptr[j + 1]):
                i = row_idx[p]
                if i != j:
                    s += pi[i] * vals[p]
            if abs(s) > res:
                res = abs(s)
        if res <= tol:
            return sweep + 1, res
    return -1, res


def steady_state(c: Ctmc, tol: float = DEFAULT_TOL, max_sweeps: int = 10**6) -> np.ndarray:
    """Stationary distribution of an irreducible chain (Gauss-Seidel on ``pi Q = 0``).

    Sweeps stop once ``|pi Q|_inf <= tol * min(1, max_s E(s))``.
    """
    if not is_irreducible(c):
        raise NotIrreducibleError()
    n = c.num_states
    if n == 1:
        return np.ones(1)
    R = c.rates.tocsc()
    R.sort_indices()
    off_exit = c.exit_rates - c.rates.diagonal()
    pi = np.full(n, 1.0 / n)
    # slow chains need a proportionally smaller residual
    target = tol * min(1.0, float(off_exit.max()))
    sweeps, res = _gauss_seidel_steady(
        R.indptr.astype(np.int64), R.indices.astype(np.int64), R.data.astype(np.float64), off_exit, pi, target, max_sweeps
    )
    if sweeps < 0:
        raise NumericalError(f"steady-state solver did not converge in {max_sweeps} sweeps (residual {res:.3g})")
    return pi


def steady_state_residual(c: Ctmc, pi: np.ndarray) -> float:
    off_exit = c.exit_rates - c.rates.diagonal()
    flow = c.rates.T @ pi - c.rates.diagonal() * pi - off_exit * pi
    return float(np.abs(flow).max())


@numba.njit(cache=True)
def _gauss_seidel_linear(indptr, indices, vals, b, x, active, tol, max_sweeps):
    """Solve x = P x + b on the active states by Gauss-Seidel."""
    n = x.shape[0]
    for sweep in range(max_sweeps):
        delta = 0.0
        for i in range(n):
            if not active[i]:
                continue
            s = b[i]
            diag = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    diag += vals[p]
                elif active[j]:
                    s += vals[p] * x[j]
            new = s / (1.0 - diag)
            d = abs(new - x[i])
            if d > delta:
                delta = d
            x[i] = new
        if delta < tol:
            return sweep + 1
    return -1


def solve_linear_gs(
    P: sp.csr_matrix, b: np.ndarray, active: np.ndarray, tol: float = DEFAULT_TOL, max_sweeps: int = 10**7
) -> np.ndarray:
    """Fixed point of ``x = P x + b`` restricted to ``active`` (zero elsewhere)."""
    P = P.tocsr()
    P.sort_indices()
    x = np.zeros(P.shape[0])
    sweeps = _gauss_seidel_linear(
        P.indptr.astype(np.int64),
        P.indices.astype(np.int64),
        P.data.astype(np.float64),
        np.asarray(b, dtype=np.float64),
        x,
        np.asarray(active, dtype=np.bool_),
        tol,
        max_sweeps,
    )
    if sweeps < 0:
        raise NumericalError(f"linear solver did not converge in {max_sweeps} sweeps")
    return x


def solve_linear_direct(P: sp.csr_matrix, b: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Same fixed point as :func:`solve_linear_gs`, by sparse LU on ``(I - P) x = b``.

    Gauss-Seidel stalls when the active states leak only slowly (rare
    failures inside fast repair cycles), so the checker uses this.
    """
    active = np.asarray(active, dtype=bool)
    x = np.zeros(P.shape[0])
    idx = np.flatnonzero(active)
    if len(idx) == 0:
        return x
    A = (sp.identity(len(idx), format="csc") - P.tocsr()[idx][:, idx]).tocsc()
    sol = np.atleast_1d(spla.spsolve(A, np.asarray(b, dtype=float)[idx]))
    if not np.all(np.isfinite(sol)):
        raise NumericalError("singular linear system in unbounded until")
    x[idx] = sol
    return x

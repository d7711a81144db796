"""Dense reference computations used to cross-check the sparse solvers."""

import numpy as np
from scipy.linalg import expm, null_space


def generator(c):
    R = c.rates.toarray()
    return R - np.diag(R.sum(axis=1))


def transient(c, t, start=None):
    p0 = np.zeros(c.num_states)
    if start is None:
        p0[c.initial] = 1.0
    else:
        p0 = np.asarray(start, dtype=float)
    return p0 @ expm(generator(c) * t)


def occupancy(c, t):
    """Matrix of expected time spent in j by t, starting from i (augmented exponential)."""
    n = c.num_states
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = generator(c)
    A[:n, n:] = np.eye(n)
    return expm(A * t)[:n, n:]


def cumulative(c, rate_vector, t):
    return occupancy(c, t) @ rate_vector


def stationary(c):
    v = null_space(generator(c).T)[:, 0]
    return v / v.sum()

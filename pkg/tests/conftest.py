import itertools
import math
from collections import Counter

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------- brute force


def brute_cycling(y):
    """O(r^3) literal average over circular shifts."""
    y = np.asarray(y, dtype=float)
    r = y.size
    u = np.zeros(r + 1)
    u[0] = 1.0
    for k in range(1, r + 1):
        total = 0.0
        for s in range(r):
            prod = 1.0
            for i in range(k):
                prod *= y[(s + i) % r]
            total += prod
        u[k] = total / r
    return u


def brute_mvue(y):
    """Mean over all k-subsets of the product of their entries."""
    y = list(map(float, y))
    r = len(y)
    u = [1.0]
    for k in range(1, r + 1):
        subsets = list(itertools.combinations(y, k))
        u.append(sum(math.prod(c) for c in subsets) / len(subsets))
    return np.array(u)


def brute_cycling_gradient(y, g):
    """Literal circular-shift average of G_last * prod(preceding Y), scalar G."""
    r = len(y)
    w = np.zeros(r + 1)
    for k in range(1, r + 1):
        total = 0.0
        for s in range(r):
            idx = [(s + i) % r for i in range(k)]
            total += g[idx[-1]] * math.prod(y[j] for j in idx[:-1])
        w[k] = total / r
    return w


def exact_cycling_product_moment(m_tilde, beta2, r, k, l):
    """E[U^C_{r,k} U^C_{r,l}] by enumerating all pairs of windows.

    Each index appears once (mean m_tilde) or twice (second moment beta2).
    """
    total = 0.0
    for s in range(r):
        for t in range(r):
            counts = Counter((s + i) % r for i in range(k))
            counts.update((t + i) % r for i in range(l))
            total += math.prod(m_tilde if c == 1 else beta2 for c in counts.values())
    return total / r**2


def exact_gradient_product_moment(m_tilde, beta2, s2, t_cross, grad_m, r, k, l):
    """E[W^C_{r,k} W^C_{r,l}] (scalar G) by enumerating window pairs."""
    total = 0.0
    for s in range(r):
        for t in range(r):
            roles = {}
            for start, length in ((s, k), (t, l)):
                for i in range(length):
                    idx = (start + i) % r
                    roles.setdefault(idx, []).append("G" if i == length - 1 else "Y")
            val = 1.0
            for rs in roles.values():
                key = "".join(sorted(rs))
                val *= {"Y": m_tilde, "G": grad_m, "YY": beta2, "GG": s2, "GY": t_cross}[key]
            total += val
    return total / r**2


def cycling_matrix(y):
    """Cycling coefficients for each row of ``y`` (shape (n, r)); column k is U_{r,k}."""
    n, r = y.shape
    acc = np.zeros((n, r))
    for s in range(r):
        acc += np.cumprod(np.roll(y, -s, axis=1), axis=1)
    return np.column_stack([np.ones(n), acc / r])


def cycling_gradient_matrix(y, g):
    """Cycling gradient windows for each row; column k is W_{r,k} (column 0 unused)."""
    n, r = y.shape
    acc = np.zeros((n, r))
    for s in range(r):
        yy = np.roll(y, -s, axis=1)
        gg = np.roll(g, -s, axis=1)
        lead = np.ones((n, r))
        lead[:, 1:] = np.cumprod(yy[:, :-1], axis=1)
        acc += lead * gg
    return np.column_stack([np.zeros(n), acc / r])


def within(estimate, target, se, n_se=4.0):
    return abs(estimate - target) <= n_se * se

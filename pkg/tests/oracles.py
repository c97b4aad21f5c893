"""Independent oracles used to derive expected values.

Nothing here imports the package under test: rasterized pixel counting for
IoU, exhaustive enumeration for assignment, conjugate/normal-equation math
for the filter. Deliberately slow and simple.
"""

from __future__ import annotations

import itertools

import numpy as np


def raster_iou(a, b, scale: int = 1) -> float:
    """Pixel-counting IoU of two (l, t, w, h) boxes.

    Boxes whose coordinates become integers after multiplying by ``scale``
    are rasterized exactly on a grid of 1/scale-pixel cells.
    """
    boxes = []
    for box in (a, b):
        l, t, w, h = (v * scale for v in box)
        if any(round(v) != v for v in (l, t, w, h)):
            raise ValueError(f"box {box} is not integral at scale {scale}")
        boxes.append((int(l), int(t), int(w), int(h)))
    (la, ta, wa, ha), (lb, tb, wb, hb) = boxes
    x0 = min(la, lb)
    y0 = min(ta, tb)
    x1 = max(la + wa, lb + wb)
    y1 = max(ta + ha, tb + hb)
    grid_a = np.zeros((y1 - y0, x1 - x0), dtype=bool)
    grid_b = np.zeros_like(grid_a)
    grid_a[ta - y0 : ta - y0 + ha, la - x0 : la - x0 + wa] = True
    grid_b[tb - y0 : tb - y0 + hb, lb - x0 : lb - x0 + wb] = True
    inter = int(np.logical_and(grid_a, grid_b).sum())
    union = int(np.logical_or(grid_a, grid_b).sum())
    return inter / union if union else 0.0


def brute_force_assignment(costs) -> tuple[int, float, list[tuple[int, int]]]:
    """Exhaustive matching oracle: maximize cardinality over finite pairs,
    then minimize total cost, then take the lexicographically smallest
    (row, col) pair list. Exponential; keep matrices small."""
    costs = np.asarray(costs, dtype=float)
    rows, cols = costs.shape
    best: tuple[int, float, tuple[tuple[int, int], ...]] | None = None

    def rec(r: int, used: frozenset[int], pairs: tuple, cost: float) -> None:
        nonlocal best
        if r == rows:
            key = (-len(pairs), cost, pairs)
            if best is None or key < best:
                best = key
            return
        rec(r + 1, used, pairs, cost)
        for c in range(cols):
            if c not in used and np.isfinite(costs[r, c]):
                rec(r + 1, used | {c}, pairs + ((r, c),), cost + costs[r, c])

    rec(0, frozenset(), (), 0.0)
    assert best is not None
    return -best[0], best[1], list(best[2])


def permutation_min_cost(costs) -> float:
    """Minimum total cost over complete matchings of an all-finite matrix,
    enumerated via permutations (vectorized; fine up to 7x7)."""
    costs = np.asarray(costs, dtype=float)
    rows, cols = costs.shape
    if rows > cols:
        costs = costs.T
        rows, cols = cols, rows
    perms = np.array(list(itertools.permutations(range(cols), rows)))
    totals = costs[np.arange(rows)[None, :], perms].sum(axis=1)
    return float(totals.min())


def permutation_best_assignment(costs) -> tuple[float, list[tuple[int, int]]]:
    """Minimum cost and its lexicographically smallest (row, col) pair list,
    over complete matchings of an all-finite matrix (vectorized up to 7x7)."""
    costs = np.asarray(costs, dtype=float)
    rows, cols = costs.shape
    transposed = rows > cols
    work = costs.T if transposed else costs
    r, c = work.shape
    perms = np.array(list(itertools.permutations(range(c), r)))
    totals = work[np.arange(r)[None, :], perms].sum(axis=1)
    best = totals.min()
    candidates = []
    for perm in perms[totals == best]:
        pairs = [(int(j), int(i)) for i, j in enumerate(perm)] if transposed else [
            (int(i), int(j)) for i, j in enumerate(perm)
        ]
        candidates.append(sorted(pairs))
    return float(best), min(candidates)


def conjugate_posterior_1d(mu0: float, var0: float, z: float, r: float) -> tuple[float, float]:
    """Product of two Gaussians: posterior mean and variance."""
    precision = 1.0 / var0 + 1.0 / r
    mean = (mu0 / var0 + z / r) / precision
    return mean, 1.0 / precision


def batch_map_1d(mu0: float, p0: float, steps) -> float:
    """MAP estimate of the final state of a scalar linear-Gaussian chain.

    Model: x_t = f_t x_{t-1} + N(0, q_t), z_t = x_t + N(0, r_t),
    x_0 ~ N(mu0, p0); ``steps`` is a sequence of (f, q, r, z). Solves the
    stacked normal equations directly - no filtering.
    """
    T = len(steps)
    J = np.zeros((T + 1, T + 1))
    b = np.zeros(T + 1)
    J[0, 0] += 1.0 / p0
    b[0] += mu0 / p0
    for t, (f, q, r, z) in enumerate(steps, start=1):
        J[t, t] += 1.0 / q
        J[t - 1, t - 1] += f * f / q
        J[t - 1, t] -= f / q
        J[t, t - 1] -= f / q
        J[t, t] += 1.0 / r
        b[t] += z / r
    return float(np.linalg.solve(J, b)[T])

"""Pruning: pick a compact concept subset that keeps most of the label
information.

``mutual_information`` is the plug-in estimate between the label and the joint
configuration of a column subset, in bits. Configurations are keyed by the
distinct observed rows restricted to the subset, so cost never depends on the
2^K configuration space, only on N.

``greedy_prune`` ranks concepts by marginal MI gain (ties break to the lowest
column index) and cuts the greedy prefix once the selected MI reaches
``gamma`` times the full-set MI. Because the plug-in estimate saturates at the
empirical label entropy, concepts that are informative on their own can carry
zero marginal gain once the prefix separates every row; a retention pass
(default on) therefore appends every remaining concept with positive
individual MI whose presence column is not an exact duplicate of one already
selected. Exact duplicates are the only concepts guaranteed to add nothing
under any subset, and they are what pruning is meant to drop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ConfigError, DegenerateTaskError

_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class PresenceTable:
    rows: np.ndarray  # N x J binary
    labels: np.ndarray  # N label indices

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2:
            raise ValueError("presence table must be 2-d")
        if rows.size and not np.isin(rows, (0, 1)).all():
            raise ValueError("presence table entries must be 0/1")
        if len(self.labels) != rows.shape[0]:
            raise ValueError("labels must align with table rows")

    @property
    def n_concepts(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class PruneResult:
    selected: tuple[int, ...]  # greedy order, then retained concepts
    gains: tuple[float, ...]  # marginal MI gain at each selection step
    greedy_count: int  # how many of `selected` came from the greedy prefix
    mi_full: float
    mi_selected: float
    gamma: float
    shortfall: bool  # gains exhausted before reaching gamma * mi_full
    curve: tuple[float, ...] = field(default=())  # cumulative MI after each step


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _config_ids(rows: np.ndarray, subset) -> np.ndarray:
    subset = list(subset)
    if not subset:
        return np.zeros(rows.shape[0], dtype=np.int64)
    _, inverse = np.unique(rows[:, subset], axis=0, return_inverse=True)
    return inverse


def mutual_information(table: PresenceTable, subset) -> float:
    """Plug-in MI (bits) between the label and the subset's joint columns."""
    n = table.rows.shape[0]
    if n == 0:
        raise DegenerateTaskError("mutual information of an empty table is undefined")
    subset = sorted(set(subset))
    if any(j < 0 or j >= table.n_concepts for j in subset):
        raise ValueError(f"subset {subset} outside 0..{table.n_concepts - 1}")
    if not subset:
        return 0.0
    x = _config_ids(table.rows, subset)
    return _mi_from_configs(x, np.asarray(table.labels))


def _mi_from_configs(x: np.ndarray, y: np.ndarray) -> float:
    n = x.size
    y_ids = np.unique(y, return_inverse=True)[1]
    nx, ny = int(x.max()) + 1, int(y_ids.max()) + 1
    joint = np.bincount(x * ny + y_ids, minlength=nx * ny).astype(np.float64)
    h_y = _entropy_bits(np.bincount(y_ids).astype(np.float64))
    h_x = _entropy_bits(np.bincount(x).astype(np.float64))
    h_xy = _entropy_bits(joint)
    mi = h_x + h_y - h_xy
    return max(mi, 0.0)


def greedy_order(table: PresenceTable) -> tuple[list[int], list[float]]:
    """Full greedy ranking of all columns with the cumulative MI curve.

    Gamma never changes this order; it only decides where the prefix is cut.
    """
    n_concepts = table.n_concepts
    labels = np.asarray(table.labels)
    selected: list[int] = []
    curve: list[float] = []
    current = 0.0
    config = np.zeros(table.rows.shape[0], dtype=np.int64)
    remaining = list(range(n_concepts))
    while remaining:
        best_j, best_mi = None, -1.0
        for j in remaining:
            col = table.rows[:, j].astype(np.int64)
            cand = config * 2 + col
            cand = np.unique(cand, return_inverse=True)[1]
            mi = _mi_from_configs(cand, labels)
            if mi > best_mi + _GAIN_TOL:
                best_j, best_mi = j, mi
        selected.append(best_j)
        curve.append(best_mi)
        col = table.rows[:, best_j].astype(np.int64)
        config = np.unique(config * 2 + col, return_inverse=True)[1]
        current = best_mi
        remaining.remove(best_j)
    return selected, curve


def greedy_prune(
    table: PresenceTable,
    gamma: float,
    retain_informative: bool = True,
) -> PruneResult:
    """Greedy MI selection cut at ``gamma * mi_full``, plus retention pass."""
    if not (0.0 < gamma <= 1.0):
        raise ConfigError(f"gamma must be in (0, 1], got {gamma}")
    labels = np.asarray(table.labels)
    if table.rows.shape[0] == 0:
        raise DegenerateTaskError("cannot prune an empty table")
    if np.unique(labels).size < 2:
        raise DegenerateTaskError("pruning needs at least two distinct labels")

    mi_full = mutual_information(table, range(table.n_concepts))
    target = gamma * mi_full
    order, curve = greedy_order(table)

    selected: list[int] = []
    gains: list[float] = []
    cum: list[float] = []
    prev = 0.0
    shortfall = False
    for j, mi in zip(order, curve):
        if prev >= target - _GAIN_TOL:
            break
        gain = mi - prev
        if gain <= _GAIN_TOL:
            shortfall = True
            break
        selected.append(j)
        gains.append(gain)
        cum.append(mi)
        prev = mi
    greedy_count = len(selected)

    if retain_informative:
        chosen_cols = [table.rows[:, j] for j in selected]
        picked = set(selected)
        for j in range(table.n_concepts):
            if j in picked:
                continue
            if mutual_information(table, [j]) <= _GAIN_TOL:
                continue
            col = table.rows[:, j]
            if any(np.array_equal(col, c) for c in chosen_cols):
                continue
            mi_new = mutual_information(table, selected + [j])
            selected.append(j)
            picked.add(j)
            gains.append(max(mi_new - prev, 0.0))
            cum.append(mi_new)
            prev = mi_new
            chosen_cols.append(col)

    mi_selected = mutual_information(table, selected)
    return PruneResult(
        selected=tuple(selected),
        gains=tuple(gains),
        greedy_count=greedy_count,
        mi_full=mi_full,
        mi_selected=mi_selected,
        gamma=gamma,
        shortfall=shortfall and mi_selected < target - _GAIN_TOL,
        curve=tuple(cum),
    )


def brute_force_best(table: PresenceTable, size: int) -> tuple[tuple[int, ...], float]:
    """Exhaustive best subset of ``size`` columns; test oracle only."""
    j = table.n_concepts
    if j > 20:
        raise ConfigError(f"brute force refused for {j} > 20 concepts")
    if not 0 <= size <= j:
        raise ValueError(f"subset size {size} outside 0..{j}")
    best_subset, best_mi = (), 0.0
    for combo in combinations(range(j), size):
        mi = mutual_information(table, combo)
        if mi > best_mi + _GAIN_TOL:
            best_subset, best_mi = combo, mi
    if size and not best_subset:
        best_subset = tuple(range(size))
        best_mi = mutual_information(table, best_subset)
    return best_subset, best_mi

"""Finite filtered probability spaces.

Atoms with strictly positive probabilities, refining partitions modeling the
information flow, terminal payoffs per atom, and the per-cell conditional
machinery (conditional laws and conditional expectations) everything else in
this package is built on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_SUM_TOL = 1e-12
RENORM_WINDOW = 1e-9


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


@dataclass(frozen=True)
class ScenarioSpace:
    """Atom probabilities of a finite sample space.

    Inputs whose total is within 1e-9 of 1 are renormalized; anything further
    off, or any non-positive entry, is rejected.
    """

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DomainError("probabilities must form a non-empty vector")
        if not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite")
        if np.any(p <= 0.0):
            raise DomainError("zero or negative atom probability")
        total = float(p.sum())
        if abs(total - 1.0) > RENORM_WINDOW:
            raise DomainError(
                f"probabilities sum to {total}, outside the renormalization window"
            )
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def n_atoms(self) -> int:
        return int(self.probabilities.size)


def _normalize_partitions(partitions) -> tuple[tuple[tuple[int, ...], ...], ...]:
    out = []
    for level in partitions:
        cells = tuple(tuple(int(i) for i in cell) for cell in level)
        out.append(cells)
    return tuple(out)


@dataclass(frozen=True)
class Filtration:
    """Per-time partitions of the atom index set.

    The constructor only enforces that every level is a genuine partition of
    the same atom set (non-empty disjoint cells covering all atoms).  The
    structural invariants that make it a filtration -- trivial root, refinement
    from one time to the next, full separation at the horizon -- are reported
    by :func:`validate`, so defective structures can still be built and
    diagnosed.
    """

    partitions: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self) -> None:
        parts = _normalize_partitions(self.partitions)
        if not parts:
            raise DomainError("filtration needs at least one level")
        atom_set = None
        for t, level in enumerate(parts):
            seen: set[int] = set()
            count = 0
            for cell in level:
                if not cell:
                    raise DomainError(f"empty cell at time {t}")
                seen.update(cell)
                count += len(cell)
            if count != len(seen):
                raise DomainError(f"overlapping cells at time {t}")
            if atom_set is None:
                atom_set = seen
            elif seen != atom_set:
                raise DomainError(f"level {t} does not cover the same atom set")
        if atom_set != set(range(len(atom_set))):
            raise DomainError("atom indices must be 0..n-1")
        object.__setattr__(self, "partitions", parts)

    @property
    def horizon(self) -> int:
        return len(self.partitions) - 1

    @property
    def n_atoms(self) -> int:
        return sum(len(c) for c in self.partitions[0])

    def cells(self, t: int) -> tuple[tuple[int, ...], ...]:
        if not 0 <= t <= self.horizon:
            raise DomainError(f"time {t} outside 0..{self.horizon}")
        return self.partitions[t]

    def n_cells(self, t: int) -> int:
        return len(self.cells(t))

    def cell_of_atom(self, t: int) -> np.ndarray:
        """Map atom index -> cell index at time t."""
        out = np.empty(self.n_atoms, dtype=int)
        for k, cell in enumerate(self.cells(t)):
            out[list(cell)] = k
        return out


@dataclass(frozen=True)
class RandomVariable:
    """Terminal payoff: one real value per atom."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise DomainError("values must form a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class AdaptedValue:
    """One real value per cell of the partition at a fixed time."""

    time: int
    cell_values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.cell_values, dtype=float)
        if v.ndim != 1:
            raise DomainError("cell_values must form a vector")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "cell_values", v)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported law: strictly increasing support, positive weights."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.support, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if s.shape != w.shape or s.ndim != 1 or s.size == 0:
            raise DomainError("support and weights must be matching non-empty vectors")
        if np.any(np.diff(s) <= 0):
            raise DomainError("support must be strictly increasing")
        if np.any(w <= 0):
            raise DomainError("weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > PROB_SUM_TOL:
            raise DomainError("weights must sum to 1")
        s = s.copy()
        w = w.copy()
        s.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    def mean(self) -> float:
        return float(self.support @ self.weights)


def conditional_distribution(
    space: ScenarioSpace,
    filtration: Filtration,
    X: RandomVariable,
    t: int,
    cell_index: int,
) -> DiscreteDistribution:
    """Law of X given the information cell at time t.

    Atoms sharing the exact same value are merged by summing their
    cell-conditional probabilities.
    """
    cells = filtration.cells(t)
    if not 0 <= cell_index < len(cells):
        raise DomainError(f"unknown cell {cell_index} at time {t}")
    idx = list(cells[cell_index])
    if X.values.size != space.n_atoms:
        raise DomainError("payoff length does not match atom count")
    vals = X.values[idx]
    probs = space.probabilities[idx]
    cell_p = probs.sum()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    probs = probs[order]
    support: list[float] = []
    weights: list[float] = []
    for v, p in zip(vals, probs):
        if support and v == support[-1]:
            weights[-1] += p
        else:
            support.append(float(v))
            weights.append(float(p))
    w = np.asarray(weights) / cell_p
    return DiscreteDistribution(np.asarray(support), w)


def conditional_expectation(
    space: ScenarioSpace, filtration: Filtration, X: RandomVariable, t: int
) -> AdaptedValue:
    """Probability-weighted mean of X on each cell at time t."""
    if X.values.size != space.n_atoms:
        raise DomainError("payoff length does not match atom count")
    out = []
    for cell in filtration.cells(t):
        idx = list(cell)
        p = space.probabilities[idx]
        out.append(float(X.values[idx] @ p / p.sum()))
    return AdaptedValue(t, np.asarray(out))


def lift(filtration: Filtration, adapted: AdaptedValue) -> RandomVariable:
    """Spread an adapted value back onto atoms (constant on each cell)."""
    cells = filtration.cells(adapted.time)
    if adapted.cell_values.size != len(cells):
        raise DomainError("cell value count does not match partition")
    out = np.empty(filtration.n_atoms)
    for k, cell in enumerate(cells):
        out[list(cell)] = adapted.cell_values[k]
    return RandomVariable(out)


def validate(probabilities, partitions, *value_vectors) -> list[str]:
    """Diagnostic report on raw structural inputs.

    Never raises: returns one message per violated invariant, empty list iff
    everything checks out.  Accepts raw sequences so that defective inputs the
    constructors would reject can still be diagnosed.
    """
    report: list[str] = []
    p = np.asarray(probabilities, dtype=float)
    n = p.size
    if p.ndim != 1 or n == 0:
        report.append("probabilities: not a non-empty vector")
        return report
    if np.any(~np.isfinite(p)):
        report.append("probabilities: non-finite entries")
    if np.any(p <= 0):
        report.append("probabilities: non-positive entries")
    total = float(p.sum())
    if abs(total - 1.0) > RENORM_WINDOW:
        report.append(f"probabilities: sum {total} outside renormalization window")

    levels = [_normalize_partitions([lvl])[0] for lvl in partitions]
    atom_set = set(range(n))
    ok_shape = True
    for t, level in enumerate(levels):
        flat = [i for cell in level for i in cell]
        if len(flat) != len(set(flat)) or set(flat) != atom_set:
            report.append(f"partition t={t}: not a partition of the atom set")
            ok_shape = False
    if ok_shape and levels:
        if len(levels[0]) != 1:
            report.append("partition t=0: not the trivial single cell")
        if len(levels[-1]) != n:
            report.append(f"partition t={len(levels) - 1}: does not separate all atoms")
        for t in range(len(levels) - 1):
            parent_of = {}
            for k, cell in enumerate(levels[t]):
                for i in cell:
                    parent_of[i] = k
            for cell in levels[t + 1]:
                parents = {parent_of[i] for i in cell}
                if len(parents) > 1:
                    report.append(
                        f"refinement t={t + 1}: cell {cell} straddles cells "
                        f"{sorted(parents)} of t={t}"
                    )
    for j, vec in enumerate(value_vectors):
        v = np.asarray(vec, dtype=float)
        if v.size != n:
            report.append(f"payoff {j}: length {v.size} != atom count {n}")
        elif np.any(~np.isfinite(v)):
            report.append(f"payoff {j}: non-finite values")
    return report

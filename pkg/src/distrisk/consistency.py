"""Time-consistency checks and the explicit counterexamples.

Checkers compare the risk at an earlier time with per-cell aggregates of the
risk at a later time and report margins with witnesses.  Builders construct
the three scenario trees on which the stronger consistency notions provably
fail, each carrying its expected values and verifying itself on construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .acceptability import dcai
from .distortion import (
    Distortion,
    DistortionFamily,
    DistortionMeasure,
    ProportionalHazard,
    m_mu,
    pprime_distortion,
    psi_from_measure,
)
from .risk import choquet
from .space import (
    DomainError,
    Filtration,
    RandomVariable,
    ScenarioSpace,
    conditional_expectation,
    lift,
)

LEQ_TOL = 1e-12
SUBMARTINGALE_TOL = 1e-10


@dataclass(frozen=True)
class ConsistencyReport:
    property_name: str
    t: int
    s: int | None
    margins: tuple[float, ...]
    verdict: str  # "holds" or "violated"
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


@dataclass(frozen=True)
class Counterexample:
    """A concrete tree, payoff and distortion with expected risk values.

    expected maps a label like "rho_0" or "rho_1" to the target numbers;
    tolerance is the accuracy the risk module must reproduce them with.  The
    constructor re-evaluates everything and fails loudly on any mismatch.
    """

    name: str
    space: ScenarioSpace
    filtration: Filtration
    X: RandomVariable
    psi: Distortion
    expected: dict
    tolerance: float

    def __post_init__(self) -> None:
        for label, target in self.expected.items():
            t = int(label.split("_")[1])
            got = choquet(self.space, self.filtration, self.X, t, self.psi)
            target_arr = np.atleast_1d(np.asarray(target, dtype=float))
            if got.cell_values.shape != target_arr.shape:
                raise AssertionError(f"{self.name}: {label} shape mismatch")
            err = float(np.max(np.abs(got.cell_values - target_arr)))
            if err > self.tolerance:
                raise AssertionError(
                    f"{self.name}: {label} off by {err} (> {self.tolerance})"
                )


def _parents(filtration: Filtration, t: int, s: int) -> list[int]:
    """Index of the t-cell containing each s-cell."""
    cell_of = filtration.cell_of_atom(t)
    return [int(cell_of[cell[0]]) for cell in filtration.cells(s)]


def check_submartingale(
    space, filtration, X, psi: Distortion, t: int, s: int
) -> ConsistencyReport:
    """Earlier risk must dominate the conditional mean of later risk."""
    if t > s:
        raise DomainError("need t <= s")
    rho_t = choquet(space, filtration, X, t, psi)
    rho_s = choquet(space, filtration, X, s, psi)
    mean_later = conditional_expectation(space, filtration, lift(filtration, rho_s), t)
    margins = rho_t.cell_values - mean_later.cell_values
    bad = int(np.argmin(margins))
    verdict = "holds" if margins[bad] >= -SUBMARTINGALE_TOL else "violated"
    witness = None
    if verdict == "violated":
        witness = {"cell": bad, "margin": float(margins[bad])}
    return ConsistencyReport(
        "submartingale", t, s, tuple(float(m) for m in margins), verdict, witness
    )


def check_super_strict_failure(
    space, filtration, X, psi: Distortion, t: int
) -> ConsistencyReport:
    """Strict gap over the conditional mean wherever the payoff is random.

    For a non-identity distortion the risk at t strictly exceeds the risk of
    the terminal conditional mean on every cell where the payoff is not
    constant, so the super-martingale property can never hold with equality.
    """
    if psi.is_identity():
        raise DomainError("the identity distortion is the excluded case")
    rho_t = choquet(space, filtration, X, t, psi)
    neg_mean = -conditional_expectation(space, filtration, X, t).cell_values
    margins = rho_t.cell_values - neg_mean
    cell_of = filtration.cell_of_atom(t)
    verdict = "holds"
    witness = None
    for k in range(filtration.n_cells(t)):
        vals = X.values[cell_of == k]
        constant = bool(np.all(vals == vals[0]))
        ok = abs(margins[k]) <= LEQ_TOL if constant else margins[k] > LEQ_TOL
        if not ok:
            verdict = "violated"
            witness = {"cell": k, "margin": float(margins[k]), "constant": constant}
            break
    return ConsistencyReport(
        "super_strict_failure", t, None, tuple(float(m) for m in margins),
        verdict, witness,
    )


def check_weak_acceptance(
    space, filtration, X, psi: Distortion, t: int, s: int
) -> ConsistencyReport:
    """Acceptance at every later cell should imply acceptance earlier.

    Violated when some t-cell has non-positive risk on all of its s-children
    yet strictly positive risk itself.
    """
    if t >= s:
        raise DomainError("need t < s")
    rho_t = choquet(space, filtration, X, t, psi).cell_values
    rho_s = choquet(space, filtration, X, s, psi).cell_values
    parent = _parents(filtration, t, s)
    verdict = "holds"
    witness = None
    for k in range(filtration.n_cells(t)):
        children = [j for j, p in enumerate(parent) if p == k]
        if all(rho_s[j] <= LEQ_TOL for j in children) and rho_t[k] > LEQ_TOL:
            verdict = "violated"
            witness = {
                "cell": k,
                "rho_t": float(rho_t[k]),
                "rho_s_children": [float(rho_s[j]) for j in children],
            }
            break
    return ConsistencyReport(
        "weak_acceptance", t, s, tuple(float(v) for v in rho_t), verdict, witness
    )


def check_weak_rejection_dcai(
    space, filtration, X, family: DistortionFamily, t: int, s: int
) -> ConsistencyReport:
    """Index capped at every later cell should stay capped earlier.

    Probed at each level realized by the later index: if all s-children of a
    t-cell are at or below the level, the t-cell must be too.
    """
    if t >= s:
        raise DomainError("need t < s")
    a_t = dcai(space, filtration, X, t, family).cell_values
    a_s = dcai(space, filtration, X, s, family).cell_values
    parent = _parents(filtration, t, s)
    index_slack = 1e-6
    verdict = "holds"
    witness = None
    for k in range(filtration.n_cells(t)):
        children = [j for j, p in enumerate(parent) if p == k]
        for m in (a_s[j] for j in children):
            if math.isinf(m):
                continue
            if all(a_s[j] <= m + index_slack for j in children) and a_t[k] > m + index_slack:
                verdict = "violated"
                witness = {
                    "cell": k,
                    "level": float(m),
                    "index_t": float(a_t[k]),
                    "index_s_children": [float(a_s[j]) for j in children],
                }
                break
        if witness:
            break
    return ConsistencyReport(
        "dcai_weak_rejection", t, s, tuple(float(v) for v in a_t), verdict, witness
    )


def middle_rejection_probe(
    space, filtration, X, psi: Distortion, t: int, s: int
) -> ConsistencyReport:
    """Probe with the canonical witness: the later risk paid out as cash.

    Y is the negated later risk spread over atoms, so X and Y carry the same
    risk at time s.  A negative margin rho_t(X) - rho_t(Y) on some cell
    certifies that equal later risk does not force equal earlier risk.
    """
    if t >= s:
        raise DomainError("need t < s")
    rho_s = choquet(space, filtration, X, s, psi)
    Y = RandomVariable(-lift(filtration, rho_s).values)
    rho_t_x = choquet(space, filtration, X, t, psi).cell_values
    rho_t_y = choquet(space, filtration, Y, t, psi).cell_values
    margins = rho_t_x - rho_t_y
    bad = int(np.argmin(margins))
    verdict = "violated" if margins[bad] < -LEQ_TOL else "holds"
    witness = None
    if verdict == "violated":
        witness = {
            "cell": bad,
            "rho_t_X": float(rho_t_x[bad]),
            "rho_t_Y": float(rho_t_y[bad]),
        }
    return ConsistencyReport(
        "middle_rejection", t, s, tuple(float(m) for m in margins), verdict, witness
    )


def build_nonmiddle_example() -> Counterexample:
    """Two-period binomial tree where middle rejection fails.

    Four equiprobable atoms with payoff (2, 0, 0, -2) under the square-root
    distortion.  The later risks are (sqrt(2)-2, sqrt(2)); paying them out as
    cash produces a payoff Y with the same time-1 risk but strictly larger
    time-0 risk: 2*sqrt(2)-2 against sqrt(3)-1.
    """
    space = ScenarioSpace(np.full(4, 0.25))
    filtration = Filtration((
        ((0, 1, 2, 3),),
        ((0, 1), (2, 3)),
        ((0,), (1,), (2,), (3,)),
    ))
    X = RandomVariable(np.asarray([2.0, 0.0, 0.0, -2.0]))
    psi = ProportionalHazard(0.5)
    expected = {
        "rho_1": [math.sqrt(2.0) - 2.0, math.sqrt(2.0)],
        "rho_0": [math.sqrt(3.0) - 1.0],
    }
    ce = Counterexample("nonmiddle", space, filtration, X, psi, expected, 1e-12)
    rho_0_Y = choquet(
        space, filtration,
        RandomVariable(-lift(filtration, choquet(space, filtration, X, 1, psi)).values),
        0, psi,
    ).cell_values[0]
    if abs(rho_0_Y - (2.0 * math.sqrt(2.0) - 2.0)) > 1e-12:
        raise AssertionError("nonmiddle: witness risk mismatch")
    return ce


def build_weakacc_pprime(a: float) -> Counterexample:
    """Four-atom tree where weak acceptance fails for the two-atom boundary
    distortion with parameter a > 1.

    Both time-1 cells carry exactly zero risk while the time-0 risk equals
    (a - 1) / (4a) > 0.
    """
    a = float(a)
    if a <= 1.0:
        raise DomainError("need a > 1")
    q = 1.0 / (4.0 * (a + 1.0))
    space = ScenarioSpace(np.asarray([0.5 - q, 0.5 - q, q, q]))
    X = RandomVariable(np.asarray([2.0, 1.0, -(a + 2.0) / a, -(2.0 * a + 4.0) / a]))
    filtration = Filtration((
        ((0, 1, 2, 3),),
        ((0, 3), (1, 2)),
        ((0,), (1,), (2,), (3,)),
    ))
    expected = {
        "rho_1": [0.0, 0.0],
        "rho_0": [(a - 1.0) / (4.0 * a)],
    }
    return Counterexample(
        f"weakacc_pprime_a{a:g}", space, filtration, X, pprime_distortion(a),
        expected, 1e-12,
    )


def is_pprime(mu: DistortionMeasure, tol: float = 1e-12) -> bool:
    """Whether mu has the two-atom boundary form ((a-1)/a, 1/a) at
    (1/(a+1), 1) for some a >= 1."""
    if mu.support.size == 1:
        return abs(mu.support[0] - 1.0) <= tol
    if mu.support.size != 2:
        return False
    s1, s2 = mu.support
    w1, w2 = mu.weights
    if abs(s2 - 1.0) > tol:
        return False
    a = 1.0 / s1 - 1.0
    if a < 1.0:
        return False
    return abs(w1 - (a - 1.0) / a) <= tol and abs(w2 - 1.0 / a) <= tol


@dataclass(frozen=True)
class DichotomyReport:
    value: float
    on_boundary: bool
    verdict_ok: bool


def check_nonweak1_inequality(mu: DistortionMeasure) -> DichotomyReport:
    """Sign of psi_mu(m_mu) + m_mu - 1: zero exactly on the boundary family,
    strictly negative off it."""
    psi = psi_from_measure(mu)
    m = m_mu(mu)
    value = float(psi(m)) + m - 1.0
    boundary = is_pprime(mu)
    ok = abs(value) <= LEQ_TOL if boundary else value < -LEQ_TOL
    return DichotomyReport(value, boundary, ok)


def build_weakacc_continuous(mu: DistortionMeasure, n_atoms: int) -> Counterexample:
    """Discretized uniform tree where weak acceptance fails for psi_mu.

    Off the boundary family the deficit psi_mu(m) + m - 1 is strictly
    negative, so psi_mu(z) + z - 1 has a root z0 in (m, 1/2].  The payoff is
    uniform on [a, d] with a = -m - z0, b = -m, c = 1 - m, d = 2 - m - z0,
    split at time 1 into the outer piece [a,b) with [c,d] and the middle
    piece [b,c).  In the continuum both time-1 risks are 0 while the time-0
    risk is z0 - m > 0; the midpoint discretization with n_atoms atoms
    reproduces these within O(1/n_atoms).
    """
    if is_pprime(mu):
        raise DomainError("mu lies on the boundary family; no strict violation")
    n = int(n_atoms)
    if n < 4:
        raise DomainError("need at least 4 atoms")
    psi = psi_from_measure(mu)
    m = m_mu(mu)

    def g(z: float) -> float:
        return float(psi(z)) + z - 1.0

    lo, hi = m, 0.5
    if not (g(lo) < 0.0 <= g(hi) + 1e-15):
        raise AssertionError("root of psi(z) + z - 1 not bracketed in (m, 1/2]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12:
            break
    z0 = 0.5 * (lo + hi)

    a, b, c, d = -m - z0, -m, 1.0 - m, 2.0 - m - z0
    h = (d - a) / n
    values = a + (np.arange(n) + 0.5) * h
    space = ScenarioSpace(np.full(n, 1.0 / n))
    outer = tuple(int(i) for i in np.where((values < b) | (values >= c))[0])
    middle = tuple(int(i) for i in np.where((values >= b) & (values < c))[0])
    filtration = Filtration((
        (tuple(range(n)),),
        (outer, middle),
        tuple((i,) for i in range(n)),
    ))
    rho0 = -a - (d - a) * m
    rho1_outer = -(a + d) / 2.0 + (d - a) / 2.0 * (
        float(psi(2.0 * (b - a) / (d - a))) - m
    )
    rho1_middle = -b - (d - a) / 2.0 * m
    expected = {
        "rho_1": [rho1_outer, rho1_middle],
        "rho_0": [rho0],
    }
    tol = 10.0 * (d - a) / n
    ce = Counterexample(
        f"weakacc_continuous_n{n}", space, filtration,
        RandomVariable(values), psi, expected, tol,
    )
    return ce

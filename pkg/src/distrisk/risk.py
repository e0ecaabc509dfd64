"""Per-cell risk evaluators on a finite filtered space.

Everything here is exact on finite supports: the distorted-expectation
evaluator is a sorted cumulative sum, quantiles scan CDF breakpoints, and the
tail-mean integrals are step integrals with closed-form pieces.  All
operations return one value per information cell at the requested time.
"""

from __future__ import annotations

import numpy as np

from .distortion import Distortion, DistortionMeasure, MinVar, psi_from_measure
from .space import (
    AdaptedValue,
    DiscreteDistribution,
    DomainError,
    Filtration,
    RandomVariable,
    ScenarioSpace,
    conditional_distribution,
)


def _cell_laws(space, filtration, X, t):
    return [
        conditional_distribution(space, filtration, X, t, k)
        for k in range(filtration.n_cells(t))
    ]


def distribution_choquet(dist: DiscreteDistribution, psi: Distortion) -> float:
    """Distorted negative expectation of a finite law.

    With sorted support x_1 < ... < x_n and cumulative weights F_i this is
    -sum_i x_i (psi(F_i) - psi(F_{i-1})), the exact value of the
    tail-distorted integral for step distributions.
    """
    F = np.cumsum(dist.weights)
    F[-1] = 1.0
    psi_F = np.asarray(psi(F), dtype=float)
    increments = np.diff(np.concatenate(([0.0], psi_F)))
    return -float(dist.support @ increments)


def choquet(
    space: ScenarioSpace,
    filtration: Filtration,
    X: RandomVariable,
    t: int,
    psi: Distortion,
) -> AdaptedValue:
    """Distortion risk of X given the information at time t, per cell."""
    if not psi.regular:
        raise DomainError("risk evaluation needs a concave continuous distortion")
    vals = [distribution_choquet(d, psi) for d in _cell_laws(space, filtration, X, t)]
    return AdaptedValue(t, np.asarray(vals))


def distribution_quantile_upper(dist: DiscreteDistribution, alpha: float) -> float:
    """sup of the set where the CDF stays <= alpha."""
    F = np.cumsum(dist.weights)
    idx = int(np.argmax(F > alpha)) if np.any(F > alpha) else dist.support.size - 1
    return float(dist.support[idx])


def distribution_quantile_lower(dist: DiscreteDistribution, alpha: float) -> float:
    """inf of the set where the CDF reaches alpha."""
    F = np.cumsum(dist.weights)
    F[-1] = 1.0
    idx = int(np.argmax(F >= alpha))
    return float(dist.support[idx])


def _check_alpha_open(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError("quantile level must lie in (0, 1)")
    return alpha


def quantile_upper(space, filtration, X, t, alpha) -> AdaptedValue:
    """Upper conditional quantile at level alpha, per cell."""
    alpha = _check_alpha_open(alpha)
    vals = [
        distribution_quantile_upper(d, alpha)
        for d in _cell_laws(space, filtration, X, t)
    ]
    return AdaptedValue(t, np.asarray(vals))


def quantile_lower(space, filtration, X, t, alpha) -> AdaptedValue:
    """Lower conditional quantile at level alpha, per cell."""
    alpha = _check_alpha_open(alpha)
    vals = [
        distribution_quantile_lower(d, alpha)
        for d in _cell_laws(space, filtration, X, t)
    ]
    return AdaptedValue(t, np.asarray(vals))


def var(space, filtration, X, t, alpha) -> AdaptedValue:
    """Value at risk: negated upper conditional quantile."""
    q = quantile_upper(space, filtration, X, t, alpha)
    return AdaptedValue(t, -q.cell_values)


def distribution_avar(dist: DiscreteDistribution, alpha: float) -> float:
    """Tail mean -1/alpha * integral of the upper quantile over (0, alpha).

    The quantile is the step function taking value x_i on the level interval
    (F_{i-1}, F_i]; the integral is the sum of step values times overlap
    lengths with (0, alpha), computed exactly.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError("tail level must lie in (0, 1]")
    F = np.cumsum(dist.weights)
    F[-1] = 1.0
    lo = np.concatenate(([0.0], F[:-1]))
    overlap = np.clip(np.minimum(F, alpha) - lo, 0.0, None)
    return -float(dist.support @ overlap) / alpha


def avar(space, filtration, X, t, alpha) -> AdaptedValue:
    """Conditional average value at risk at level alpha, per cell."""
    vals = [
        distribution_avar(d, alpha) for d in _cell_laws(space, filtration, X, t)
    ]
    return AdaptedValue(t, np.asarray(vals))


def distribution_avar_robust(dist: DiscreteDistribution, alpha: float) -> float:
    """Same tail mean through its change-of-measure maximizer.

    The density is 1/alpha below the upper quantile q, a fractional weight on
    the atom at q chosen so the density integrates to 1, and 0 above.
    """
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError("tail level must lie in (0, 1]")
    if alpha == 1.0:
        return -dist.mean()
    q = distribution_quantile_upper(dist, alpha)
    below = dist.support < q
    at = dist.support == q
    p_below = float(dist.weights[below].sum())
    p_at = float(dist.weights[at].sum())
    eps = (alpha - p_below) / p_at if p_at > 0.0 else 0.0
    density = (below + eps * at) / alpha
    return -float((dist.support * density) @ dist.weights)


def avar_robust(space, filtration, X, t, alpha) -> AdaptedValue:
    """Conditional average value at risk via the maximizing density."""
    vals = [
        distribution_avar_robust(d, alpha)
        for d in _cell_laws(space, filtration, X, t)
    ]
    return AdaptedValue(t, np.asarray(vals))


def distribution_dwvar(dist: DiscreteDistribution, mu: DistortionMeasure) -> float:
    """Mixture of tail means over the levels of mu."""
    return float(
        sum(
            w * distribution_avar(dist, s)
            for s, w in zip(mu.support, mu.weights)
        )
    )


def _distribution_dwvar_quantile_form(
    dist: DiscreteDistribution, psi: Distortion
) -> float:
    """Cross-check: -integral of the upper quantile against the slope of the
    generated distortion."""
    F = np.cumsum(dist.weights)
    F[-1] = 1.0
    lo = np.concatenate(([0.0], F[:-1]))
    # integral over each level interval of the piecewise-linear slope is a
    # difference of distortion values
    weights = np.asarray(psi(F)) - np.asarray(psi(lo))
    return -float(dist.support @ weights)


def dwvar(
    space,
    filtration,
    X,
    t,
    mu: DistortionMeasure,
    cross_check_tol: float = 1e-9,
) -> AdaptedValue:
    """Weighted value at risk given the information at time t, per cell.

    Evaluated as the mixture of tail means; an independent quantile-integral
    form is computed alongside and a disagreement beyond cross_check_tol is
    raised as an internal inconsistency.
    """
    if not isinstance(mu, DistortionMeasure):
        raise DomainError("dwvar needs a finitely supported level measure")
    psi = psi_from_measure(mu)
    out = []
    for d in _cell_laws(space, filtration, X, t):
        v = distribution_dwvar(d, mu)
        v_alt = _distribution_dwvar_quantile_form(d, psi)
        if abs(v - v_alt) > cross_check_tol * max(1.0, abs(v)):
            raise AssertionError(
                f"dwvar internal cross-check failed: {v} vs {v_alt}"
            )
        out.append(v)
    return AdaptedValue(t, np.asarray(out))


def min_iid_rho(space, filtration, X, t, k: int) -> AdaptedValue:
    """Negative conditional mean of the minimum of k conditionally iid copies.

    Built exactly from the tail probabilities: the minimum exceeds y iff all
    copies do, so its survival function is the k-th power of the original.
    """
    k = int(k)
    if k < 1:
        raise DomainError("copy count must be a positive integer")
    out = []
    for d in _cell_laws(space, filtration, X, t):
        F = np.cumsum(d.weights)
        F[-1] = 1.0
        survival = 1.0 - F
        F_min = 1.0 - survival**k
        w_min = np.diff(np.concatenate(([0.0], F_min)))
        out.append(-float(d.support @ w_min))
    return AdaptedValue(t, np.asarray(out))


def minvar_of_copies(k: int) -> MinVar:
    """The distortion whose risk equals the iid-minimum construction with k
    copies."""
    return MinVar(int(k) - 1)

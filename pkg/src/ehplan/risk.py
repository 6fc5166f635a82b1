"""Value-at-Risk and Conditional Value-at-Risk on discrete loss distributions.

Besides evaluating both measures on a finite set of weighted losses, the
module emits the linear reformulation of CVaR used inside the planning
MILP: one threshold variable, one excess variable per scenario and rows
``excess_s >= loss_s - threshold``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .milp import GE, LinExpr, MilpBuilder

_CUM_TOL = 1e-12


class RiskDomainError(ValueError):
    pass


@dataclass(frozen=True)
class LossDistribution:
    losses: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        losses = np.asarray(self.losses, dtype=float).reshape(-1)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if losses.size == 0:
            raise RiskDomainError("empty loss distribution")
        if losses.shape != probs.shape:
            raise RiskDomainError("losses and probabilities differ in length")
        if np.any(probs < 0):
            raise RiskDomainError("negative probability")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise RiskDomainError(f"probabilities sum to {probs.sum()!r}")
        object.__setattr__(self, "losses", losses)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, losses) -> "LossDistribution":
        losses = np.asarray(losses, dtype=float)
        return cls(losses, np.full(losses.size, 1.0 / losses.size))


@dataclass(frozen=True)
class RiskConfig:
    """Confidence level ``alpha`` and risk weight ``beta``.

    ``beta`` above one half weights the tail more than the mean
    (risk-averse); below one half is risk-seeking.
    """

    alpha: float = 0.95
    beta: float = 0.5

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise RiskDomainError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not 0 <= self.beta <= 1:
            raise RiskDomainError(f"beta must lie in [0, 1], got {self.beta}")


def _as_dist(dist) -> LossDistribution:
    if isinstance(dist, LossDistribution):
        return dist
    losses, probs = dist
    return LossDistribution(losses, probs)


def empirical_var(dist: LossDistribution, alpha: float) -> float:
    """Smallest realized loss whose cumulative probability reaches ``alpha``."""
    dist = _as_dist(dist)
    order = np.argsort(dist.losses, kind="stable")
    cum = np.cumsum(dist.probs[order])
    k = int(np.searchsorted(cum, alpha - _CUM_TOL, side="left"))
    k = min(k, len(order) - 1)
    return float(dist.losses[order[k]])


def cvar(dist: LossDistribution, alpha: float) -> float:
    """Mean of the worst ``1 - alpha`` probability mass.

    The atom straddling the quantile contributes only the part of its mass
    that falls inside the tail, which makes the result the exact minimum of
    ``z + E[(loss - z)^+] / (1 - alpha)`` over ``z``.
    """
    dist = _as_dist(dist)
    if not 0 <= alpha < 1:
        raise RiskDomainError(f"alpha must lie in [0, 1), got {alpha}")
    order = np.argsort(-dist.losses, kind="stable")
    losses = dist.losses[order]
    probs = dist.probs[order]
    tail = 1.0 - alpha
    before = np.concatenate([[0.0], np.cumsum(probs)[:-1]])
    weights = np.clip(np.minimum(probs, tail - before), 0.0, None)
    mass = weights.sum()
    if mass <= 0:
        return float(losses[0])
    # average the excess over the smallest tail loss, renormalized by the
    # covered mass, so a flat tail is returned exactly
    anchor = losses[np.flatnonzero(weights > 0)[-1]]
    return float(anchor + weights @ (losses - anchor) / mass)


def cvar_objective(dist: LossDistribution, alpha: float, zeta: float) -> float:
    """The auxiliary function ``zeta + E[(loss - zeta)^+] / (1 - alpha)``."""
    dist = _as_dist(dist)
    return float(zeta + dist.probs @ np.maximum(dist.losses - zeta, 0.0) / (1.0 - alpha))


def risk_objective(losses, probs, risk: RiskConfig) -> float:
    """``(1 - beta) * mean + beta * CVaR`` of a loss vector."""
    dist = LossDistribution(losses, probs)
    mean = float(dist.probs @ dist.losses)
    return (1.0 - risk.beta) * mean + risk.beta * cvar(dist, risk.alpha)


@dataclass(frozen=True)
class RiskTerms:
    zeta: int
    excess: np.ndarray
    rows: np.ndarray
    zeta_coef: float
    excess_coef: np.ndarray
    loss_weight: np.ndarray


def emit_risk_terms(
    builder: MilpBuilder,
    loss_exprs: Sequence[LinExpr],
    probs,
    risk: RiskConfig,
    weight: float = 1.0,
    zeta_lb: float = -np.inf,
) -> RiskTerms:
    """Add the CVaR threshold, excess variables and coupling rows.

    The objective receives ``weight * ((1 - beta) * sum p_s loss_s +
    beta * (zeta + sum p_s excess_s / (1 - alpha)))``. With the excess
    variables at their smallest feasible values this equals ``weight``
    times :func:`risk_objective` of the scenario losses.
    """
    probs = np.asarray(probs, dtype=float)
    if len(loss_exprs) != len(probs):
        raise RiskDomainError("one loss expression per scenario is required")
    n = len(probs)
    zeta = int(builder.add_vars("cvar_zeta", (), lb=zeta_lb))
    excess = builder.add_vars("cvar_excess", (n,), lb=0.0)
    rows = np.empty(n, dtype=np.int64)
    for s, expr in enumerate(loss_exprs):
        # excess_s - loss_s + zeta >= loss constant
        idx = np.r_[excess[s], expr.idx, zeta]
        coef = np.r_[1.0, -expr.coef, 1.0]
        rows[s] = builder.add_rows("cvar_excess", [(idx[None, :], coef[None, :])], GE, expr.const, shape=(1,))[0]
    zeta_coef = weight * risk.beta
    excess_coef = weight * risk.beta * probs / (1.0 - risk.alpha)
    loss_weight = weight * (1.0 - risk.beta) * probs
    builder.add_objective(np.array([zeta]), zeta_coef)
    builder.add_objective(excess, excess_coef)
    for s, expr in enumerate(loss_exprs):
        builder.add_expr_objective(expr, loss_weight[s])
    return RiskTerms(zeta, excess, rows, zeta_coef, excess_coef, loss_weight)

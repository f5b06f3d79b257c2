"""Descent-cone geometry of the nuclear norm.

Tangent spaces of the fixed-rank manifold, the subdifferential membership
test, the closure characterization of the descent cone

    closure(D(X)) = { Z : -Re <UV*, Z>_F >= || P_Tperp(Z) ||_* },

the maximal-descent step bound for rank-one base points, and membership in
the well-aligned cone slice used by the stability analysis.  Membership
tests return margins, not just booleans, so experiments can record how
close a direction sits to the cone boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .frames import FrameMatrix, incoherence_mu
from .numerics import (
    DEFAULT_TRUNC_TOL,
    SvdFactors,
    frobenius_norm,
    nuclear_norm,
    re_inner,
    spectral_norm,
    svd,
)


def default_tol(X) -> float:
    """Documented floating-point slack: ``1e-8 * max(1, ||X||_F)``."""
    return 1e-8 * max(1.0, frobenius_norm(X))


@dataclass(frozen=True)
class TangentSpace:
    """Tangent space ``{U A* + B V*}`` at a fixed-rank point."""

    factors: SvdFactors
    uv_star: np.ndarray

    @property
    def rank(self) -> int:
        return self.factors.rank


def tangent_space(X, trunc_tol: float = DEFAULT_TRUNC_TOL) -> TangentSpace:
    X = np.asarray(X)
    factors = svd(X, trunc_tol)
    if factors.rank == 0:
        raise ArgumentError("tangent space is undefined at the zero matrix")
    return TangentSpace(factors=factors, uv_star=factors.uv_star())


def project_T(ts: TangentSpace, M) -> np.ndarray:
    """``P_T(M) = P_U M + P_Uperp M P_V``."""
    M = np.asarray(M)
    U, V = ts.factors.U, ts.factors.V
    PU_M = U @ (U.conj().T @ M)
    return PU_M + ((M - PU_M) @ V) @ V.conj().T


def project_Tperp(ts: TangentSpace, M) -> np.ndarray:
    return np.asarray(M) - project_T(ts, M)


@dataclass(frozen=True)
class SubdifferentialCheck:
    member: bool
    tangent_residual: float   # || P_T W - UV* ||_F
    normal_spectral: float    # || P_Tperp W ||


def in_subdifferential(X, W, tol: float | None = None) -> SubdifferentialCheck:
    """Test ``W in d||.||_*(X)``: tangent part equals ``UV*``, normal part contracts."""
    ts = tangent_space(X)
    if tol is None:
        tol = default_tol(X)
    tangent_residual = frobenius_norm(project_T(ts, W) - ts.uv_star)
    normal_spectral = spectral_norm(project_Tperp(ts, W)) if min(W.shape) else 0.0
    member = tangent_residual <= tol and normal_spectral <= 1.0 + tol
    return SubdifferentialCheck(member, tangent_residual, normal_spectral)


@dataclass(frozen=True)
class ConeCheck:
    member: bool
    margin: float  # -Re<UV*, Z> - ||P_Tperp Z||_*


def in_descent_cone_closure(X, Z, tol: float | None = None) -> ConeCheck:
    """Closure membership via the alignment-vs-normal-mass inequality."""
    ts = tangent_space(X)
    if tol is None:
        tol = default_tol(X)
    margin = -re_inner(ts.uv_star, Z) - nuclear_norm(project_Tperp(ts, Z))
    return ConeCheck(member=margin >= -tol, margin=float(margin))


def alignment(X0, Z) -> float:
    """``-Re <Z, X0>_F / ||X0||_F``; positive when Z points against X0."""
    nrm = frobenius_norm(X0)
    if nrm == 0:
        raise ArgumentError("X0 must be nonzero")
    return -re_inner(Z, X0) / nrm


def max_descent_step_bound(X, Z) -> float:
    """Ceiling on the step length that can keep the nuclear norm non-increasing.

    For rank-one ``X`` and any descent-cone direction ``Z``, a step ``Z``
    with ``||X + Z||_* <= ||X||_*`` must satisfy
    ``||Z||_F <= -2 Re <X, Z/||Z||_F>``.  The returned value may be
    negative, in which case no positive step in direction ``Z`` keeps the
    norm non-increasing by this bound.
    """
    Z = np.asarray(Z)
    zn = frobenius_norm(Z)
    if zn == 0:
        raise ArgumentError("Z must be nonzero")
    if tangent_space(X).rank != 1:
        raise ArgumentError("the maximal-descent bound is stated for rank-one X")
    return -2.0 * re_inner(X, Z) / zn


@dataclass(frozen=True)
class ConeSliceCheck:
    member: bool
    incoherence: float
    unit_deviation: float  # | ||Z||_F - 1 |
    cone_margin: float
    alignment: float


def in_E_mu_delta(fm: FrameMatrix, X0, Z, mu: float, delta: float,
                  tol: float | None = None) -> ConeSliceCheck:
    """Membership in the well-aligned unit slice of the descent cone.

    Requires: the left factor of the rank-one ``X0`` is ``mu``-incoherent
    against the frame, ``||Z||_F = 1``, ``Z`` lies in the descent-cone
    closure of ``X0``, and the alignment against ``X0`` is at least
    ``delta``.
    """
    X0 = np.asarray(X0)
    ts = tangent_space(X0)
    if ts.rank != 1:
        raise ArgumentError("X0 must be rank one")
    if tol is None:
        tol = default_tol(X0)
    h_dir = ts.factors.U[:, 0]
    mu_val = incoherence_mu(fm, h_dir)
    unit_dev = abs(frobenius_norm(Z) - 1.0)
    cone = in_descent_cone_closure(X0, Z, tol)
    align = alignment(X0, Z)
    member = (
        mu_val <= mu + tol
        and unit_dev <= tol
        and cone.member
        and align >= delta - tol
    )
    return ConeSliceCheck(member=member, incoherence=float(mu_val),
                          unit_deviation=float(unit_dev),
                          cone_margin=cone.margin, alignment=float(align))

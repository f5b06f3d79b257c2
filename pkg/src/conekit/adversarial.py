"""Adversarial noise certificates for both measurement models.

For an admissible instance the construction produces a rank-one matrix
``W`` in the kernel of the measurement operator that is unusually close to
the tangent space at the ground truth, then tilts it into the descent cone
with ``Z = W - beta * (normalized ground truth)``.  Because ``A(W) = 0``,
the measured ratio ``||A(Z)|| / ||Z||_F`` collapses like the mixing weight
``beta``, certifying an upper bound on the minimum conic singular value.
``adversarial_noise`` then turns a certificate into a concrete bounded
noise vector plus a feasible alternative solution that the program prefers
to the truth while sitting far away in Frobenius distance.

Certificates are built on the unit-normalized ground truth (rescaling does
not change the descent cone); ``adversarial_noise`` maps steps back to the
caller's units and additionally rescales the direction by the largest unit
step that keeps the nuclear norm non-increasing, so the advertised
properties hold for every ``t`` in ``(0, 1]``, not only for
infinitesimal steps.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AdmissibilityError,
    ArgumentError,
    CertificateIntegrityError,
    DegenerateInputError,
    DimensionError,
)
from .frames import FrameMatrix, blocks, incoherence_mu
from .geometry import (
    alignment,
    in_descent_cone_closure,
    project_T,
    project_Tperp,
    tangent_space,
)
from .measurement import (
    CompletionInstance,
    DeconvInstance,
    deconv_forward,
    mc_forward,
)
from .numerics import complex_gaussian, frobenius_norm, nuclear_norm

KERNEL_TOL = 1e-9
DESCENT_MARGIN_TOL = 1e-9
RANK_REVEAL_TOL = 1e-10

CERT_FILE_SCHEMA = 1


def _max_unit_descent_scale(X0, Z, slack: float = 1e-12) -> float:
    """Largest ``s`` in (0, 1] with ``||X0 + s Z||_* <= ||X0||_*`` (0 if none).

    The nuclear norm along the ray is convex and strictly decreasing at 0
    for strict-margin cone members, so its sublevel set is an interval and
    bisection on the predicate is exact.
    """
    nuc0 = nuclear_norm(X0)
    tol = slack * max(1.0, nuc0)

    def descends(s):
        return nuclear_norm(X0 + s * Z) <= nuc0 + tol

    if descends(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if descends(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class DeconvCertificate:
    block_index: int
    anchor_col: int
    m_par: np.ndarray
    m_perp: np.ndarray
    W: np.ndarray
    beta: float
    Z: np.ndarray
    ratio: float
    event1_holds: bool
    event2_holds: bool
    tau0: float
    margin: float
    max_descent_scale: float
    phase: complex
    anchor_overlap: float          # |<h0, e_anchor>| on the normalized h0
    m_par_sq_all: list = field(default_factory=list)

    @property
    def kind(self) -> str:
        return "deconv"


@dataclass(frozen=True)
class CompletionCertificate:
    row_index: int
    x: np.ndarray
    w_a: np.ndarray
    W: np.ndarray
    beta: float
    Z: np.ndarray
    ratio: float
    proj_norm: float               # ||P_{N_a} V||
    event1_holds: bool
    event2_holds: bool
    tau0: float
    margin: float
    max_descent_scale: float
    phase: float

    @property
    def kind(self) -> str:
        return "completion"


def _orthonormal_column_basis(M, tol: float = RANK_REVEAL_TOL):
    """Rank-revealing orthonormal basis of the column span (SVD based)."""
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise DegenerateInputError("degenerate span: all columns vanish")
    rank = int(np.sum(s > tol * s[0]))
    if rank < min(M.shape):
        raise DegenerateInputError(
            f"degenerate draw: span has numerical rank {rank} < {min(M.shape)}"
        )
    return U[:, :rank]


def deconv_certificate(inst: DeconvInstance) -> DeconvCertificate:
    """Kernel certificate for a tetris-frame deconvolution instance.

    For each orthogonality block the signal is split against the random
    span of the block's Gaussian rows; a block is admissible when the
    squared parallel mass lies in the two-sided window
    ``[L/(2KN), 6L/(KN)]``.  Among admissible blocks the one with the
    smallest parallel mass wins (ties to the lowest index).
    """
    fm = inst.frame
    L, K, N = inst.L, inst.K, inst.N
    if fm.kind != "spectral_tetris":
        raise DimensionError("deconv certificates require a spectral_tetris frame")
    if K < 3:
        raise DimensionError("need K >= 3 so at least one block exists")
    if 36 * L > K * N:
        raise DimensionError(f"need L <= K*N/36, got L={L}, K*N/36={K * N / 36:.2f}")
    if np.linalg.norm(inst.h0) == 0 or np.linalg.norm(inst.m0) == 0:
        raise ArgumentError("h0 and m0 must be nonzero")

    hh = inst.h0 / np.linalg.norm(inst.h0)
    mm = inst.m0 / np.linalg.norm(inst.m0)
    x0_hat = np.outer(hh, mm.conj())

    part = blocks(fm)
    lo, hi = L / (2.0 * K * N), 6.0 * L / (K * N)
    bases = []
    m_par_sq = []
    for idx in part.blocks:
        Q = _orthonormal_column_basis(inst.c_rows[idx].T)
        bases.append(Q)
        m_par_sq.append(float(np.linalg.norm(Q.conj().T @ mm) ** 2))
    admissible = [i for i, p in enumerate(m_par_sq) if lo <= p <= hi]
    event2 = bool(admissible)
    if not event2:
        raise AdmissibilityError(
            f"no block has parallel mass in [{lo:.3e}, {hi:.3e}]", m_par_sq
        )
    i_star = min(admissible, key=lambda i: (m_par_sq[i], i))
    Q = bases[i_star]
    anchor = part.anchor_cols[i_star]

    m_par = Q @ (Q.conj().T @ mm)
    m_perp = mm - m_par
    m_perp = m_perp - Q @ (Q.conj().T @ m_perp)  # one reorthogonalization pass
    perp_norm = float(np.linalg.norm(m_perp))
    if perp_norm <= 1e-12:
        raise DegenerateInputError("signal lies entirely in the block span")

    overlap = complex(hh[anchor])
    # unit phase making -Re<W, x0_hat> = |overlap| * ||m_perp||; 1 when the
    # anchor coordinate vanishes (any unit phase keeps the descent chain valid)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0 + 0j
    e_anchor = np.zeros(K, dtype=np.complex128)
    e_anchor[anchor] = 1.0
    W = -phase * np.outer(e_anchor, (m_perp / perp_norm).conj())
    beta = 3.0 * np.sqrt(L / (K * N))
    Z = W - beta * x0_hat

    a_w = float(np.linalg.norm(deconv_forward(inst, W)))
    a_z = float(np.linalg.norm(deconv_forward(inst, Z)))
    a_x0 = float(np.linalg.norm(deconv_forward(inst, x0_hat)))
    event1 = a_x0 < 2.0
    z_norm = frobenius_norm(Z)
    ratio = a_z / z_norm
    margin = in_descent_cone_closure(x0_hat, Z).margin

    w_norm = frobenius_norm(W)
    if abs(w_norm - 1.0) > 1e-10:
        raise CertificateIntegrityError(f"||W||_F = {w_norm} != 1")
    if a_w > KERNEL_TOL * w_norm:
        raise CertificateIntegrityError(f"||A(W)|| = {a_w:.3e} exceeds {KERNEL_TOL}")
    if z_norm < 0.5:
        raise CertificateIntegrityError(f"||Z||_F = {z_norm} < 1/2")
    if margin < -DESCENT_MARGIN_TOL:
        raise CertificateIntegrityError(f"descent-cone margin {margin:.3e} is negative")

    scale = _max_unit_descent_scale(x0_hat, Z)
    if scale <= 0.0:
        raise CertificateIntegrityError("no positive descent step exists")

    return DeconvCertificate(
        block_index=i_star,
        anchor_col=anchor,
        m_par=m_par,
        m_perp=m_perp,
        W=W,
        beta=beta,
        Z=Z,
        ratio=ratio,
        event1_holds=bool(event1),
        event2_holds=event2,
        tau0=a_z / 2.0,
        margin=float(margin),
        max_descent_scale=float(scale),
        phase=complex(phase),
        anchor_overlap=float(abs(overlap)),
        m_par_sq_all=m_par_sq,
    )


def mc_certificate(inst: CompletionInstance, x=None) -> CompletionCertificate:
    """Kernel certificate for an entry-sampling instance.

    Picks the row whose observed columns see the right factor least
    (smallest ``||P_{N_a} V||``), builds the kernel direction supported on
    that row's unobserved columns, and tilts by ``beta = 2 sqrt(m / (r^2
    n1 n2))``.
    """
    n1, n2, m, r = inst.n1, inst.n2, inst.m, inst.r
    if r < 1:
        raise ArgumentError("ground truth must have rank >= 1")
    if r > n2:
        raise DimensionError(f"rank {r} exceeds n2 = {n2}")
    if 32 * m > n1 * n2:
        raise DimensionError(f"need m <= n1*n2/32, got m={m}, n1*n2/32={n1 * n2 / 32:.2f}")
    if x is None:
        x = np.zeros(r)
        x[0] = 1.0
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (r,) or abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ArgumentError(f"x must be a unit vector of length {r}")

    U, V = inst.factors.U, inst.factors.V
    proj_norms = np.empty(n1)
    for a in range(n1):
        cols = inst.measured_cols(a)
        if cols.size == 0:
            proj_norms[a] = 0.0
        else:
            proj_norms[a] = np.linalg.svd(V[cols], compute_uv=False)[0]
    a_star = int(np.argmin(proj_norms))
    proj_norm = float(proj_norms[a_star])
    event2 = proj_norm <= np.sqrt(2.0 * m / (n1 * n2))

    w_a = V @ x
    w_a[inst.measured_cols(a_star)] = 0.0
    if np.linalg.norm(w_a) == 0:
        raise DegenerateInputError("kernel direction vanished: row fully observed on Vx")

    uv_star = U @ V.T
    q = float(uv_star[a_star] @ w_a)  # <e_a w_a*, UV*>_F in the real case
    phase = float(np.sign(q)) if q != 0 else 1.0
    e_a = np.zeros(n1)
    e_a[a_star] = 1.0
    W = -phase * np.outer(e_a, w_a)
    beta = 2.0 * np.sqrt(m / (r ** 2 * n1 * n2))
    Z = W - beta * uv_star

    a_w = float(np.linalg.norm(mc_forward(inst, W)))
    a_uv = float(np.linalg.norm(mc_forward(inst, uv_star)))
    a_z = float(np.linalg.norm(mc_forward(inst, Z)))
    event1 = a_uv ** 2 <= 2.0 * r
    z_norm = frobenius_norm(Z)
    ratio = a_z / z_norm
    margin = in_descent_cone_closure(inst.X0, Z).margin

    if a_w > KERNEL_TOL * max(1.0, frobenius_norm(W)):
        raise CertificateIntegrityError(f"||A(W)|| = {a_w:.3e} exceeds {KERNEL_TOL}")
    if z_norm <= 0.5:
        raise CertificateIntegrityError(f"||Z||_F = {z_norm} <= 1/2")
    if event2:
        ts = tangent_space(inst.X0)
        normal_mass = nuclear_norm(project_Tperp(ts, Z))
        if normal_mass > np.sqrt(2.0 * m / (n1 * n2)) + 1e-9:
            raise CertificateIntegrityError(
                f"normal mass {normal_mass:.3e} exceeds sqrt(2m/n1n2)"
            )
        if margin < -DESCENT_MARGIN_TOL:
            raise CertificateIntegrityError(f"descent-cone margin {margin:.3e} is negative")

    scale = _max_unit_descent_scale(inst.X0, Z) if margin > 0 else 0.0

    return CompletionCertificate(
        row_index=a_star,
        x=x,
        w_a=w_a,
        W=W,
        beta=beta,
        Z=Z,
        ratio=ratio,
        proj_norm=proj_norm,
        event1_holds=bool(event1),
        event2_holds=bool(event2),
        tau0=a_z / 2.0,
        margin=float(margin),
        max_descent_scale=float(scale),
        phase=phase,
    )


def _forward_for(cert, inst):
    if isinstance(cert, DeconvCertificate):
        return lambda X: deconv_forward(inst, X)
    return lambda X: mc_forward(inst, X)


def adversarial_noise(cert, inst, t: float):
    """Bounded noise plus the feasible alternative solution it admits.

    Returns ``(e, y, x_tilde, report)`` with ``e = (t/2) A(Z_eff)``,
    ``y = A(X0) + e`` and ``x_tilde = X0 + t Z_eff``, where ``Z_eff`` is
    the certificate direction mapped to the instance's units and rescaled
    by the certificate's maximal unit descent step.  By construction
    ``||A(x_tilde) - y|| = t * tau0`` exactly, ``x_tilde`` is preferred by
    the program, and its distance from the truth carries the
    dimension-scaling lower bound.  Violations raise
    :class:`CertificateIntegrityError`.
    """
    if not 0.0 < t <= 1.0:
        raise ArgumentError("t must lie in (0, 1]")
    if cert.max_descent_scale <= 0.0:
        raise CertificateIntegrityError("certificate admits no positive descent step")
    forward = _forward_for(cert, inst)
    if isinstance(cert, DeconvCertificate):
        X0 = inst.x0()
        unit_scale = frobenius_norm(X0)  # certificate lives on the normalized truth
        dim_factor = np.sqrt(inst.K * inst.N / inst.L)
        c3 = 12.0
    else:
        X0 = inst.X0
        unit_scale = 1.0
        dim_factor = np.sqrt(inst.r * inst.n1 * inst.n2 / inst.m)
        c3 = 8.0

    z_eff = (cert.max_descent_scale * unit_scale) * cert.Z
    a_z = forward(z_eff)
    tau0 = float(np.linalg.norm(a_z)) / 2.0
    e = (t / 2.0) * a_z
    y = forward(X0) + e
    x_tilde = X0 + t * z_eff

    feas = float(np.linalg.norm(forward(x_tilde) - y))
    feas_dev = abs(feas - t * tau0)
    nuc_x0 = nuclear_norm(X0)
    nuc_excess = nuclear_norm(x_tilde) - nuc_x0
    distance = frobenius_norm(x_tilde - X0)
    distance_bound = (t * tau0 / c3) * dim_factor
    beta_eff = t * cert.max_descent_scale * cert.beta
    if isinstance(cert, DeconvCertificate):
        collinear_floor = (1.0 - beta_eff) * nuc_x0
    else:
        sig = inst.factors.sigma
        collinear_floor = float(np.sum(np.abs(sig - beta_eff)))

    report = {
        "t": float(t),
        "tau0": tau0,
        "noise_norm": float(np.linalg.norm(e)),
        "feasibility_deviation": float(feas_dev),
        "nuclear_excess": float(nuc_excess),
        "distance": float(distance),
        "distance_bound": float(distance_bound),
        "descent_scale": float(cert.max_descent_scale),
        "collinear_floor": float(collinear_floor),
        "collinearity_strict": bool(nuclear_norm(x_tilde) > collinear_floor),
    }
    if feas_dev > 1e-9 * max(1.0, t * tau0):
        raise CertificateIntegrityError(f"feasibility equality violated by {feas_dev:.3e}")
    if nuc_excess > 1e-9:
        raise CertificateIntegrityError(f"alternative is not preferred: excess {nuc_excess:.3e}")
    if distance < distance_bound - 1e-12:
        raise CertificateIntegrityError(
            f"distance {distance:.3e} below the certified bound {distance_bound:.3e}"
        )
    return e, y, x_tilde, report


@dataclass(frozen=True)
class DescentSample:
    Z: np.ndarray
    alignment: float
    margin: float
    incoherence: float


def sample_descent_cone(fm: FrameMatrix, X0, count: int, seed) -> list:
    """Unit-Frobenius descent-cone members with spread-out alignments.

    Each sample is ``-a * UV* + b * (tangent noise) + c * (normal noise)``
    with ``a`` drawn across (0, 1) and ``c`` capped so the closure
    inequality holds with a random slack; every output passes the closure
    membership test by construction.
    """
    X0 = np.asarray(X0)
    ts = tangent_space(X0)
    if ts.rank != 1:
        raise ArgumentError("the sampler targets rank-one base points")
    K, N = X0.shape
    uv = ts.uv_star
    h_dir = ts.factors.U[:, 0]
    mu_val = incoherence_mu(fm, h_dir) if fm is not None else float("nan")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        G = complex_gaussian(rng, (K, N))
        Gt = project_T(ts, G)
        Gt = Gt - np.vdot(uv, Gt) * uv  # strip the UV* component entirely
        Gp = project_Tperp(ts, G)
        nt = frobenius_norm(Gt)
        np_f = frobenius_norm(Gp)
        np_n = nuclear_norm(Gp)
        a = rng.uniform(0.02, 0.98)
        c_cap = a * np_f / np_n if np_n > 0 else 0.0
        c = min(rng.uniform(0.0, 1.0) * c_cap, np.sqrt(max(1.0 - a * a, 0.0)))
        b = np.sqrt(max(1.0 - a * a - c * c, 0.0))
        Z = -a * uv
        if nt > 0:
            Z = Z + (b / nt) * Gt
        if np_f > 0:
            Z = Z + (c / np_f) * Gp
        Z = Z / frobenius_norm(Z)
        check = in_descent_cone_closure(X0, Z)
        out.append(DescentSample(Z=Z, alignment=alignment(X0, Z),
                                 margin=check.margin, incoherence=mu_val))
    return out


# ---------------------------------------------------------------------------
# serialization


def content_hash(cert) -> str:
    """Deterministic hash of the certificate's defining arrays."""
    h = hashlib.sha256()
    h.update(cert.kind.encode())
    for arr in (cert.W, cert.Z):
        arr = np.ascontiguousarray(arr)
        h.update(str(arr.shape).encode())
        h.update(arr.tobytes())
    return h.hexdigest()[:16]


def _cert_scalars(cert) -> dict:
    common = {
        "schema_version": CERT_FILE_SCHEMA,
        "kind": cert.kind,
        "beta": cert.beta,
        "ratio": cert.ratio,
        "tau0": cert.tau0,
        "margin": cert.margin,
        "max_descent_scale": cert.max_descent_scale,
        "event1_holds": cert.event1_holds,
        "event2_holds": cert.event2_holds,
        "content_hash": content_hash(cert),
    }
    if isinstance(cert, DeconvCertificate):
        common.update(block_index=cert.block_index, anchor_col=cert.anchor_col,
                      anchor_overlap=cert.anchor_overlap,
                      phase=[cert.phase.real, cert.phase.imag],
                      m_par_sq_all=cert.m_par_sq_all)
    else:
        common.update(row_index=cert.row_index, proj_norm=cert.proj_norm,
                      phase=cert.phase)
    return common


def save_certificate(cert, path) -> None:
    """Write ``<path>.json`` (scalars, events, bounds) + ``<path>.npz`` (matrices)."""
    path = Path(path)
    path.with_suffix(".json").write_text(json.dumps(_cert_scalars(cert), indent=2) + "\n")
    arrays = {"W": cert.W, "Z": cert.Z}
    if isinstance(cert, DeconvCertificate):
        arrays.update(m_par=cert.m_par, m_perp=cert.m_perp)
    else:
        arrays.update(w_a=cert.w_a, x=cert.x)
    np.savez(path.with_suffix(".npz"), **arrays)

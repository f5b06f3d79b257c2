"""Deterministic isometries ``B`` (rows ``b_l``) and their diagnostics.

The workhorse constructor is :func:`spectral_tetris`, the greedy sparse
unit-norm tight frame whose rows are 1-sparse or 2-sparse with neighboring
support.  Rows of the stored matrix are the measurement vectors ``b_l``
used throughout the package; the time-domain embedding only exists inside
the FFT consistency check of the measurement module.

Also here: the orthogonality blocks of a tetris frame, the coherence
parameters ``mu_max`` and ``mu_h``, and the (weak) B1 norms of a matrix
profile ``(||W* b_l||)_l``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, DimensionError, FrameIntegrityError
from .numerics import complex_gaussian

ISOMETRY_TOL = 1e-10

FRAME_FILE_SCHEMA = 1


@dataclass(frozen=True)
class FrameMatrix:
    """An ``L x K`` matrix with orthonormal columns; rows are the ``b_l``."""

    B: np.ndarray
    kind: str = "custom"

    @property
    def L(self) -> int:
        return int(self.B.shape[0])

    @property
    def K(self) -> int:
        return int(self.B.shape[1])

    def row(self, ell: int) -> np.ndarray:
        return self.B[ell]


def frame_matrix(B, kind: str = "custom", check: bool = True) -> FrameMatrix:
    """Wrap a dense matrix as a frame, optionally verifying the isometry."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] < B.shape[1] or B.shape[1] < 1:
        raise DimensionError(f"frame must be L x K with L >= K >= 1, got {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ArgumentError("frame contains non-finite entries")
    if check:
        gram = B.conj().T @ B
        dev = float(np.max(np.abs(gram - np.eye(B.shape[1]))))
        if dev > ISOMETRY_TOL:
            raise FrameIntegrityError(f"columns are not orthonormal: max |B*B - I| = {dev:.3e}")
    return FrameMatrix(B=B, kind=kind)


def spectral_tetris(L: int, K: int) -> FrameMatrix:
    """Greedy sparse unit-norm tight frame, rescaled to an isometry.

    Columns are filled left to right.  While the remaining column mass is
    at least 1, a 1-sparse row is emitted; a leftover mass in (0, 1) is
    bridged to the next column by one +/- pair of 2-sparse rows (the pair
    is skipped when the mass is exactly 0).  Column masses are tracked as
    exact integer multiples of 1/K, so the construction is deterministic
    and the last column always closes with 1-sparse rows.

    The returned matrix is the unit-norm frame times ``sqrt(K/L)``, so the
    columns are orthonormal and every row has squared norm ``K/L``
    (``mu_max == 1``).
    """
    if K < 2:
        raise DimensionError(f"need K >= 2, got K={K}")
    if L < K:
        raise DimensionError(f"need L >= K, got L={L}, K={K}")
    rows = []
    k = 0
    mass = L  # K * (remaining mass of column k); integers throughout
    while k < K:
        while mass >= K:
            row = np.zeros(K)
            row[k] = 1.0
            rows.append(row)
            mass -= K
        if mass == 0:
            k += 1
            mass = L
            continue
        # 0 < mass < K: bridge with alpha e_k +/- beta e_{k+1}
        if k + 1 >= K:
            raise FrameIntegrityError("tetris bookkeeping error: leftover mass in last column")
        if L - 2 * K + mass < 0:
            raise DimensionError(
                f"greedy construction infeasible for L={L}, K={K}: "
                "a bridging pair would overfill the next column (2K <= L always works)"
            )
        alpha = np.sqrt(mass / (2.0 * K))
        beta = np.sqrt(1.0 - mass / (2.0 * K))
        for sign in (1.0, -1.0):
            row = np.zeros(K)
            row[k] = alpha
            row[k + 1] = sign * beta
            rows.append(row)
        k += 1
        mass = L - 2 * K + mass
    if len(rows) != L:
        raise FrameIntegrityError(f"tetris produced {len(rows)} rows, expected {L}")
    B = np.asarray(rows) * np.sqrt(K / L)
    fm = frame_matrix(B, kind="spectral_tetris", check=True)
    norms = np.linalg.norm(B, axis=1) ** 2
    if float(np.max(np.abs(norms - K / L))) > ISOMETRY_TOL:
        raise FrameIntegrityError("tetris rows do not have equal norm K/L")
    return fm


def haar_frame(L: int, K: int, seed, field: str = "complex") -> FrameMatrix:
    """Random isometry drawn from the rotation-invariant distribution.

    QR of a Gaussian matrix with the R-diagonal phases folded into Q, which
    makes the draw both Haar-distributed and deterministic per seed.
    """
    if not 1 <= K <= L:
        raise DimensionError(f"need 1 <= K <= L, got L={L}, K={K}")
    rng = np.random.default_rng(seed)
    if field == "complex":
        A = complex_gaussian(rng, (L, K))
    elif field == "real":
        A = rng.standard_normal((L, K))
    else:
        raise ArgumentError(f"field must be 'complex' or 'real', got {field!r}")
    Q, R = np.linalg.qr(A)
    d = np.diagonal(R)
    Q = Q * (d / np.abs(d))
    return frame_matrix(Q, kind="haar", check=True)


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint row-index blocks anchored at every third column."""

    blocks: list
    anchor_cols: list

    def __len__(self) -> int:
        return len(self.blocks)


def blocks(fm: FrameMatrix) -> BlockPartition:
    """Orthogonality blocks of a tetris frame.

    Block ``i`` collects the rows with a nonzero entry in column ``3*i``
    (0-based; columns three apart so rows with neighboring 2-sparse support
    can touch at most one block).  Raises when the blocks fail their
    structural bounds, which would indicate a broken tetris construction.
    """
    if fm.kind != "spectral_tetris":
        raise ArgumentError("blocks are defined for spectral_tetris frames")
    L, K = fm.L, fm.K
    n_blocks = K // 3
    idx_blocks = []
    anchors = []
    for i in range(n_blocks):
        col = 3 * i
        idx = np.nonzero(fm.B[:, col])[0]
        idx_blocks.append(idx)
        anchors.append(col)
    total = sum(len(b) for b in idx_blocks)
    union = np.unique(np.concatenate(idx_blocks)) if idx_blocks else np.array([], dtype=int)
    if union.size != total:
        raise FrameIntegrityError("blocks are not pairwise disjoint")
    if 2 * K <= L:  # the size window is only guaranteed in this regime
        lo, hi = L / K, 3.0 * (L / K + 2.0)
        for i, idx in enumerate(idx_blocks):
            if not lo - 1e-12 <= len(idx) <= hi + 1e-12:
                raise FrameIntegrityError(
                    f"block {i} has size {len(idx)} outside [{lo:.3f}, {hi:.3f}]"
                )
    return BlockPartition(blocks=idx_blocks, anchor_cols=anchors)


def coherence_mu_max(fm: FrameMatrix) -> float:
    """``sqrt((L/K) * max_l ||b_l||^2)``; equals 1 for equal-norm rows."""
    norms_sq = np.sum(np.abs(fm.B) ** 2, axis=1)
    return float(np.sqrt(fm.L / fm.K * np.max(norms_sq)))


def coherence_mu_h(fm: FrameMatrix, h) -> float:
    """``sqrt(L) * max_l |<b_l, h>| / ||h||``."""
    h = np.asarray(h)
    if h.ndim != 1 or h.shape[0] != fm.K:
        raise DimensionError(f"h must be a length-{fm.K} vector, got shape {h.shape}")
    hn = float(np.linalg.norm(h))
    if hn == 0.0:
        raise ArgumentError("h must be nonzero")
    corr = np.abs(fm.B.conj() @ h)  # |<b_l, h>| for every row
    return float(np.sqrt(fm.L) * np.max(corr) / hn)


def incoherence_mu(fm: FrameMatrix, h) -> float:
    """Smallest ``mu`` such that ``sqrt(L) |<b_l, h>| <= mu ||h||`` for all rows.

    Numerically identical to :func:`coherence_mu_h`; exposed separately for
    membership tests of the incoherent set (``h`` belongs iff the returned
    value is at most the prescribed ``mu``).
    """
    return coherence_mu_h(fm, h)


def row_profile(fm: FrameMatrix, W) -> np.ndarray:
    """The vector ``(||W* b_l||)_l``."""
    W = np.asarray(W)
    if W.ndim != 2 or W.shape[0] != fm.K:
        raise DimensionError(f"W must be {fm.K} x N, got shape {W.shape}")
    return np.linalg.norm(fm.B.conj() @ W, axis=1)


def b1_norm(fm: FrameMatrix, W) -> float:
    """l1 norm of the row profile."""
    return float(row_profile(fm, W).sum())


def weak_b1_norm(fm: FrameMatrix, W) -> float:
    """Weak-l1 norm of the row profile: ``max_k k * v_(k)`` (v sorted descending)."""
    prof = np.sort(row_profile(fm, W))[::-1]
    if prof.size == 0:
        return 0.0
    return float(np.max(prof * np.arange(1, prof.size + 1)))


def save_frame(fm: FrameMatrix, path) -> None:
    """Write ``<path>.json`` (header) and ``<path>.bin`` (column-major bytes)."""
    path = Path(path)
    header = {
        "schema_version": FRAME_FILE_SCHEMA,
        "L": fm.L,
        "K": fm.K,
        "kind": fm.kind,
        "dtype": str(fm.B.dtype),
    }
    path.with_suffix(".json").write_text(json.dumps(header, indent=2) + "\n")
    path.with_suffix(".bin").write_bytes(np.asarray(fm.B).tobytes(order="F"))


def load_frame(path) -> FrameMatrix:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    if header.get("schema_version") != FRAME_FILE_SCHEMA:
        raise ArgumentError(f"unsupported frame file schema: {header.get('schema_version')}")
    raw = path.with_suffix(".bin").read_bytes()
    B = np.frombuffer(raw, dtype=np.dtype(header["dtype"]))
    B = B.reshape((header["L"], header["K"]), order="F")
    return frame_matrix(B.copy(), kind=header["kind"], check=True)

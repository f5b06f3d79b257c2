"""The two rank-one measurement operators and their adjoints.

Blind deconvolution measures ``A(X)(l) = b_l* X c_l`` with deterministic
frame rows ``b_l`` and i.i.d. circularly symmetric Gaussian rows ``c_l``;
entry sampling measures ``A(X)(i) = sqrt(n1 n2 / m) X[a_i, b_i]`` with
index pairs drawn uniformly with replacement.  Both instances are frozen
after construction and consume their RNG stream only there, so a (seed,
dims) header regenerates the random payloads bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, DimensionError, NumericError
from .frames import FrameMatrix, frame_matrix
from .numerics import SvdFactors, complex_gaussian, svd, unitary_dft

INSTANCE_FILE_SCHEMA = 1


def _as_seed_list(seed):
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


@dataclass(frozen=True)
class DeconvInstance:
    """Randomized blind-deconvolution problem data."""

    frame: FrameMatrix
    c_rows: np.ndarray  # L x N, entries CN(0,1)
    h0: np.ndarray      # length K
    m0: np.ndarray      # length N
    e: np.ndarray       # length L noise, ||e|| <= tau
    tau: float
    seed: object

    @property
    def L(self) -> int:
        return self.frame.L

    @property
    def K(self) -> int:
        return self.frame.K

    @property
    def N(self) -> int:
        return int(self.c_rows.shape[1])

    def x0(self) -> np.ndarray:
        """The rank-one ground truth ``h0 m0*``."""
        return np.outer(self.h0, self.m0.conj())

    def y(self) -> np.ndarray:
        return deconv_forward(self, self.x0()) + self.e


def _draw_c_rows(L: int, N: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return complex_gaussian(rng, (L, N))


def deconv_instance(frame: FrameMatrix, n_signal: int, h0, m0, seed,
                    e=None, tau: float = 0.0) -> DeconvInstance:
    """Draw the Gaussian rows from ``seed`` and assemble an instance."""
    if n_signal < 1:
        raise DimensionError("n_signal must be >= 1")
    h0 = np.asarray(h0, dtype=np.complex128)
    m0 = np.asarray(m0, dtype=np.complex128)
    if h0.shape != (frame.K,):
        raise DimensionError(f"h0 must have length {frame.K}, got {h0.shape}")
    if m0.shape != (n_signal,):
        raise DimensionError(f"m0 must have length {n_signal}, got {m0.shape}")
    if not (np.all(np.isfinite(h0)) and np.all(np.isfinite(m0))):
        raise ArgumentError("h0 and m0 must be finite")
    if tau < 0:
        raise ArgumentError("tau must be nonnegative")
    if e is None:
        e = np.zeros(frame.L, dtype=np.complex128)
    e = np.asarray(e, dtype=np.complex128)
    if e.shape != (frame.L,):
        raise DimensionError(f"e must have length {frame.L}, got {e.shape}")
    if np.linalg.norm(e) > tau * (1 + 1e-12) + 1e-15:
        raise ArgumentError("noise exceeds the declared bound ||e|| <= tau")
    c_rows = _draw_c_rows(frame.L, n_signal, seed)
    return DeconvInstance(frame=frame, c_rows=c_rows, h0=h0, m0=m0, e=e,
                          tau=float(tau), seed=seed)


def deconv_forward(inst: DeconvInstance, X) -> np.ndarray:
    """``(A(X))(l) = b_l* X c_l`` for every row."""
    X = np.asarray(X)
    if X.shape != (inst.K, inst.N):
        raise DimensionError(f"X must be {inst.K} x {inst.N}, got {X.shape}")
    return ((inst.frame.B.conj() @ X) * inst.c_rows).sum(axis=1)


def deconv_adjoint(inst: DeconvInstance, v) -> np.ndarray:
    """``A*(v) = sum_l v_l b_l c_l*``, adjoint under the antilinear-first pairing."""
    v = np.asarray(v)
    if v.shape != (inst.L,):
        raise DimensionError(f"v must have length {inst.L}, got {v.shape}")
    return (inst.frame.B * v[:, None]).T @ inst.c_rows.conj()


def circular_convolve(w, x) -> np.ndarray:
    """Direct circular convolution ``(w * x)[k] = sum_j w[j] x[(k - j) mod L]``."""
    w = np.asarray(w)
    x = np.asarray(x)
    if w.shape != x.shape or w.ndim != 1:
        raise DimensionError("w and x must be vectors of equal length")
    L = w.size
    idx = (np.arange(L)[:, None] - np.arange(L)[None, :]) % L
    return x[idx] @ w


def fft_consistency(inst: DeconvInstance) -> float:
    """Max deviation between the operator and the convolution it encodes.

    Rebuilds the time-domain filter/signal model (``B_time = F* conj(B)``,
    ``C_time = F* c_rows / sqrt(L)``), convolves directly with modular
    index arithmetic, and compares the DFT of the result against
    :func:`deconv_forward` applied to ``h0 m0*``.
    """
    L = inst.L
    sqrtL = np.sqrt(L)
    B_time = np.fft.ifft(inst.frame.B.conj(), axis=0) * sqrtL
    C_time = np.fft.ifft(inst.c_rows, axis=0)
    w = B_time @ inst.h0
    x = C_time @ inst.m0.conj()
    y_conv = unitary_dft(circular_convolve(w, x))
    y_op = deconv_forward(inst, inst.x0())
    return float(np.max(np.abs(y_conv - y_op)))


@dataclass(frozen=True)
class CompletionInstance:
    """Entry-sampling (matrix completion) problem data."""

    n1: int
    n2: int
    m: int
    row_idx: np.ndarray  # a_i, length m
    col_idx: np.ndarray  # b_i, length m
    X0: np.ndarray       # real n1 x n2 ground truth
    factors: SvdFactors
    e: np.ndarray        # length m noise
    tau: float
    seed: object

    @property
    def r(self) -> int:
        return self.factors.rank

    @property
    def scale(self) -> float:
        return float(np.sqrt(self.n1 * self.n2 / self.m))

    def measured_cols(self, a: int) -> np.ndarray:
        """Sorted distinct column indices observed in row ``a``."""
        return np.unique(self.col_idx[self.row_idx == a])

    def row_measurements(self, a: int) -> np.ndarray:
        """Indices ``i`` with ``a_i == a``."""
        return np.nonzero(self.row_idx == a)[0]

    def y(self) -> np.ndarray:
        return mc_forward(self, self.X0) + self.e


def _draw_pattern(n1: int, n2: int, m: int, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, n1, size=m)
    b = rng.integers(0, n2, size=m)
    return a, b


def completion_instance(X0, m: int, seed, e=None, tau: float = 0.0,
                        trunc_tol: float = 1e-10) -> CompletionInstance:
    """Sample ``m`` index pairs uniformly with replacement from ``seed``."""
    X0 = np.asarray(X0)
    if np.iscomplexobj(X0):
        raise ArgumentError("completion ground truth must be real")
    X0 = X0.astype(np.float64, copy=False)
    if X0.ndim != 2:
        raise DimensionError("X0 must be a matrix")
    n1, n2 = X0.shape
    if n1 < n2:
        raise DimensionError(f"need n1 >= n2, got {X0.shape}")
    if m < 1:
        raise DimensionError("m must be >= 1")
    if tau < 0:
        raise ArgumentError("tau must be nonnegative")
    if e is None:
        e = np.zeros(m)
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (m,):
        raise DimensionError(f"e must have length {m}, got {e.shape}")
    if np.linalg.norm(e) > tau * (1 + 1e-12) + 1e-15:
        raise ArgumentError("noise exceeds the declared bound ||e|| <= tau")
    a, b = _draw_pattern(n1, n2, m, seed)
    return CompletionInstance(n1=n1, n2=n2, m=m, row_idx=a, col_idx=b,
                              X0=X0, factors=svd(X0, trunc_tol), e=e,
                              tau=float(tau), seed=seed)


def haar_lowrank(n1: int, n2: int, r: int, seed, singular_values=None) -> np.ndarray:
    """Real rank-r ground truth with rotation-invariant (incoherent) factors."""
    if not 1 <= r <= min(n1, n2):
        raise DimensionError(f"need 1 <= r <= min(n1, n2), got r={r}")
    rng = np.random.default_rng(seed)
    U, Ru = np.linalg.qr(rng.standard_normal((n1, r)))
    V, Rv = np.linalg.qr(rng.standard_normal((n2, r)))
    U = U * np.sign(np.diagonal(Ru))
    V = V * np.sign(np.diagonal(Rv))
    s = np.ones(r) if singular_values is None else np.asarray(singular_values, dtype=float)
    if s.shape != (r,) or np.any(s <= 0):
        raise ArgumentError("singular_values must be r positive reals")
    return (U * s) @ V.T


def mc_forward(inst: CompletionInstance, X) -> np.ndarray:
    X = np.asarray(X)
    if X.shape != (inst.n1, inst.n2):
        raise DimensionError(f"X must be {inst.n1} x {inst.n2}, got {X.shape}")
    if np.iscomplexobj(X):
        raise ArgumentError("completion operator is real")
    return inst.scale * X[inst.row_idx, inst.col_idx]


def mc_adjoint(inst: CompletionInstance, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (inst.m,):
        raise DimensionError(f"v must have length {inst.m}, got {v.shape}")
    if np.iscomplexobj(v):
        raise ArgumentError("completion operator is real")
    flat = np.bincount(inst.row_idx * inst.n2 + inst.col_idx,
                       weights=inst.scale * v, minlength=inst.n1 * inst.n2)
    return flat.reshape(inst.n1, inst.n2)


def operator_norm_estimate(forward, adjoint, shape, max_iters: int = 2000,
                           tol: float = 1e-9, seed: int = 0) -> float:
    """Largest singular value of the operator by power iteration on ``A* A``."""
    rng = np.random.default_rng(seed)
    X = np.asarray(adjoint(forward(rng.standard_normal(shape))))
    if np.linalg.norm(X) == 0:
        X = np.ones(shape, dtype=X.dtype)
    sigma = 0.0
    for _ in range(max_iters):
        X = X / np.linalg.norm(X)
        fx = forward(X)
        sigma_new = float(np.linalg.norm(fx))
        X = adjoint(fx)
        if abs(sigma_new - sigma) <= tol * max(sigma_new, 1e-300):
            return sigma_new
        sigma = sigma_new
    raise NumericError(f"power iteration did not converge in {max_iters} iterations")


def materialize(forward, shape, dtype=None) -> np.ndarray:
    """Apply ``forward`` to every standard basis matrix; columns of the result.

    Only sensible for small domains (the result is ``m x (rows*cols)``).
    """
    k, n = shape
    cols = []
    E = np.zeros(shape) if dtype is None else np.zeros(shape, dtype=dtype)
    for i in range(k):
        for j in range(n):
            E[i, j] = 1.0
            cols.append(np.asarray(forward(E)))
            E[i, j] = 0.0
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# serialization


def save_instance(inst, path, payload: str = "full") -> None:
    """Write ``<path>.json`` + ``<path>.npz``.

    ``payload='light'`` omits the seed-derived arrays (``c_rows`` or the
    sampling pattern); :func:`load_instance` regenerates them bit-exactly
    from the header.
    """
    if payload not in ("full", "light"):
        raise ArgumentError("payload must be 'full' or 'light'")
    path = Path(path)
    arrays = {}
    if isinstance(inst, DeconvInstance):
        header = {
            "schema_version": INSTANCE_FILE_SCHEMA,
            "kind": "deconv",
            "L": inst.L, "K": inst.K, "N": inst.N,
            "seed": _as_seed_list(inst.seed),
            "tau": inst.tau,
            "frame_kind": inst.frame.kind,
        }
        arrays.update(h0=inst.h0, m0=inst.m0, e=inst.e, frame=inst.frame.B)
        if payload == "full":
            arrays["c_rows"] = inst.c_rows
    elif isinstance(inst, CompletionInstance):
        header = {
            "schema_version": INSTANCE_FILE_SCHEMA,
            "kind": "completion",
            "n1": inst.n1, "n2": inst.n2, "m": inst.m,
            "seed": _as_seed_list(inst.seed),
            "tau": inst.tau,
        }
        arrays.update(X0=inst.X0, e=inst.e)
        if payload == "full":
            arrays["row_idx"] = inst.row_idx
            arrays["col_idx"] = inst.col_idx
    else:
        raise ArgumentError(f"cannot serialize {type(inst).__name__}")
    path.with_suffix(".json").write_text(json.dumps(header, indent=2) + "\n")
    np.savez(path.with_suffix(".npz"), **arrays)


def load_instance(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    if header.get("schema_version") != INSTANCE_FILE_SCHEMA:
        raise ArgumentError(f"unsupported instance file schema: {header.get('schema_version')}")
    data = np.load(path.with_suffix(".npz"))
    seed = header["seed"]
    if header["kind"] == "deconv":
        fm = frame_matrix(data["frame"], kind=header["frame_kind"], check=True)
        inst = deconv_instance(fm, header["N"], data["h0"], data["m0"], seed,
                               e=data["e"], tau=header["tau"])
        if "c_rows" in data and not np.array_equal(data["c_rows"], inst.c_rows):
            raise ArgumentError("stored c_rows do not match the seeded regeneration")
        return inst
    if header["kind"] == "completion":
        inst = completion_instance(data["X0"], header["m"], seed,
                                   e=data["e"], tau=header["tau"])
        if "row_idx" in data and not (
            np.array_equal(data["row_idx"], inst.row_idx)
            and np.array_equal(data["col_idx"], inst.col_idx)
        ):
            raise ArgumentError("stored pattern does not match the seeded regeneration")
        return inst
    raise ArgumentError(f"unknown instance kind {header['kind']!r}")


def random_unit_vector(rng: np.random.Generator, n: int, field: str = "complex") -> np.ndarray:
    """Uniform direction on the sphere (complex by default)."""
    v = complex_gaussian(rng, n) if field == "complex" else rng.standard_normal(n)
    return v / np.linalg.norm(v)


__all__ = [
    "DeconvInstance", "CompletionInstance", "deconv_instance",
    "completion_instance", "deconv_forward", "deconv_adjoint",
    "mc_forward", "mc_adjoint", "fft_consistency", "circular_convolve",
    "operator_norm_estimate", "materialize", "save_instance",
    "load_instance", "haar_lowrank", "random_unit_vector",
]

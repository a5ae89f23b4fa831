"""The seven computational kernels, each with a flop formula attached.

Deterministic-accumulation contract: every kernel reduces over its inner
dimension in ascending order, one rank-1 update at a time, and complex
products are evaluated with the separated real-arithmetic formula
(xr*yr - xi*yi, xr*yi + xi*yr).  numpy's native complex multiply may
contract to FMA on SIMD paths, which perturbs the last ulp; decomposing by
hand keeps every element bit-identical to a scalar triple loop and makes
results independent of tile shape, worker count, and operand strides.

Scalar conventions follow BLAS: beta == 0 means the output is write-only,
alpha == 0 skips the product entirely, and exact unit scalars pass values
through bitwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .matcore import DimensionError, InputError, InvariantError, hermitian_mirror, zeros


class KernelKind(enum.Enum):
    GEMM = "gemm"
    HEMM = "hemm"
    HERK = "herk"
    HER2K = "her2k"
    TRMM = "trmm"
    POTRF = "potrf"
    DIAG_SCALE = "diag_scale"


#: Ledger section tags, in report order.
SECTIONS = ("Loop 1", "Loop 2", "U norm", "S1", "S2", "H1", "H2", "H3")

_DIMS_ARITY = {
    KernelKind.GEMM: 3,
    KernelKind.HEMM: 2,
    KernelKind.HERK: 2,
    KernelKind.HER2K: 2,
    KernelKind.TRMM: 2,
    KernelKind.POTRF: 1,
    KernelKind.DIAG_SCALE: 2,
}


def flops_of(kind: KernelKind, dims) -> int:
    """Flop count of one kernel invocation.

    Dimension tuples: GEMM ``(m, n, k)``; HEMM ``(n, m)`` for an n x n
    Hermitian operand applied to n x m; HERK ``(n, k)`` updating an n x n
    triangle from a k x n operand; HER2K ``(n, k)``; TRMM ``(n, m)``;
    POTRF ``(n,)``; DIAG_SCALE ``(n, m)``.  Rank-k and triangular kinds
    count half of the equivalent full product; POTRF rounds 4/3 n^3 to the
    nearest integer.
    """
    if not isinstance(kind, KernelKind):
        raise InputError(f"unknown kernel kind {kind!r}")
    dims = tuple(int(d) for d in dims)
    if len(dims) != _DIMS_ARITY[kind] or any(d < 0 for d in dims):
        raise InputError(f"bad dims {dims} for {kind.value}")
    if kind is KernelKind.GEMM:
        m, n, k = dims
        return 8 * m * n * k
    if kind is KernelKind.HEMM:
        n, m = dims
        return 8 * n * n * m
    if kind is KernelKind.HERK:
        n, k = dims
        return 4 * k * n * n
    if kind is KernelKind.HER2K:
        n, k = dims
        return 8 * k * n * n
    if kind is KernelKind.TRMM:
        n, m = dims
        return 4 * n * n * m
    if kind is KernelKind.POTRF:
        (n,) = dims
        return round(4 * n**3 / 3)
    n, m = dims
    return 2 * n * m


@dataclass(frozen=True)
class FlopRecord:
    """One kernel invocation: kind, dimensions, flops, wall time, section."""

    kind: KernelKind
    dims: tuple
    flops: int
    seconds: float
    section: str

    def __post_init__(self):
        if self.section not in SECTIONS:
            raise InputError(f"unknown section tag {self.section!r}")
        if self.flops != flops_of(self.kind, self.dims):
            raise InvariantError(
                f"flops {self.flops} != flops_of({self.kind.value}, {self.dims})"
            )
        if self.seconds < 0:
            raise InputError("seconds must be nonnegative")


class FlopLedger:
    """Ordered record of every kernel invocation during a build."""

    def __init__(self):
        self.records: list[FlopRecord] = []

    def add(self, kind: KernelKind, dims, seconds: float, section: str) -> FlopRecord:
        dims = tuple(int(d) for d in dims)
        rec = FlopRecord(kind, dims, flops_of(kind, dims), float(seconds), section)
        self.records.append(rec)
        return rec

    def total_flops(self) -> int:
        return sum(r.flops for r in self.records)

    def total_seconds(self) -> float:
        return sum(r.seconds for r in self.records)

    def section_totals(self) -> dict:
        """section -> (flops, seconds), insertion-ordered by first appearance."""
        out: dict[str, tuple[int, float]] = {}
        for r in self.records:
            f, s = out.get(r.section, (0, 0.0))
            out[r.section] = (f + r.flops, s + r.seconds)
        return out

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


# ---------------------------------------------------------------------------
# deterministic arithmetic core


def _cprod(u, v):
    """Elementwise complex product via the separated real formula."""
    u = np.asarray(u)
    v = np.asarray(v)
    out = np.empty(np.broadcast(u, v).shape, dtype=np.complex128)
    out.real = u.real * v.real - u.imag * v.imag
    out.imag = u.real * v.imag + u.imag * v.real
    return out


def _acc_product(a, b):
    """a @ b accumulated with ascending-k rank-1 updates."""
    m, kk = a.shape
    _, n = b.shape
    acc = np.zeros((m, n), dtype=np.complex128, order="F")
    for k in range(kk):
        acc += _cprod(a[:, k, None], b[None, k, :])
    return acc


def _scaled(scalar, m):
    """scalar * m honoring exact-unit passthrough; None when scalar == 0."""
    if scalar == 0:
        return None
    if scalar == 1:
        return m
    return _cprod(scalar, m)


def _apply_op(op: str, m, name: str):
    if op == "N":
        return m
    if op == "T":
        return m.T
    if op == "C":
        return np.conj(m).T
    raise InputError(f"unknown op {op!r} for operand {name}")


def _as_real(scalar, what: str) -> float:
    if isinstance(scalar, complex) and scalar.imag != 0:
        raise InputError(f"{what} must be real, got {scalar!r}")
    return float(np.real(scalar))


# ---------------------------------------------------------------------------
# kernels


def gemm(alpha, opa: str, a, opb: str, b, beta, c):
    """c <- alpha*op(a)*op(b) + beta*c (ops: N, T, C). Updates c in place."""
    a_ = _apply_op(opa, a, "a")
    b_ = _apply_op(opb, b, "b")
    if a_.shape[1] != b_.shape[0]:
        raise DimensionError(
            f"inner dimensions disagree: op(a) {a_.shape} vs op(b) {b_.shape}"
        )
    if c.shape != (a_.shape[0], b_.shape[1]):
        raise DimensionError(
            f"c has shape {c.shape}, expected {(a_.shape[0], b_.shape[1])}"
        )
    prod = None if alpha == 0 else _scaled(alpha, _acc_product(a_, b_))
    if prod is None:
        if beta == 0:
            c[:] = 0
        elif beta != 1:
            c[:] = _cprod(beta, c)
        return c
    if beta == 0:
        c[:] = prod
    elif beta == 1:
        c[:] = prod + c
    else:
        c[:] = prod + _cprod(beta, c)
    return c


def hemm_left(alpha, t, b, beta, c):
    """c <- alpha*T*b + beta*c for the Hermitian T stored in t's lower triangle."""
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"t must be square, got {t.shape}")
    if b.shape[0] != t.shape[0]:
        raise DimensionError(f"t rows {t.shape[0]} != b rows {b.shape[0]}")
    if c.shape != b.shape:
        raise DimensionError(f"c shape {c.shape} != b shape {b.shape}")
    return gemm(alpha, "N", hermitian_mirror(t), "N", b, beta, c)


def _update_lower(c, prod, beta):
    """Lower-triangle variant of the gemm tail; zeroes diagonal imaginaries."""
    n = c.shape[0]
    sel = np.tril_indices(n)
    if prod is None:
        if beta == 0:
            c[sel] = 0
        elif beta != 1:
            c[sel] = _cprod(beta, c[sel])
    else:
        pv = prod[sel]
        if beta == 0:
            c[sel] = pv
        elif beta == 1:
            c[sel] = pv + c[sel]
        else:
            c[sel] = pv + _cprod(beta, c[sel])
    d = np.diag_indices(n)
    c[d] = c[d].real
    return c


def herk(alpha, a, beta, c):
    """Lower triangle of c <- alpha*a^H*a + beta*c; alpha, beta real."""
    alpha = _as_real(alpha, "herk alpha")
    beta = _as_real(beta, "herk beta")
    n = a.shape[1]
    if c.shape != (n, n):
        raise DimensionError(f"c has shape {c.shape}, expected {(n, n)}")
    prod = None if alpha == 0 else _scaled(alpha, _acc_product(np.conj(a).T, a))
    return _update_lower(c, prod, beta)


def her2k(alpha, z, b, beta, c):
    """Lower triangle of c <- alpha*z^H*b + conj(alpha)*b^H*z + beta*c; beta real."""
    beta = _as_real(beta, "her2k beta")
    if z.shape != b.shape:
        raise DimensionError(f"z shape {z.shape} != b shape {b.shape}")
    n = z.shape[1]
    if c.shape != (n, n):
        raise DimensionError(f"c has shape {c.shape}, expected {(n, n)}")
    if alpha == 0:
        prod = None
    else:
        left = _scaled(alpha, _acc_product(np.conj(z).T, b))
        right = _scaled(np.conj(complex(alpha)), _acc_product(np.conj(b).T, z))
        prod = left + right
    return _update_lower(c, prod, beta)


def trmm_left_conjtrans(c_factor, a):
    """C^H * a for the lower-triangular C stored in c_factor; returns a new matrix."""
    if c_factor.ndim != 2 or c_factor.shape[0] != c_factor.shape[1]:
        raise DimensionError(f"c_factor must be square, got {c_factor.shape}")
    if a.shape[0] != c_factor.shape[0]:
        raise DimensionError(
            f"c_factor order {c_factor.shape[0]} != a rows {a.shape[0]}"
        )
    ch = np.conj(np.tril(c_factor)).T
    return _acc_product(np.asfortranarray(ch), a)


def potrf_lower(t):
    """Lower Cholesky of the Hermitian matrix stored in t's lower triangle.

    Returns ``(factor, 0)`` on success, with factor @ factor^H reconstructing
    the matrix.  On failure returns ``(None, k)`` where k is the 1-based
    order of the first non-positive leading minor; failure is an expected
    data condition consumed by the builder's branch logic, not an error.
    """
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"potrf needs a square matrix, got {t.shape}")
    n = t.shape[0]
    low = np.tril(t)
    if not np.isfinite(low).all():
        raise InputError("potrf input contains non-finite entries")
    factor = zeros(n, n)
    for j in range(n):
        d = float(t[j, j].real)
        for k in range(j):
            ljk = factor[j, k]
            d -= ljk.real * ljk.real + ljk.imag * ljk.imag
        if not d > 0.0:
            return None, j + 1
        ljj = math.sqrt(d)
        factor[j, j] = ljj
        if j + 1 < n:
            col = np.array(t[j + 1 :, j], dtype=np.complex128)
            for k in range(j):
                col -= _cprod(factor[j + 1 :, k], np.conj(factor[j, k]))
            factor[j + 1 :, j] = col / ljj
    return factor, 0


def diag_scale(u, b):
    """Scale row l of b by u[l] in place; u real, finite, nonnegative."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.shape[0] != b.shape[0]:
        raise DimensionError(f"u length {u.shape} does not match b rows {b.shape[0]}")
    if not np.isfinite(u).all():
        raise InputError("u contains non-finite entries")
    if (u < 0).any():
        raise InputError("u contains negative entries")
    b.real *= u[:, None]
    b.imag *= u[:, None]
    return b

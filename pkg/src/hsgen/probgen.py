"""Deterministic synthetic problem instances and the named size presets.

Randomness comes from numpy's Philox counter-based bit generator keyed on
the spec's seed, so the same spec always reproduces the same instance
bit-for-bit within one build of numpy.  Draw order is fixed: first the
non-HPD atom permutation, then per atom (in index order) the A block, the
B block, the AB coupling block, the AA block's unitary/eigenvalues (plus
one negative replacement draw for non-HPD atoms), the BB block's
unitary/eigenvalues, and finally the norm weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matcore import Dims, InputError, InvariantError, frobenius, hermitian_defect

#: Basis sizes per test case and plane-wave cutoff.
_PRESET_TABLE = {
    "NaCl": (512, 49, {2.5: 2256, 3.0: 3893, 3.5: 6217, 4.0: 9273}),
    "AuAg": (108, 121, {2.5: 3275, 3.0: 5638, 3.5: 8970, 4.0: 13379}),
}

PRESET_NAMES = tuple(_PRESET_TABLE)
KMAX_VALUES = (2.5, 3.0, 3.5, 4.0)


@dataclass(frozen=True)
class Preset:
    name: str
    k_max: float
    dims: Dims


PRESETS = tuple(
    Preset(name, k, Dims(na, nl, ng_by_k[k]))
    for name, (na, nl, ng_by_k) in _PRESET_TABLE.items()
    for k in KMAX_VALUES
)


def preset_dims(name: str, k_max: float) -> Dims:
    """Dimensions of a named test case at a given cutoff."""
    entry = _PRESET_TABLE.get(name)
    if entry is None or float(k_max) not in entry[2]:
        raise InputError(
            f"unknown preset {name!r} with k_max {k_max!r}; valid: "
            f"{', '.join(PRESET_NAMES)} with k_max in "
            f"{', '.join(str(k) for k in KMAX_VALUES)}"
        )
    na, nl, ng_by_k = entry
    return Dims(na, nl, ng_by_k[float(k_max)])


@dataclass(frozen=True)
class ProblemSpec:
    """Recipe for one synthetic instance."""

    dims: Dims
    seed: int = 0
    nonhpd_fraction: float = 0.0
    eigenvalue_range: tuple = (0.5, 2.0)

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise InputError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "seed", int(self.seed))
        if not 0.0 <= self.nonhpd_fraction <= 1.0:
            raise InputError(f"nonhpd_fraction must be in [0, 1], got {self.nonhpd_fraction}")
        lo, hi = self.eigenvalue_range
        if not (0 < lo <= hi) or not (math.isfinite(lo) and math.isfinite(hi)):
            raise InputError(f"eigenvalue_range must be positive and ordered, got {self.eigenvalue_range}")


@dataclass
class ProblemInstance:
    """Per-atom coefficient blocks, coupling blocks, and norm weights.

    The BA coupling block is never stored; it is the conjugate transpose of
    ``t_ab`` everywhere it is needed.
    """

    dims: Dims
    a_blocks: list = field(repr=False, default_factory=list)
    b_blocks: list = field(repr=False, default_factory=list)
    t_aa: list = field(repr=False, default_factory=list)
    t_ab: list = field(repr=False, default_factory=list)
    t_bb: list = field(repr=False, default_factory=list)
    u_norms: list = field(repr=False, default_factory=list)


def _complex_gaussians(rng, rows: int, cols: int, scale: float) -> np.ndarray:
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return np.asfortranarray((re + 1j * im) * scale)


def _random_unitary(rng, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(_complex_gaussians(rng, n, n, 1.0))
    return q


def _exact_hermitian(m: np.ndarray) -> np.ndarray:
    # (m + m^H)/2 is bitwise Hermitian with an exactly real diagonal
    return np.asfortranarray((m + np.conj(m.T)) / 2.0)


def _spectral_hermitian(rng, n, eig_lo, eig_hi, force_indefinite) -> np.ndarray:
    q = _random_unitary(rng, n)
    d = rng.uniform(eig_lo, eig_hi, size=n)
    if force_indefinite:
        d[int(np.argmin(d))] = rng.uniform(-0.1, -0.01)
    return _exact_hermitian((q * d) @ np.conj(q).T)


def generate(spec: ProblemSpec) -> ProblemInstance:
    """Fully populated instance; identical spec -> bit-identical instance."""
    dims = spec.dims
    n_a, n_l, n_g = dims.n_atoms, dims.n_l, dims.n_g
    rng = np.random.Generator(np.random.Philox(spec.seed))
    n_non = round(spec.nonhpd_fraction * n_a)
    nonhpd = set(rng.permutation(n_a)[:n_non].tolist())
    lo, hi = spec.eigenvalue_range
    scale = 1.0 / math.sqrt(n_l)

    inst = ProblemInstance(dims)
    for a in range(n_a):
        inst.a_blocks.append(_complex_gaussians(rng, n_l, n_g, scale))
        inst.b_blocks.append(_complex_gaussians(rng, n_l, n_g, scale))
        inst.t_ab.append(_complex_gaussians(rng, n_l, n_l, scale))
        inst.t_aa.append(_spectral_hermitian(rng, n_l, lo, hi, a in nonhpd))
        inst.t_bb.append(_spectral_hermitian(rng, n_l, lo, hi, False))
        inst.u_norms.append(rng.uniform(0.5, 1.5, size=n_l))
    return inst


def validate_instance(p: ProblemInstance) -> None:
    """Raise InvariantError if the instance violates its declared invariants."""
    dims = p.dims
    n_a, n_l, n_g = dims.n_atoms, dims.n_l, dims.n_g
    fields = {
        "a_blocks": (p.a_blocks, (n_l, n_g)),
        "b_blocks": (p.b_blocks, (n_l, n_g)),
        "t_aa": (p.t_aa, (n_l, n_l)),
        "t_ab": (p.t_ab, (n_l, n_l)),
        "t_bb": (p.t_bb, (n_l, n_l)),
        "u_norms": (p.u_norms, (n_l,)),
    }
    for name, (blocks, shape) in fields.items():
        if len(blocks) != n_a:
            raise InvariantError(f"{name} has {len(blocks)} blocks, expected {n_a}")
        for a, blk in enumerate(blocks):
            if blk.shape != shape:
                raise InvariantError(
                    f"{name}[{a}] has shape {blk.shape}, expected {shape}"
                )
            if not np.isfinite(blk).all():
                raise InvariantError(f"{name}[{a}] contains non-finite entries")
    for name, blocks in (("t_aa", p.t_aa), ("t_bb", p.t_bb)):
        for a, blk in enumerate(blocks):
            if hermitian_defect(blk) > 1e-14 * (1.0 + frobenius(blk)):
                raise InvariantError(f"{name}[{a}] is not Hermitian within 1e-14")
    for a, u in enumerate(p.u_norms):
        if not (np.asarray(u) > 0).all():
            raise InvariantError(f"u_norms[{a}] has non-positive entries")

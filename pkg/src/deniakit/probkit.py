"""
Finite-alphabet information measures.

All logarithms are base 2 and 0·log(1/0) = 0. Distributions are numpy
arrays wrapped in small frozen dataclasses that validate once on
construction; the measures below accept either the wrappers or plain
arrays (which are validated on the way in).
"""

import math
from dataclasses import InitVar, dataclass

import numpy as np
from scipy.special import entr

from .exceptions import (
    InformationConsistencyError,
    InvalidDistributionError,
    ShapeMismatchError,
)

INFINITE = math.inf

PMF_TOL = 1e-12
ENTRY_SLACK = 1e-15
CLAMP_TOL = 1e-12

LN2 = math.log(2.0)


def is_infinite(value):
    return math.isinf(value)


def _validated(probs, tol):
    arr = np.array(probs, dtype=float)
    if arr.size == 0:
        raise InvalidDistributionError("distribution has no symbols")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError("distribution has non-finite entries")
    low = arr.min()
    if low < -ENTRY_SLACK:
        raise InvalidDistributionError(f"negative entry {low!r}")
    high = arr.max()
    if high > 1.0 + ENTRY_SLACK:
        raise InvalidDistributionError(f"entry {high!r} exceeds 1")
    arr = np.clip(arr, 0.0, 1.0)
    residual = abs(arr.sum() - 1.0)
    if residual > tol:
        raise InvalidDistributionError(f"entries sum to 1 {residual:+.3g}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over {0, ..., support_size - 1}."""

    probs: np.ndarray
    tol: InitVar[float] = PMF_TOL

    def __post_init__(self, tol):
        probs = _validated(self.probs, tol)
        if probs.ndim != 1:
            raise ShapeMismatchError(f"Pmf needs a 1-d array, got shape {probs.shape}")
        object.__setattr__(self, "probs", probs)

    @property
    def support_size(self):
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __getitem__(self, index):
        return float(self.probs[index])

    def support(self):
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Joint law over two or three finite variables, stored as a shaped array."""

    probs: np.ndarray
    tol: InitVar[float] = PMF_TOL

    def __post_init__(self, tol):
        probs = _validated(self.probs, tol)
        if probs.ndim not in (2, 3):
            raise ShapeMismatchError(
                f"JointPmf needs 2 or 3 variables, got shape {probs.shape}"
            )
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_flat(cls, shape, flat, tol=PMF_TOL):
        flat = np.asarray(flat, dtype=float)
        if flat.size != math.prod(shape):
            raise ShapeMismatchError(
                f"{flat.size} entries cannot fill shape {tuple(shape)}"
            )
        return cls(flat.reshape(shape), tol=tol)

    @classmethod
    def product(cls, *marginals):
        arrays = [_probs(m) for m in marginals]
        out = arrays[0]
        for arr in arrays[1:]:
            out = np.multiply.outer(out, arr)
        return cls(out)

    @property
    def shape(self):
        return self.probs.shape

    @property
    def flat(self):
        return self.probs.ravel()

    def marginal(self, *axes):
        """Marginal on `axes`, in the order given."""
        if not axes or len(set(axes)) != len(axes):
            raise ShapeMismatchError(f"bad marginal axes {axes}")
        drop = tuple(a for a in range(self.probs.ndim) if a not in axes)
        kept = sorted(axes)
        arr = self.probs.sum(axis=drop) if drop else self.probs
        arr = np.transpose(arr, [kept.index(a) for a in axes])
        if arr.ndim == 1:
            return Pmf(arr, tol=1e-9)
        return JointPmf(arr, tol=1e-9)


def _probs(dist):
    if isinstance(dist, (Pmf, JointPmf)):
        return dist.probs
    return _validated(dist, PMF_TOL)


def _entropy_bits(arr):
    return float(entr(arr).sum() / LN2)


def _clamp(value, what):
    if value < -CLAMP_TOL:
        raise InformationConsistencyError(f"{what} came out negative: {value!r}")
    return max(value, 0.0)


def uniform(size):
    return Pmf(np.full(size, 1.0 / size))


def point_mass(size, index):
    probs = np.zeros(size)
    probs[index] = 1.0
    return Pmf(probs)


def entropy(p):
    """H(p) in bits; works on joints too (joint entropy)."""
    arr = _probs(p)
    return min(_clamp(_entropy_bits(arr), "entropy"), math.log2(arr.size))


def binary_entropy(p):
    return entropy([p, 1.0 - p])


def ternary_entropy(a, b, c):
    return entropy([a, b, c])


def kl_divergence(p, q):
    """
    KL(p‖q) in bits.

    Returns INFINITE when p puts mass where q has none.
    """
    a, b = _probs(p), _probs(q)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"KL between shapes {a.shape} and {b.shape}")
    mask = a > 0
    if np.any(b[mask] == 0):
        return INFINITE
    value = float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))
    return _clamp(value, "KL divergence")


def l1_distance(p, q):
    a, b = _probs(p), _probs(q)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"distance between shapes {a.shape} and {b.shape}")
    return float(np.abs(a - b).sum())


def mutual_information(j):
    """I(A;B) for a 2-way joint."""
    arr = _probs(j)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"mutual information needs a 2-way joint, got {arr.shape}")
    h_a = _entropy_bits(arr.sum(axis=1))
    h_b = _entropy_bits(arr.sum(axis=0))
    value = _clamp(h_a + h_b - _entropy_bits(arr), "mutual information")
    return min(value, h_a, h_b)


def conditional_entropy(j):
    """H(A|B) for a 2-way joint over (A, B)."""
    arr = _probs(j)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"conditional entropy needs a 2-way joint, got {arr.shape}")
    return _clamp(_entropy_bits(arr) - _entropy_bits(arr.sum(axis=0)), "conditional entropy")


def conditional_mutual_information(j):
    """I(A;B|C) for a 3-way joint over (A, B, C)."""
    arr = _probs(j)
    if arr.ndim != 3:
        raise ShapeMismatchError(
            f"conditional mutual information needs a 3-way joint, got {arr.shape}"
        )
    value = (
        _entropy_bits(arr.sum(axis=1))
        + _entropy_bits(arr.sum(axis=0))
        - _entropy_bits(arr)
        - _entropy_bits(arr.sum(axis=(0, 1)))
    )
    return _clamp(value, "conditional mutual information")

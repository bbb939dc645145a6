"""
Zero-information partitions.

Two inputs w1, w2 of a DMC P_{Z|W} are equivalent when their rows coincide:
the eavesdropper's output law cannot tell them apart. The equivalence classes
define the zero-information variable U0 = class_of(W), which satisfies both
Markov chains U0 - W - Z and W - U0 - Z.
"""

from dataclasses import dataclass

import numpy as np

from .channel import Dmc
from .exceptions import PartitionMismatchError
from .probkit import JointPmf, Pmf

DEFAULT_ROW_TOL = 1e-9


@dataclass(frozen=True)
class ZeroInfoPartition:
    """
    Classes of an input alphabet.

    Classes are ordered by their lowest member, and the lowest member is the
    class representative.
    """

    classes: tuple
    class_of: tuple
    row_tol: float = DEFAULT_ROW_TOL

    @property
    def size(self):
        return len(self.classes)

    @property
    def alphabet_size(self):
        return len(self.class_of)

    def representative(self, u):
        return self.classes[u][0]

    def indicator(self):
        """|W| x |U0| matrix with a single 1 per row."""
        out = np.zeros((self.alphabet_size, self.size))
        out[np.arange(self.alphabet_size), self.class_of] = 1.0
        return out

    def names(self, symbol_names):
        return ["{" + ",".join(symbol_names[w] for w in cls) + "}" for cls in self.classes]


def zero_info_partition(d, row_tol=DEFAULT_ROW_TOL):
    classes = []
    class_of = []
    for w, row in enumerate(d.rows):
        for u, members in enumerate(classes):
            if np.max(np.abs(row - d.rows[members[0]])) <= row_tol:
                members.append(w)
                class_of.append(u)
                break
        else:
            class_of.append(len(classes))
            classes.append([w])
    return ZeroInfoPartition(tuple(tuple(c) for c in classes), tuple(class_of), row_tol)


def singleton_partition(size):
    return ZeroInfoPartition(tuple((w,) for w in range(size)), tuple(range(size)))


def _check_matches(d, part):
    if part.alphabet_size != d.in_size:
        raise PartitionMismatchError(
            f"partition covers {part.alphabet_size} symbols, channel has {d.in_size} inputs"
        )
    for members in part.classes:
        rows = d.rows[list(members)]
        if np.max(np.abs(rows - rows[0])) > part.row_tol:
            raise PartitionMismatchError(
                f"symbols {members} share a class but their rows differ"
            )


def collapse(part, d):
    """The DMC P_{Z|U0}."""
    _check_matches(d, part)
    rows = d.rows[[part.representative(u) for u in range(part.size)]]
    names = part.names(d.in_names)
    return Dmc(rows, names, d.out_names)


def zero_info_joint(p_w, d, part):
    """Joint law of (W, U0, Z)."""
    _check_matches(d, part)
    probs = p_w.probs if isinstance(p_w, Pmf) else Pmf(p_w).probs
    if probs.size != d.in_size:
        raise PartitionMismatchError(f"p_w has {probs.size} symbols, channel has {d.in_size}")
    law = probs[:, None, None] * part.indicator()[:, :, None] * d.rows[:, None, :]
    return JointPmf(law, tol=1e-9)


def class_sequence(part, seq):
    return np.asarray(part.class_of, dtype=np.int64)[np.asarray(seq, dtype=np.int64)]


def refines(finer, coarser):
    """True when every class of `finer` lies inside one class of `coarser`."""
    if finer.alphabet_size != coarser.alphabet_size:
        return False
    return all(len({coarser.class_of[w] for w in cls}) == 1 for cls in finer.classes)

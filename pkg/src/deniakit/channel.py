"""
Broadcast channels P(y,z|x), their marginals, degradedness and typicality.

Blocklength-n quantities are never materialised as n-fold channels; they are
computed per sequence through sequence_likelihood / sequence_likelihoods.
"""

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

import numpy as np

from . import randomness
from .exceptions import (
    AlphabetError,
    ChannelError,
    ChannelFormatError,
    NotDegradedError,
    ShapeMismatchError,
)
from .probkit import ENTRY_SLACK, Pmf
from .simplex import project_rows

logger = logging.getLogger(__name__)

ROW_TOL = 1e-12
DEFAULT_DEGRADED_TOL = 1e-7
DEGRADED_MAX_ITER = 10_000
DEGRADED_RESTARTS = 8

CHANNEL_DIR = Path(__file__).parent / "conf" / "channels"
BUILTIN_CHANNELS = ("example1", "example2")


class Party(StrEnum):
    BOB = "bob"
    JUDY = "judy"


def _names(names, size):
    if not names:
        return tuple(str(i) for i in range(size))
    names = tuple(str(n) for n in names)
    if len(names) != size:
        raise ChannelError(f"{len(names)} symbol names declared for {size} symbols")
    if len(set(names)) != len(names):
        raise ChannelError(f"duplicate symbol names in {names}")
    return names


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dmc:
    """Discrete memoryless channel given by stochastic rows P(out|in)."""

    rows: np.ndarray
    in_names: tuple = ()
    out_names: tuple = ()

    def __post_init__(self):
        rows = _frozen(self.rows)
        if rows.ndim != 2:
            raise ChannelError(f"DMC rows need 2 dimensions, got shape {rows.shape}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "in_names", _names(self.in_names, rows.shape[0]))
        object.__setattr__(self, "out_names", _names(self.out_names, rows.shape[1]))
        for x, row in enumerate(rows):
            if row.min() < -ENTRY_SLACK:
                raise ChannelError(f"negative entry in row {self.in_names[x]}", row=x)
            residual = abs(row.sum() - 1.0)
            if residual > ROW_TOL:
                raise ChannelError(
                    f"row {self.in_names[x]} sums to 1 {row.sum() - 1.0:+.3g}",
                    row=x,
                    residual=residual,
                )

    @property
    def in_size(self):
        return self.rows.shape[0]

    @property
    def out_size(self):
        return self.rows.shape[1]

    def compose(self, other):
        """The DMC `self` followed by `other`."""
        if self.out_size != other.in_size:
            raise ShapeMismatchError(
                f"cannot compose {self.out_size} outputs with {other.in_size} inputs"
            )
        rows = np.clip(self.rows @ other.rows, 0.0, 1.0)
        rows /= rows.sum(axis=1, keepdims=True)
        return Dmc(rows, self.in_names, other.out_names)


@dataclass(frozen=True, eq=False)
class BroadcastChannel:
    """Conditional law P(y,z|x), indexed law[x, y, z]."""

    law: np.ndarray
    x_names: tuple = ()
    y_names: tuple = ()
    z_names: tuple = ()

    def __post_init__(self):
        law = _frozen(self.law)
        if law.ndim != 3:
            raise ChannelError(f"channel law needs 3 dimensions, got shape {law.shape}")
        object.__setattr__(self, "law", law)
        object.__setattr__(self, "x_names", _names(self.x_names, law.shape[0]))
        object.__setattr__(self, "y_names", _names(self.y_names, law.shape[1]))
        object.__setattr__(self, "z_names", _names(self.z_names, law.shape[2]))

    @property
    def x_size(self):
        return self.law.shape[0]

    @property
    def y_size(self):
        return self.law.shape[1]

    @property
    def z_size(self):
        return self.law.shape[2]


@dataclass(frozen=True)
class ChannelDiagnostic:
    ok: bool
    reason: str = ""
    row: int | None = None
    residual: float | None = None

    def __bool__(self):
        return self.ok


def validate(ch):
    """Check that every row of the law is a probability distribution over (y, z)."""
    for x in range(ch.x_size):
        block = ch.law[x]
        low = float(block.min())
        if low < -ENTRY_SLACK:
            return ChannelDiagnostic(
                False, f"negative entry in row {ch.x_names[x]}", row=x, residual=-low
            )
        total = float(block.sum())
        residual = abs(total - 1.0)
        if residual > ROW_TOL:
            return ChannelDiagnostic(
                False,
                f"row {ch.x_names[x]} sums to {total!r}",
                row=x,
                residual=residual,
            )
    return ChannelDiagnostic(True)


def require_valid(ch):
    diagnostic = validate(ch)
    if not diagnostic:
        raise ChannelError(diagnostic.reason, row=diagnostic.row, residual=diagnostic.residual)
    return ch


def marginal(ch, which):
    require_valid(ch)
    which = Party(which)
    if which is Party.BOB:
        return Dmc(ch.law.sum(axis=2), ch.x_names, ch.y_names)
    return Dmc(ch.law.sum(axis=1), ch.x_names, ch.z_names)


def _degraded_residual(a, b, w):
    return float(np.max(np.abs(a @ w - b)))


def _fit_degrading_map(a, b, start, tol, max_iter):
    """Accelerated projected gradient for min ½‖A W − B‖² over row-stochastic W."""
    lipschitz = max(np.linalg.norm(a, 2) ** 2, 1e-12)
    step = 1.0 / lipschitz
    w = project_rows(start)
    momentum_point = w
    t = 1.0
    for iteration in range(max_iter):
        grad = a.T @ (a @ momentum_point - b)
        w_next = project_rows(momentum_point - step * grad)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum_point = w_next + ((t - 1.0) / t_next) * (w_next - w)
        w, t = w_next, t_next
        if iteration % 50 == 0 and _degraded_residual(a, b, w) <= tol:
            break
    return w, _degraded_residual(a, b, w)


def is_physically_degraded(
    ch, tol=DEFAULT_DEGRADED_TOL, max_iter=DEGRADED_MAX_ITER, restarts=DEGRADED_RESTARTS, seed=0
):
    """
    Search for P_{Z|Y} with P_{Z|X} = P_{Y|X} P_{Z|Y} up to `tol` (max norm).

    Returns:
        (True, witness Dmc) or (False, None).
    """
    bob, judy = marginal(ch, Party.BOB), marginal(ch, Party.JUDY)
    a, b = bob.rows, judy.rows
    starts = [np.linalg.lstsq(a, b, rcond=None)[0], np.full((ch.y_size, ch.z_size), 1.0 / ch.z_size)]
    for restart in range(max(restarts - len(starts), 0)):
        rng = randomness.stream(seed, "degraded", restart)
        starts.append(rng.dirichlet(np.ones(ch.z_size), size=ch.y_size))

    best_w, best_residual = None, math.inf
    for start in starts:
        w, residual = _fit_degrading_map(a, b, start, tol, max_iter)
        if residual < best_residual:
            best_w, best_residual = w, residual
        if best_residual <= tol:
            break

    logger.debug(f"degradedness residual {best_residual:.3g} (tol {tol:g})")
    if best_residual > tol:
        return False, None
    best_w = best_w / best_w.sum(axis=1, keepdims=True)
    return True, Dmc(best_w, ch.y_names, ch.z_names)


def _factorised_witness(ch, tol):
    """P(z|y) read off a law of the form P(y|x) P(z|y), or None."""
    bob = ch.law.sum(axis=2)
    rows = np.full((ch.y_size, ch.z_size), 1.0 / ch.z_size)
    for y in range(ch.y_size):
        senders = np.flatnonzero(bob[:, y] > 0)
        if senders.size == 0:
            continue
        conditionals = ch.law[senders, y, :] / bob[senders, y][:, None]
        if np.max(np.abs(conditionals - conditionals[0])) > tol:
            return None
        rows[y] = conditionals[0]
    return Dmc(rows / rows.sum(axis=1, keepdims=True), ch.y_names, ch.z_names)


def degrading_witness(ch, tol=DEFAULT_DEGRADED_TOL):
    """
    A degrading map P_{Z|Y} for the channel.

    A law that already factorises as P(y|x) P(z|y) gives its own P(z|y)
    exactly; otherwise a fitted map from is_physically_degraded is used.

    Returns:
        (witness Dmc, True when the law itself is physically degraded)

    Raises:
        NotDegradedError: no degrading map exists within `tol`.
    """
    require_valid(ch)
    witness = _factorised_witness(ch, tol)
    if witness is not None:
        return witness, True
    degraded, witness = is_physically_degraded(ch, tol=tol)
    if not degraded:
        raise NotDegradedError()
    return witness, False


def physically_degraded_law(bob, witness):
    """Joint law P(y|x) P(z|y) of the physically degraded channel built from a witness."""
    law = bob.rows[:, :, None] * witness.rows[None, :, :]
    return BroadcastChannel(law, bob.in_names, bob.out_names, witness.out_names)


def symbol_indices(vec, size, what):
    arr = np.asarray(vec, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise AlphabetError(f"{what} symbol outside alphabet of size {size}")
    return arr


def sequence_likelihood(d, x_vec, out_vec):
    x = symbol_indices(x_vec, d.in_size, "input")
    out = symbol_indices(out_vec, d.out_size, "output")
    if x.size != out.size:
        raise ShapeMismatchError(f"input length {x.size} differs from output length {out.size}")
    return float(np.prod(d.rows[x, out]))


def sequence_likelihoods(d, x_vec):
    """Likelihood of every output sequence of length n, in row-major order."""
    out = np.ones(1)
    for x in symbol_indices(x_vec, d.in_size, "input"):
        out = np.outer(out, d.rows[x]).ravel()
    return out


def joint_sequence_likelihoods(ch, x_vec):
    """P(y, z | x) for every (y, z) sequence pair, shape (|Y|^n, |Z|^n)."""
    out = np.ones((1, 1))
    for x in symbol_indices(x_vec, ch.x_size, "input"):
        out = np.kron(out, ch.law[x])
    return out


def sequence_digits(n, size):
    """All sequences of length n over `size` symbols, one per row, row-major."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(itertools.product(range(size), repeat=n)), dtype=np.int64)


def sequence_index(seq, size):
    index = 0
    for symbol in np.asarray(seq, dtype=np.int64).ravel():
        index = index * size + int(symbol)
    return index


def is_strongly_typical(seq, p, eps):
    probs = p.probs if isinstance(p, Pmf) else Pmf(p).probs
    symbols = symbol_indices(seq, probs.size, "sequence")
    if symbols.size == 0:
        raise ShapeMismatchError("typicality needs a non-empty sequence")
    freq = np.bincount(symbols, minlength=probs.size) / symbols.size
    return bool(np.max(np.abs(freq - probs)) <= eps / probs.size)


def joint_typicality(x_vec, y_vec, p_x, bob, eps):
    """Strong typicality of the pair sequence w.r.t. P_X P_{Y|X}."""
    joint = (np.asarray(p_x.probs)[:, None] * bob.rows).ravel()
    x = symbol_indices(x_vec, bob.in_size, "input")
    y = symbol_indices(y_vec, bob.out_size, "output")
    return is_strongly_typical(x * bob.out_size + y, Pmf(joint, tol=1e-9), eps)


# Channel files


def parse_channel(text, source="<string>"):
    """Parse the JSON channel format {"x": [...], "y": [...], "z": [...], "p": [[[...]]]}."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelFormatError(f"{source}: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        raise ChannelFormatError(f"{source}: expected a JSON object", line=1, column=1)
    missing = [key for key in ("x", "y", "z", "p") if key not in data]
    if missing:
        raise ChannelFormatError(f"{source}: missing keys {', '.join(missing)}")
    for key in ("x", "y", "z"):
        names = data[key]
        if not isinstance(names, list) or not names:
            raise ChannelFormatError(f"{source}: {key!r} must be a non-empty list of symbol names")
        if len({str(n) for n in names}) != len(names):
            raise ChannelFormatError(f"{source}: duplicate symbol names in {key!r}")
    try:
        law = np.array(data["p"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ChannelFormatError(f"{source}: probabilities are not a regular 3-d array") from e
    declared = (len(data["x"]), len(data["y"]), len(data["z"]))
    if law.shape != declared:
        raise ChannelFormatError(
            f"{source}: probability array has shape {law.shape}, alphabets declare {declared}"
        )
    ch = BroadcastChannel(law, data["x"], data["y"], data["z"])
    require_valid(ch)
    return ch


def load_channel(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ChannelFormatError(f"cannot read channel file {path}: {e.strerror}") from e
    logger.debug(f"loading channel from {path}")
    return parse_channel(text, source=str(path))


def dump_channel(ch):
    return json.dumps(
        {
            "x": list(ch.x_names),
            "y": list(ch.y_names),
            "z": list(ch.z_names),
            "p": ch.law.tolist(),
        },
        indent=2,
        ensure_ascii=False,
    )


def channel_digest(ch):
    canonical = json.dumps(
        {
            "x": list(ch.x_names),
            "y": list(ch.y_names),
            "z": list(ch.z_names),
            "p": [repr(v) for v in ch.law.ravel().tolist()],
        },
        sort_keys=True,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def bec_channel(p):
    """Bob sees X noiselessly, Judy sees X through an erasure channel with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"erasure probability {p} outside [0, 1]")
    law = np.zeros((2, 2, 3))
    law[0, 0, 0], law[0, 0, 1] = 1.0 - p, p
    law[1, 1, 2], law[1, 1, 1] = 1.0 - p, p
    return BroadcastChannel(law, ("0", "1"), ("0", "1"), ("0", "e", "1"))


def example2_channel():
    """Y = X over {1,2,3}; Judy cannot tell inputs 1 and 2 apart."""
    judy = np.array([[0.3, 0.7, 0.0], [0.3, 0.7, 0.0], [0.0, 0.4, 0.6]])
    law = np.zeros((3, 3, 3))
    for x in range(3):
        law[x, x, :] = judy[x]
    names = ("1", "2", "3")
    return BroadcastChannel(law, names, names, names)


def builtin_channel(name):
    return load_channel(CHANNEL_DIR / f"{name}.json")


def resolve_channel(spec=None, bec=None):
    """A channel from a path, a built-in name, or the erasure generator."""
    if bec is not None:
        return bec_channel(bec)
    if spec is None:
        raise ChannelFormatError("no channel given")
    path = Path(spec)
    if not path.exists() and spec in BUILTIN_CHANNELS:
        return builtin_channel(spec)
    return load_channel(path)

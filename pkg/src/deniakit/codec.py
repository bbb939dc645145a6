"""
Codebooks, encoders, decoders and faking procedures.

A codebook stores one codeword per (message, private randomness) pair in
`words[m, r]`. Deterministic codes have a single randomness index. Layered
codes (superposition and binning) also record the cloud each message belongs
to, which is what transmitter faking and binning reductions work with.

Every faking procedure has two faces: a sampler that maps (true value, key) to
a fake value, and an exact conditional law that evalx enumerates. Both are
derived from the same tables, so sampled frequencies converge to the law.
"""

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.special import logsumexp

from . import randomness
from .channel import (
    Party,
    joint_typicality,
    marginal,
    sequence_digits,
    sequence_index,
    symbol_indices,
)
from .exceptions import (
    CodebookBudgetError,
    CodebookError,
    CodewordError,
    MessageRangeError,
    PlausibilityLeakError,
    ShapeMismatchError,
    SplitError,
)
from .probkit import ENTRY_SLACK, Pmf
from .zeroinfo import zero_info_partition

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 2**26
DISTINCT_ATTEMPTS = 1000
TIE_TOL = 1e-9
DEFAULT_EPS = 0.1


class Setting(StrEnum):
    MESSAGE = "message"
    TRANSMITTER = "transmitter"
    RECEIVER = "receiver"


class Decoder(StrEnum):
    ML = "ml"
    TYPICAL = "typical"


def bit_count(n, rate):
    """Round-half-up of n * rate."""
    if rate < 0:
        raise CodebookError(f"negative rate {rate}")
    return int(math.floor(n * rate + 0.5))


@dataclass(frozen=True, eq=False)
class Codebook:
    """
    A multiset of codewords.

    Attributes:
        n: blocklength.
        words: int array (messages, randomness, n) of input symbols.
        x_size: input alphabet size.
        p_x: per-symbol input law the words were drawn from (typicality decoding).
        kind: "iid", "superposition" or "binning".
        cloud_of: cloud index of every message, or None for unlayered codes.
        cloud_words: per-cloud sequence (zero-information classes, or V symbols).
        split: (s_bits, t_bits, r_bits) for binning codes.
        seed: codebook key.
        rates: realised rates keyed by name.
    """

    n: int
    words: np.ndarray
    x_size: int
    p_x: np.ndarray
    kind: str = "iid"
    cloud_of: tuple | None = None
    cloud_words: np.ndarray | None = None
    split: tuple | None = None
    seed: int = 0
    rates: dict | None = None

    def __post_init__(self):
        words = np.array(self.words, dtype=np.int64)
        if words.ndim != 3 or words.shape[2] != self.n:
            raise ShapeMismatchError(f"codewords need shape (messages, randomness, {self.n})")
        if words.size and (words.min() < 0 or words.max() >= self.x_size):
            raise CodewordError(f"codeword symbol outside alphabet of size {self.x_size}")
        words.setflags(write=False)
        object.__setattr__(self, "words", words)
        if self.split is not None:
            s_bits, t_bits, _ = self.split
            if words.shape[0] != 2 ** (s_bits + t_bits):
                raise SplitError(
                    f"{words.shape[0]} messages cannot split into {s_bits} + {t_bits} bits"
                )

    @property
    def messages(self):
        return self.words.shape[0]

    @property
    def randomness(self):
        return self.words.shape[1]

    @property
    def layered(self):
        return self.cloud_of is not None

    def word_keys(self):
        """Row-major index of every codeword, shape (messages, randomness)."""
        weights = self.x_size ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return self.words @ weights


def _check_budget(states, what):
    if states > ENUMERATION_BUDGET:
        raise CodebookBudgetError(
            f"{what} needs {states} codewords, budget is {ENUMERATION_BUDGET}"
        )


def _probs(p):
    return p.probs if isinstance(p, Pmf) else Pmf(p).probs


def _draw(rng, rows, labels):
    """One symbol per entry of `labels`, each from rows[label]."""
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0
    u = rng.random(np.shape(labels))
    return (u[..., None] > cdf[labels]).sum(axis=-1).astype(np.int64)


# Construction


def build_iid_codebook(p_x, n, rate, seed):
    probs = _probs(p_x)
    bits = bit_count(n, rate)
    _check_budget(2**bits, "i.i.d. codebook")
    rng = randomness.stream(seed, "iid-codebook")
    words = _draw(rng, probs[None, :], np.zeros((2**bits, 1, n), dtype=np.int64))
    logger.debug(f"i.i.d. codebook: n={n}, {2**bits} messages")
    return Codebook(
        n,
        words,
        probs.size,
        probs,
        seed=seed,
        rates={"R": bits / n if n else 0.0},
    )


def _check_satellite_law(p_x_given_u, partition):
    rows = p_x_given_u.rows
    if rows.shape != (partition.size, partition.alphabet_size):
        raise ShapeMismatchError(
            f"P_X|U has shape {rows.shape}, partition needs "
            f"{(partition.size, partition.alphabet_size)}"
        )
    allowed = partition.indicator().T > 0
    leak = np.where(allowed, 0.0, rows)
    if leak.max() > ENTRY_SLACK:
        u, x = np.unravel_index(np.argmax(leak), leak.shape)
        raise PlausibilityLeakError(
            f"P_X|U puts mass {leak[u, x]:.3g} on symbol {x} outside class {u}"
        )


def build_superposition_codebook(
    p_u, p_x_given_u, partition, n, rate, deniability, seed, distinct=False
):
    """
    Clouds over zero-information classes with satellites inside each class.

    Args:
        p_u: law of the cloud symbols over the classes of `partition`.
        p_x_given_u: Dmc from classes to inputs, supported on each class.
        partition: ZeroInfoPartition of the inputs w.r.t. Judy's channel.
        n: blocklength.
        rate: total rate R; round(n(R-D)) cloud bits.
        deniability: D; round(nD) satellite bits.
        seed: codebook key.
        distinct: redraw satellites that repeat an earlier codeword.
    """
    if not rate >= deniability >= 0:
        raise CodebookError(f"need R >= D >= 0, got R={rate}, D={deniability}")
    pu = _probs(p_u)
    if pu.size != partition.size:
        raise ShapeMismatchError(f"P_U has {pu.size} symbols, partition has {partition.size}")
    _check_satellite_law(p_x_given_u, partition)

    cloud_bits = bit_count(n, rate - deniability)
    sat_bits = bit_count(n, deniability)
    clouds, satellites = 2**cloud_bits, 2**sat_bits
    _check_budget(clouds * satellites, "superposition codebook")

    cloud_rng = randomness.stream(seed, "superposition-clouds")
    cloud_words = _draw(cloud_rng, pu[None, :], np.zeros((clouds, n), dtype=np.int64))
    sat_rng = randomness.stream(seed, "superposition-satellites")
    rows = p_x_given_u.rows
    words = np.empty((clouds * satellites, 1, n), dtype=np.int64)
    seen = set()
    for j in range(clouds):
        for s in range(satellites):
            word = _draw(sat_rng, rows, cloud_words[j])
            attempts = 0
            while distinct and tuple(word) in seen:
                attempts += 1
                if attempts > DISTINCT_ATTEMPTS:
                    raise CodewordError(
                        f"cloud {j} cannot hold {satellites} distinct satellites at n={n}"
                    )
                word = _draw(sat_rng, rows, cloud_words[j])
            seen.add(tuple(word))
            words[j * satellites + s, 0] = word

    logger.debug(f"superposition codebook: n={n}, {clouds} clouds x {satellites} satellites")
    return Codebook(
        n,
        words,
        partition.alphabet_size,
        pu @ rows,
        kind="superposition",
        cloud_of=tuple(m // satellites for m in range(clouds * satellites)),
        cloud_words=cloud_words,
        seed=seed,
        rates={
            "R": (cloud_bits + sat_bits) / n if n else 0.0,
            "D": sat_bits / n if n else 0.0,
        },
    )


def build_binning_codebook(ch, aux, n, rates, seed):
    """
    Leaked part t picks the cloud, confidential part s and local randomness r
    pick the satellite.

    Args:
        ch: BroadcastChannel the code is meant for.
        aux: (P_V, P_U|V, P_X|U) as (Pmf, Dmc, Dmc).
        n: blocklength.
        rates: (R_s, R_t, R_r).
        seed: codebook key.
    """
    p_v, p_u_given_v, p_x_given_u = aux
    pv = _probs(p_v)
    if p_u_given_v.rows.shape[0] != pv.size:
        raise ShapeMismatchError("P_U|V rows do not match P_V")
    if p_x_given_u.rows.shape != (p_u_given_v.out_size, ch.x_size):
        raise ShapeMismatchError("P_X|U does not map U onto the channel input alphabet")
    r_s, r_t, r_r = rates
    s_bits, t_bits, r_bits = bit_count(n, r_s), bit_count(n, r_t), bit_count(n, r_r)
    messages, keys = 2 ** (s_bits + t_bits), 2**r_bits
    _check_budget(messages * keys, "binning codebook")

    cloud_rng = randomness.stream(seed, "binning-clouds")
    cloud_words = _draw(cloud_rng, pv[None, :], np.zeros((2**t_bits, n), dtype=np.int64))
    sat_rng = randomness.stream(seed, "binning-satellites")
    u_words = _draw(
        sat_rng,
        p_u_given_v.rows,
        np.broadcast_to(cloud_words[:, None, None, :], (2**t_bits, 2**s_bits, keys, n)),
    )
    x_words = _draw(sat_rng, p_x_given_u.rows, u_words)
    logger.debug(
        f"binning codebook: n={n}, {s_bits} secret bits, {t_bits} leaked bits, {r_bits} key bits"
    )
    return Codebook(
        n,
        x_words.reshape(messages, keys, n),
        ch.x_size,
        pv @ p_u_given_v.rows @ p_x_given_u.rows,
        kind="binning",
        cloud_of=tuple(m >> s_bits for m in range(messages)),
        cloud_words=cloud_words,
        split=(s_bits, t_bits, r_bits),
        seed=seed,
        rates={
            "R_s": s_bits / n if n else 0.0,
            "R_t": t_bits / n if n else 0.0,
            "R_r": r_bits / n if n else 0.0,
        },
    )


# Encoding and decoding


def _check_message(cb, m):
    if not 0 <= int(m) < cb.messages:
        raise MessageRangeError(f"message {m} outside 0..{cb.messages - 1}")
    return int(m)


def encode(cb, m, k_a=0):
    m = _check_message(cb, m)
    if cb.randomness == 1:
        return cb.words[m, 0].copy()
    r = int(randomness.stream(k_a, "encode", m).integers(cb.randomness))
    return cb.words[m, r].copy()


def _log_scores(cb, bob, y_digits):
    """log2 of sum_r P(y|x(m,r)) for every message and every row of y_digits."""
    with np.errstate(divide="ignore"):
        log_rows = np.log(bob.rows)
    scores = np.zeros((cb.messages, cb.randomness, y_digits.shape[0]))
    for i in range(cb.n):
        scores = scores + log_rows[cb.words[:, :, i]][:, :, y_digits[:, i]]
    return logsumexp(scores, axis=1) / math.log(2)


def _argmax_smallest(scores):
    """Index of the first entry within TIE_TOL of the maximum, per column."""
    top = scores.max(axis=0)
    if np.isneginf(top).all():
        return np.zeros(scores.shape[1], dtype=np.int64)
    return np.argmax(scores >= top[None, :] - TIE_TOL, axis=0).astype(np.int64)


def _typical_decisions(cb, bob, y_digits, eps):
    p_x = Pmf(cb.p_x, tol=1e-9)
    out = np.zeros(y_digits.shape[0], dtype=np.int64)
    for k, y in enumerate(y_digits):
        for m in range(cb.messages):
            if any(joint_typicality(w, y, p_x, bob, eps) for w in cb.words[m]):
                out[k] = m
                break
    return out


def decode_batch(cb, ch, y_digits, decoder=Decoder.ML, eps=DEFAULT_EPS):
    """Decisions for every row of an (sequences, n) array of received symbols."""
    bob = marginal(ch, Party.BOB)
    if cb.n == 0:
        return np.zeros(y_digits.shape[0], dtype=np.int64)
    if Decoder(decoder) is Decoder.TYPICAL:
        return _typical_decisions(cb, bob, y_digits, eps)
    return _argmax_smallest(_log_scores(cb, bob, y_digits))


def decode(cb, ch, y_vec, decoder=Decoder.ML, eps=DEFAULT_EPS):
    """
    Bob's decision for a received sequence.

    Maximum likelihood over messages averaged over the private randomness,
    ties to the smallest message; or the smallest message jointly typical with
    y (0 if none).
    """
    y = symbol_indices(y_vec, ch.y_size, "output")
    if y.size != cb.n:
        raise ShapeMismatchError(f"received {y.size} symbols, blocklength is {cb.n}")
    return int(decode_batch(cb, ch, y[None, :], decoder, eps)[0])


def decode_all(cb, ch, decoder=Decoder.ML, eps=DEFAULT_EPS):
    """Decisions for every output sequence in row-major order."""
    _check_budget(cb.messages * cb.randomness * ch.y_size**cb.n, "decoding table")
    return decode_batch(cb, ch, sequence_digits(cb.n, ch.y_size), decoder, eps)


def message_counts(cb):
    """
    Distinct codewords and how often each message uses them.

    Returns:
        (keys sorted ascending, counts array of shape (messages, distinct words))
    """
    keys = cb.word_keys()
    distinct, inverse = np.unique(keys, return_inverse=True)
    counts = np.zeros((cb.messages, distinct.size))
    np.add.at(counts, (np.repeat(np.arange(cb.messages), cb.randomness), inverse.ravel()), 1.0)
    return distinct, counts


def transmitter_messages(cb):
    """Msg(x) for every distinct codeword: the smallest most likely message."""
    _, counts = message_counts(cb)
    return np.argmax(counts == counts.max(axis=0)[None, :], axis=0).astype(np.int64)


def msg_of(setting, cb, ch, w, decoder=Decoder.ML, eps=DEFAULT_EPS):
    setting = Setting(setting)
    if setting is Setting.MESSAGE:
        return _check_message(cb, w)
    if setting is Setting.RECEIVER:
        return decode(cb, ch, w, decoder, eps)
    key = sequence_index(symbol_indices(w, cb.x_size, "input"), cb.x_size)
    distinct, counts = message_counts(cb)
    slot = np.searchsorted(distinct, key)
    if slot == distinct.size or distinct[slot] != key:
        # zero posterior everywhere
        return 0
    return int(np.argmax(counts[:, slot] == counts[:, slot].max()))


# Message faking


def _check_split(split, messages=None):
    s_bits, t_bits = split[0], split[1]
    if s_bits < 0 or t_bits < 0:
        raise SplitError(f"negative bit counts in split {split}")
    if messages is not None and messages != 2 ** (s_bits + t_bits):
        raise SplitError(f"{messages} messages cannot split into {s_bits} + {t_bits} bits")
    return s_bits, t_bits


def fake_message(m, split, k_c):
    """(s', t) with s' uniform and the leaked part t kept."""
    s_bits, t_bits = _check_split(split)
    if not 0 <= m < 2 ** (s_bits + t_bits):
        raise SplitError(f"message {m} does not fit {s_bits} + {t_bits} bits")
    s_new = int(randomness.stream(k_c, "fake-message", m).integers(2**s_bits))
    return ((m >> s_bits) << s_bits) | s_new


def message_fake_law(split, messages):
    s_bits, _ = _check_split(split, messages)
    t = np.arange(messages) >> s_bits
    return (t[:, None] == t[None, :]) / 2.0**s_bits


# Transmitter faking


def _cliques(cb):
    """Multiplicity of each distinct codeword in the clique of each distinct codeword."""
    if not cb.layered:
        raise CodebookError("transmitter faking needs a layered codebook")
    distinct, counts = message_counts(cb)
    clouds = np.asarray(cb.cloud_of)
    # cloud of the smallest message holding the word
    owner_cloud = clouds[np.argmax(counts > 0, axis=0)]
    per_cloud = np.zeros((clouds.max() + 1, distinct.size))
    np.add.at(per_cloud, clouds, counts)
    return distinct, per_cloud[owner_cloud]


def transmitter_fake_law(cb):
    """
    Row w of the result is the law of X~ given X = w.

    Returns:
        (distinct codeword keys, stochastic matrix over distinct codewords)
    """
    distinct, cliques = _cliques(cb)
    return distinct, cliques / cliques.sum(axis=1, keepdims=True)


def naive_transmitter_fake_law(cb):
    """X~ uniform over the whole codebook, ignoring X."""
    distinct, counts = message_counts(cb)
    row = counts.sum(axis=0) / counts.sum()
    return distinct, np.tile(row, (distinct.size, 1))


def _key_to_word(key, n, size):
    word = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        key, word[i] = divmod(key, size)
    return word


def fake_transmitter(cb, x_vec, k_a):
    """A codeword drawn uniformly from the multiset of x's cloud."""
    x = symbol_indices(x_vec, cb.x_size, "input")
    if x.size != cb.n:
        raise ShapeMismatchError(f"codeword has {x.size} symbols, blocklength is {cb.n}")
    key = sequence_index(x, cb.x_size)
    distinct, cliques = _cliques(cb)
    slot = np.searchsorted(distinct, key)
    if slot == distinct.size or distinct[slot] != key:
        raise CodewordError("x is not a codeword")
    weights = cliques[slot]
    rng = randomness.stream(k_a, "fake-transmitter", key)
    pick = int(rng.choice(distinct.size, p=weights / weights.sum()))
    return _key_to_word(int(distinct[pick]), cb.n, cb.x_size)


# Receiver faking


def received_law(cb, bob):
    """Q_Y over all output sequences induced by a uniform message and the code."""
    n, y_size = cb.n, bob.out_size
    _check_budget(cb.messages * cb.randomness * y_size**n, "output law")
    q = np.zeros(y_size**n)
    for word in cb.words.reshape(-1, n):
        lik = np.ones(1)
        for x in word:
            lik = np.outer(lik, bob.rows[x]).ravel()
        q += lik
    return q / (cb.messages * cb.randomness)


def _class_keys(part, n):
    digits = sequence_digits(n, part.alphabet_size)
    classes = np.asarray(part.class_of, dtype=np.int64)[digits]
    weights = part.size ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return classes @ weights


def receiver_fake_law(cb, ch, witness, row_tol=1e-9):
    """
    Row y of the result is Q_{Y|V}(.|v(y)), V the zero-information sequence
    of y w.r.t. the degrading map `witness`.
    """
    bob = marginal(ch, Party.BOB)
    part = zero_info_partition(witness, row_tol)
    n = cb.n
    size = ch.y_size**n
    _check_budget(size * size, "receiver faking law")
    q = received_law(cb, bob)
    keys = _class_keys(part, n)
    same = keys[:, None] == keys[None, :]
    law = np.where(same, q[None, :], 0.0)
    totals = law.sum(axis=1, keepdims=True)
    # classes Bob never receives keep y
    return np.where(totals > 0, law / np.where(totals > 0, totals, 1.0), np.eye(size))


def fake_receiver(cb, ch, witness, y_vec, k_b, row_tol=1e-9):
    """A sequence drawn from the code-induced Q_{Y|V} for the class sequence of y."""
    bob = marginal(ch, Party.BOB)
    part = zero_info_partition(witness, row_tol)
    y = symbol_indices(y_vec, ch.y_size, "output")
    if y.size != cb.n:
        raise ShapeMismatchError(f"received {y.size} symbols, blocklength is {cb.n}")
    options = [part.classes[part.class_of[s]] for s in y]
    count = math.prod(len(o) for o in options)
    _check_budget(count * cb.messages * cb.randomness, "receiver faking")
    candidates = np.array(list(itertools.product(*options)), dtype=np.int64).reshape(count, cb.n)
    weights = np.zeros(count)
    for word in cb.words.reshape(-1, cb.n):
        weights += np.prod(bob.rows[word[None, :], candidates], axis=1)
    total = weights.sum()
    if total <= 0:
        raise CodebookError("the class sequence of y has zero probability under the code")
    rng = randomness.stream(k_b, "fake-receiver", sequence_index(y, ch.y_size))
    return candidates[int(rng.choice(count, p=weights / total))].copy()


# Dumps


def dump_codebook(cb, x_names=None):
    names = list(x_names) if x_names is not None else [str(x) for x in range(cb.x_size)]
    payload = {
        "n": cb.n,
        "kind": cb.kind,
        "messages": cb.messages,
        "randomness": cb.randomness,
        "seed": cb.seed,
        "rates": cb.rates or {},
        "words": [[[names[x] for x in word] for word in per_message] for per_message in cb.words],
    }
    if cb.layered:
        payload["layer"] = {
            "cloud_of": list(cb.cloud_of),
            "cloud_words": np.asarray(cb.cloud_words).tolist(),
        }
    if cb.split is not None:
        payload["split"] = dict(zip(("s_bits", "t_bits", "r_bits"), cb.split))
    return payload


def codebook_digest(cb):
    canonical = json.dumps(dump_codebook(cb), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

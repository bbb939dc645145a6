"""
Exact and Monte Carlo evaluation of codes and faking procedures.

The exact joint of (M, W, W~, Z) is kept factorised as

    Q(m, w, w~, z) = q_mwz[m, w, z] * fake[w, w~]

which is the Markov chain W~ - W - Z written as a product. W is the message
(message setting), the distinct codewords (transmitter setting) or every
output sequence (receiver setting). Z sequences are packed row-major.

All entropies and divergences are in bits.
"""

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import norm

from . import randomness
from .channel import (
    Party,
    degrading_witness,
    joint_sequence_likelihoods,
    marginal,
    physically_degraded_law,
    sequence_digits,
    sequence_likelihoods,
)
from .codec import (
    DEFAULT_EPS,
    ENUMERATION_BUDGET,
    Decoder,
    Setting,
    decode_all,
    decode_batch,
    message_counts,
    message_fake_law,
    naive_transmitter_fake_law,
    receiver_fake_law,
    transmitter_fake_law,
    transmitter_messages,
)
from .exceptions import (
    EnumerationBudgetError,
    InformationConsistencyError,
    MixingError,
    SequencePackingError,
    UsageError,
)
from .outputs import rounded
from .probkit import (
    INFINITE,
    JointPmf,
    conditional_entropy,
    entropy,
    is_infinite,
    kl_divergence,
    mutual_information,
)

logger = logging.getLogger(__name__)

SUM_TOL = 1e-9
RESIDUAL_TOL = 1e-9
PACKED_BITS = 63
MONTE_CARLO_BATCH = 2**22
CONFIDENCE = 0.95

DEFAULT_PROCEDURE = {
    Setting.MESSAGE: "uniform-s",
    Setting.TRANSMITTER: "clique",
    Setting.RECEIVER: "zero-info",
}
PROCEDURES = {
    Setting.MESSAGE: ("uniform-s", "identity"),
    Setting.TRANSMITTER: ("clique", "uniform", "identity"),
    Setting.RECEIVER: ("zero-info", "identity"),
}
FAKE_PROCEDURES = ("uniform-s", "clique", "uniform", "zero-info", "identity")


@dataclass(frozen=True)
class FakeConfig:
    """
    How the summoned party fakes.

    procedure: uniform-s (fresh confidential bits), clique (uniform codeword
    of the same cloud), uniform (uniform codeword of the whole codebook, the
    detectable strategy), zero-info (Q_{Y|V} resampling), identity (tell the
    truth). None picks the setting's default.
    split: (s_bits, t_bits) used by uniform-s when the codebook has none.
    """

    procedure: str | None = None
    decoder: str = Decoder.ML
    eps: float = DEFAULT_EPS
    row_tol: float = 1e-9
    degraded_tol: float = 1e-7
    split: tuple | None = None

    def resolve(self, setting):
        procedure = self.procedure or DEFAULT_PROCEDURE[setting]
        if procedure not in PROCEDURES[setting]:
            raise UsageError(
                f"faking procedure {procedure!r} does not apply to the {setting} setting; "
                f"choose from {', '.join(PROCEDURES[setting])}"
            )
        return procedure


@dataclass(frozen=True, eq=False)
class ExactJoint:
    setting: Setting
    n: int
    procedure: str
    q_mwz: np.ndarray
    fake: np.ndarray
    msg: np.ndarray
    judy_rows: np.ndarray
    randomness: int = 1
    counts: np.ndarray | None = None
    split: tuple | None = None

    @property
    def messages(self):
        return self.q_mwz.shape[0]

    @property
    def w_size(self):
        return self.q_mwz.shape[1]

    def q_wz(self):
        return self.q_mwz.sum(axis=0)

    def q_fake_z(self):
        """Q_{W~,Z}."""
        return self.fake.T @ self.q_wz()

    def q_w(self):
        return self.q_mwz.sum(axis=(0, 2))

    def q_m_fake_z(self):
        """Q_{M,W~,Z}."""
        return np.einsum("mwz,wv->mvz", self.q_mwz, self.fake)

    def full(self):
        """The dense joint over (M, W, W~, Z)."""
        states = self.q_mwz.size * self.w_size
        _check_states(states)
        return self.q_mwz[:, :, None, :] * self.fake[None, :, :, None]


def _check_states(states):
    if states > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(states, ENUMERATION_BUDGET)


def _check_packing(n, z_size):
    bits = n * math.ceil(math.log2(z_size)) if z_size > 1 else 0
    if bits > PACKED_BITS:
        raise SequencePackingError(
            f"{n} symbols over {z_size} letters need {bits} bits, only {PACKED_BITS} available"
        )


def _message_split(cb, cfg):
    if cb.split is not None:
        return cb.split[:2]
    if cfg.split is not None:
        return tuple(cfg.split)
    raise UsageError("message faking needs a split (s_bits, t_bits)")


def exact_joint(setting, cb, ch, fake_cfg=None):
    """
    Exact law of (M, W, W~, Z) for a uniform message, the code, the channel
    and the faking procedure.

    Raises:
        EnumerationBudgetError: the state count exceeds the budget.
        SequencePackingError: Z sequences do not fit 63 bits.
    """
    setting = Setting(setting)
    cfg = fake_cfg or FakeConfig()
    procedure = cfg.resolve(setting)
    n, m_size, k_size = cb.n, cb.messages, cb.randomness
    _check_packing(n, ch.z_size)
    states = m_size * ch.x_size**n * ch.z_size**n
    if setting is Setting.RECEIVER:
        states *= ch.y_size**n
    _check_states(states)
    z_count = ch.z_size**n
    judy = marginal(ch, Party.JUDY)
    scale = 1.0 / (m_size * k_size)
    counts, split = None, None

    if setting is Setting.MESSAGE:
        _check_states(m_size * m_size * z_count)
        q_mwz = np.zeros((m_size, m_size, z_count))
        for m in range(m_size):
            for word in cb.words[m]:
                q_mwz[m, m] += scale * sequence_likelihoods(judy, word)
        if procedure == "uniform-s":
            split = _message_split(cb, cfg)
            fake = message_fake_law(split, m_size)
        else:
            fake = np.eye(m_size)
        msg = np.arange(m_size)

    elif setting is Setting.TRANSMITTER:
        distinct, counts = message_counts(cb)
        words = sequence_digits(n, cb.x_size)[distinct]
        q_mwz = np.zeros((m_size, distinct.size, z_count))
        for w, word in enumerate(words):
            lik = sequence_likelihoods(judy, word)
            q_mwz[:, w, :] = (counts[:, w] * scale)[:, None] * lik[None, :]
        if procedure == "clique":
            fake = transmitter_fake_law(cb)[1]
        elif procedure == "uniform":
            fake = naive_transmitter_fake_law(cb)[1]
        else:
            fake = np.eye(distinct.size)
        msg = transmitter_messages(cb)
        counts = counts * scale

    else:
        witness, exact = degrading_witness(ch, cfg.degraded_tol)
        bob = marginal(ch, Party.BOB)
        law = ch if exact else physically_degraded_law(bob, witness)
        if not exact:
            logger.info("channel is stochastically degraded; using its physically degraded version")
        y_count = ch.y_size**n
        q_mwz = np.zeros((m_size, y_count, z_count))
        for m in range(m_size):
            for word in cb.words[m]:
                q_mwz[m] += scale * joint_sequence_likelihoods(law, word)
        if procedure == "zero-info":
            fake = receiver_fake_law(cb, law, witness, cfg.row_tol)
        else:
            fake = np.eye(y_count)
        msg = decode_all(cb, law, cfg.decoder, cfg.eps)

    total = float(q_mwz.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise InformationConsistencyError(f"exact joint sums to {total!r}")
    logger.debug(f"exact joint: {setting} setting, {q_mwz.shape} states, faking {procedure}")
    return ExactJoint(
        setting, n, procedure, q_mwz, fake, msg, judy.rows, k_size, counts, split
    )


def _joint(arr):
    return JointPmf(arr, tol=SUM_TOL)


def error_probability(cb, ch, decoder=Decoder.ML, eps=DEFAULT_EPS):
    """Exact average error probability of Bob's decoder."""
    decisions = decode_all(cb, ch, decoder, eps)
    bob = marginal(ch, Party.BOB)
    error = 0.0
    for m in range(cb.messages):
        wrong = decisions != m
        for word in cb.words[m]:
            error += float(sequence_likelihoods(bob, word)[wrong].sum())
    return min(max(error / (cb.messages * cb.randomness), 0.0), 1.0)


def plausibility_kl(j):
    """KL(Q_{Z,W~} ‖ Q_{Z,W}); INFINITE when the fake reaches outside Q_{Z,W}."""
    return kl_divergence(_joint(j.q_fake_z()), _joint(j.q_wz()))


def _msg_fake_given_w(j):
    """Q_{W, Msg(W~)} as a (W, M) array."""
    onehot = np.zeros((j.w_size, j.messages))
    onehot[np.arange(j.w_size), j.msg] = 1.0
    return (j.q_w()[:, None] * j.fake) @ onehot


def deniability_rate(j):
    """(1/n) H(Msg(W~) | W)."""
    if j.n == 0:
        return 0.0
    return conditional_entropy(_joint(_msg_fake_given_w(j).T)) / j.n


# Bounds


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    relation: str = "<="

    @property
    def residual(self):
        if self.relation == "<=":
            return self.rhs - self.lhs
        return self.lhs - self.rhs

    @property
    def ok(self):
        return self.residual >= -RESIDUAL_TOL

    def to_dict(self):
        return {**asdict(self), "residual": self.residual, "ok": self.ok}


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the converse bounds, in bits."""

    min_log_judy: float
    lam: float
    kappa: float
    ell_x: float

    @property
    def mu_message(self):
        return 2.0 * self.lam

    @property
    def mu_codeword(self):
        return 2.0 * self.kappa

    def to_dict(self):
        return {**asdict(self), "mu_message": self.mu_message, "mu_codeword": self.mu_codeword}


def bound_constants(j):
    positive = j.judy_rows[j.judy_rows > 0]
    big_l = float(np.max(-np.log2(positive)))
    n = max(j.n, 1)
    lam = math.sqrt(2.0) * ((math.log2(j.messages) + math.log2(j.randomness)) / n + big_l)
    ell_x = 0.0
    if j.counts is not None:
        q_x = j.counts.sum(axis=0)
        ell_x = float(np.max(-np.log2(q_x[q_x > 0])))
    return BoundConstants(big_l, lam, math.sqrt(2.0) * big_l, ell_x)


def _entropy_of(arr):
    return entropy(_joint(arr) if arr.ndim > 1 else arr / arr.sum())


def _code_ambiguity(j):
    """H(X|M), H(M|X), H(X~|X,Msg(X~)), H(X~|Msg(X~)) and H(X|X~,M) for the transmitter setting."""
    counts = j.counts
    q_x = counts.sum(axis=0)
    joint_x_fake = q_x[:, None] * j.fake
    msg_fake = _msg_fake_given_w(j)
    q_fake = joint_x_fake.sum(axis=0)
    q_fake_msg = msg_fake.sum(axis=0)
    joint_m_x_fake = counts[:, :, None] * j.fake[None, :, :]
    return {
        "h_x_given_m": conditional_entropy(_joint(counts.T)),
        "h_m_given_x": conditional_entropy(_joint(counts)),
        "h_fake_given_x_msg": max(
            conditional_entropy(_joint(joint_x_fake.T))
            - conditional_entropy(_joint(msg_fake.T)),
            0.0,
        ),
        "h_fake_given_msg": max(entropy(q_fake / q_fake.sum()) - entropy(q_fake_msg), 0.0),
        "h_x_given_fake_m": max(
            _entropy_of(joint_m_x_fake) - _entropy_of(joint_m_x_fake.sum(axis=1)), 0.0
        ),
    }


def _fake_message_entropy(j):
    q = _msg_fake_given_w(j).sum(axis=0)
    return entropy(q / q.sum())


def equivocation_report(j, delta=None, rate=None):
    """
    Exact equivocations and the two-sided equivocation bounds of the setting.

    Returns:
        dict with h_m, h_m_given_z, h_m_given_fake_z, entropy_gap, constants,
        propositions (list of BoundCheck) and diagnostics.
    """
    delta = plausibility_kl(j) if delta is None else delta
    rate = deniability_rate(j) if rate is None else rate
    h_m = math.log2(j.messages)
    h_m_given_z = conditional_entropy(_joint(j.q_mwz.sum(axis=1)))
    q_mvz = j.q_m_fake_z()
    h_m_given_fake_z = conditional_entropy(_joint(q_mvz.reshape(j.messages, -1)))
    report = {
        "h_m": h_m,
        "h_m_given_z": h_m_given_z,
        "h_m_given_fake_z": h_m_given_fake_z,
        "entropy_gap": abs(h_m - _fake_message_entropy(j)),
        "constants": bound_constants(j).to_dict(),
        "propositions": [],
        "diagnostics": [],
    }
    if is_infinite(delta):
        report["diagnostics"].append("plausibility KL is infinite; equivocation bounds skipped")
        return report
    if j.setting is Setting.RECEIVER:
        report["diagnostics"].append("equivocation bounds are not stated for the receiver setting")
        return report

    c = bound_constants(j)
    n, nd, root = j.n, j.n * rate, math.sqrt(delta)
    amb = _code_ambiguity(j) if j.setting is Setting.TRANSMITTER else None
    h_x_given_m = amb["h_x_given_m"] if amb else 0.0
    props = [
        BoundCheck(
            "H(M|Z) lower",
            h_m_given_z,
            nd - h_x_given_m - 2.0 * delta - n * c.mu_message * root,
            ">=",
        )
    ]
    if j.setting is Setting.MESSAGE:
        slack = delta + n * c.lam * root
        props += [
            BoundCheck("H(M|M~,Z) lower", h_m_given_fake_z, nd - slack, ">="),
            BoundCheck("H(M|M~,Z) upper", h_m_given_fake_z, nd + slack),
        ]
    else:
        report["ambiguity"] = amb
        # n*mu*sqrt(delta) with mu = 2*kappa, plus the finite-n terms
        slack = delta + math.sqrt(2.0 * delta) * c.ell_x + n * c.mu_codeword * root
        props += [
            BoundCheck(
                "H(M|Z,X~) lower",
                h_m_given_fake_z,
                nd - h_x_given_m - delta - slack,
                ">=",
            ),
            BoundCheck(
                "H(M|Z,X~) upper",
                h_m_given_fake_z,
                nd + amb["h_m_given_x"] + amb["h_fake_given_x_msg"] + slack,
            ),
        ]
    report["propositions"] = props
    return report


def lemma_bound_check(j, delta=None):
    """
    Left- and right-hand sides of the near-independence inequalities.

    Message setting: I(M;Z|M~) and |H(M) - H(M~)|. Transmitter setting:
    I(X;Z|X~), |H(X|X~) - H(X~|X)|, |H(X) - H(X~)| and
    |H(X|X~,M) - H(X~|X,Msg(X~))|.

    Returns:
        (list of BoundCheck, list of diagnostics)
    """
    delta = plausibility_kl(j) if delta is None else delta
    if is_infinite(delta):
        return [], ["plausibility KL is infinite; lemma checks skipped"]
    if j.setting is Setting.RECEIVER:
        return [], ["lemma checks are not stated for the receiver setting"]
    c = bound_constants(j)
    n, root = j.n, math.sqrt(delta)
    # I(W;Z|W~) = H(Z|W~) - H(Z|W) under W~ - W - Z
    q_fake_z = j.q_fake_z()
    h_z_given_fake = conditional_entropy(_joint(q_fake_z.T))
    h_z_given_w = conditional_entropy(_joint(j.q_wz().T))
    cmi = max(h_z_given_fake - h_z_given_w, 0.0)

    if j.setting is Setting.MESSAGE:
        rhs = delta + n * c.lam * root
        gap = abs(math.log2(j.messages) - _fake_message_entropy(j))
        return [
            BoundCheck("I(M;Z|M~)", cmi, rhs),
            BoundCheck("|H(M)-H(M~)|", gap, rhs),
        ], []

    amb = _code_ambiguity(j)
    q_x = j.q_w()
    joint_x_fake = q_x[:, None] * j.fake
    q_fake = joint_x_fake.sum(axis=0)
    h_x, h_fake = entropy(q_x / q_x.sum()), entropy(q_fake / q_fake.sum())
    h_x_given_fake = conditional_entropy(_joint(joint_x_fake))
    h_fake_given_x = conditional_entropy(_joint(joint_x_fake.T))
    spread = delta + math.sqrt(2.0 * delta) * c.ell_x
    return [
        BoundCheck("I(X;Z|X~)", cmi, delta + n * c.kappa * root),
        BoundCheck("|H(X|X~)-H(X~|X)|", abs(h_x_given_fake - h_fake_given_x), spread),
        BoundCheck("|H(X)-H(X~)|", abs(h_x - h_fake), spread),
        BoundCheck(
            "|H(X|X~,M)-H(X~|X,Msg(X~))|",
            abs(amb["h_x_given_fake_m"] - amb["h_fake_given_x_msg"]),
            spread + max(amb["h_x_given_m"], amb["h_fake_given_msg"]),
        ),
    ], []


def corollary_kl(j):
    """KL(Q_S Q_{T,Z} ‖ Q_{S,T,Z}) for a message-setting joint with a split."""
    if j.setting is not Setting.MESSAGE or j.split is None:
        raise UsageError("the (S,T,Z) divergence needs a message-setting joint with a split")
    s_bits, t_bits = j.split
    q_stz = j.q_mwz.sum(axis=1).reshape(2**t_bits, 2**s_bits, -1).transpose(1, 0, 2)
    q_s = q_stz.sum(axis=(1, 2))
    q_tz = q_stz.sum(axis=0)
    return kl_divergence(_joint(q_s[:, None, None] * q_tz[None]), _joint(q_stz))


# Reverse-KL mixing


@dataclass(frozen=True)
class MixingResult:
    """
    joint: P(i_new, i~, j) over the kept symbols.
    kept_i, kept_j: indices of the symbols with positive mass.
    """

    joint: np.ndarray
    kept_i: np.ndarray
    kept_j: np.ndarray
    alpha: float
    p_equal: float
    marginal_gap: float
    mi_new: float
    beta: float
    reverse_kl: float
    kl_bound: float

    @property
    def checks(self):
        return {
            "stays_with_probability": self.p_equal >= 1.0 - self.alpha - 1e-12,
            "marginal_preserved": self.marginal_gap <= 1e-12,
            "information_not_increased": self.mi_new <= self.beta + 1e-10,
            "reverse_kl_bounded": self.reverse_kl <= self.kl_bound + 1e-10,
        }

    def to_dict(self):
        payload = {
            k: v for k, v in asdict(self).items() if k not in ("joint", "kept_i", "kept_j")
        }
        payload["checks"] = self.checks
        return payload


def mix_for_reverse_kl(joint, alpha):
    """
    Mix I~ towards its own marginal so that P_I P_J ≪ P_{I,J}.

    P(i | i~) = (1 - alpha) 1{i = i~} + alpha P_I~(i). I stays equal to I~
    with probability at least 1 - alpha and keeps its marginal, and
    KL(P_I P_J ‖ P_{I,J}) <= sqrt(2 beta) log2(1/alpha) with beta = I(I~;J).
    """
    if not 0.0 < alpha <= 1.0:
        raise MixingError(f"alpha must lie in (0, 1], got {alpha}")
    arr = joint.probs if isinstance(joint, JointPmf) else _joint(np.asarray(joint)).probs
    kept_i = np.flatnonzero(arr.sum(axis=1) > 0)
    kept_j = np.flatnonzero(arr.sum(axis=0) > 0)
    p = arr[np.ix_(kept_i, kept_j)]
    p = p / p.sum()
    p_tilde = p.sum(axis=1)
    p_j = p.sum(axis=0)

    # mix[i~, i]
    mix = (1.0 - alpha) * np.eye(p_tilde.size) + alpha * p_tilde[None, :]
    full = mix.T[:, :, None] * p[None, :, :]
    p_ij = full.sum(axis=1)
    p_i = p_ij.sum(axis=1)
    beta = mutual_information(_joint(p))
    reverse_kl = kl_divergence(_joint(p_i[:, None] * p_j[None, :]), _joint(p_ij))
    kl_bound = math.sqrt(2.0 * beta) * math.log2(1.0 / alpha) if alpha < 1.0 else 0.0
    return MixingResult(
        joint=full,
        kept_i=kept_i,
        kept_j=kept_j,
        alpha=alpha,
        p_equal=float(np.sum(p_tilde * np.diag(mix))),
        marginal_gap=float(np.max(np.abs(p_i - p_tilde))),
        mi_new=mutual_information(_joint(p_ij)),
        beta=beta,
        reverse_kl=reverse_kl,
        kl_bound=kl_bound,
    )


# Monte Carlo


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    low: float
    high: float
    trials: int
    errors: int

    def contains(self, value):
        return self.low <= value <= self.high


def wilson_interval(errors, trials, confidence=CONFIDENCE):
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


def monte_carlo(cb, ch, trials, seed, decoder=Decoder.ML, eps=DEFAULT_EPS):
    """Simulated error probability with a Wilson 95% interval."""
    if trials < 1:
        raise UsageError(f"trials must be at least 1, got {trials}")
    bob = marginal(ch, Party.BOB)
    cdf = np.cumsum(bob.rows, axis=1)
    cdf[:, -1] = 1.0
    rng = randomness.stream(seed, "monte-carlo")
    m = rng.integers(cb.messages, size=trials)
    r = rng.integers(cb.randomness, size=trials)
    x = cb.words[m, r]
    u = rng.random(x.shape)
    y = (u[..., None] > cdf[x]).sum(axis=-1)

    batch = max(1, MONTE_CARLO_BATCH // (cb.messages * cb.randomness))
    errors = 0
    for start in range(0, trials, batch):
        decisions = decode_batch(cb, ch, y[start : start + batch], decoder, eps)
        errors += int(np.sum(decisions != m[start : start + batch]))
    low, high = wilson_interval(errors, trials)
    logger.debug(f"monte carlo: {errors}/{trials} errors")
    return MonteCarloEstimate(errors / trials, low, high, trials, errors)


# Reports


@dataclass
class EvalReport:
    setting: str
    n: int
    messages: int
    procedure: str
    error_prob: float
    kl_plausibility: float
    deniability_rate: float
    h_m_given_z: float
    h_m_given_fake_z: float
    entropy_gap: float
    constants: dict = field(default_factory=dict)
    propositions: list = field(default_factory=list)
    lemmas: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    budget: int = ENUMERATION_BUDGET

    def __post_init__(self):
        if not 0.0 <= self.error_prob <= 1.0:
            raise InformationConsistencyError(f"error probability {self.error_prob} outside [0, 1]")
        if self.deniability_rate < 0.0:
            raise InformationConsistencyError(f"negative deniability rate {self.deniability_rate}")

    @property
    def bounds_hold(self):
        return all(check.ok for check in self.propositions + self.lemmas)

    def to_dict(self):
        payload = {
            "setting": self.setting,
            "n": self.n,
            "messages": self.messages,
            "procedure": self.procedure,
            "error_prob": self.error_prob,
            "kl_plausibility": INFINITE if is_infinite(self.kl_plausibility) else self.kl_plausibility,
            "deniability_rate": self.deniability_rate,
            "h_m_given_z": self.h_m_given_z,
            "h_m_given_fake_z": self.h_m_given_fake_z,
            "entropy_gap": self.entropy_gap,
            "constants": self.constants,
            "propositions": [check.to_dict() for check in self.propositions],
            "lemmas": [check.to_dict() for check in self.lemmas],
            "diagnostics": list(self.diagnostics),
            "budget": self.budget,
        }
        return rounded(payload)


def evaluate(setting, cb, ch, fake_cfg=None):
    """Every exact quantity of a code and faking procedure in one report."""
    cfg = fake_cfg or FakeConfig()
    j = exact_joint(setting, cb, ch, cfg)
    delta = plausibility_kl(j)
    rate = deniability_rate(j)
    equivocation = equivocation_report(j, delta, rate)
    lemmas, lemma_notes = lemma_bound_check(j, delta)
    report = EvalReport(
        setting=str(j.setting),
        n=j.n,
        messages=j.messages,
        procedure=j.procedure,
        error_prob=error_probability(cb, ch, cfg.decoder, cfg.eps),
        kl_plausibility=delta,
        deniability_rate=rate,
        h_m_given_z=equivocation["h_m_given_z"],
        h_m_given_fake_z=equivocation["h_m_given_fake_z"],
        entropy_gap=equivocation["entropy_gap"],
        constants=equivocation["constants"],
        propositions=equivocation["propositions"],
        lemmas=lemmas,
        diagnostics=equivocation["diagnostics"] + lemma_notes,
    )
    failing = [c.name for c in report.propositions + report.lemmas if not c.ok]
    if failing:
        logger.warning(f"bound checks failed: {', '.join(failing)}")
    return report

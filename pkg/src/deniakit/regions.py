"""
Rate/deniability frontiers.

Every region is reported as R_max(D): for each deniability rate D on a grid,
the largest rate R such that (R, D) is achievable.

* transmitter_region: max I(X;Y) s.t. I(X;Y|U0) >= D, U0 the
  zero-information variable of X w.r.t. P_{Z|X}.
* receiver_region: max I(X;Y) s.t. I(X;Y|V) >= D, V the zero-information
  variable of Y w.r.t. the degrading map P_{Z|Y}.
* message_region: max I(Y;V) + I(U;Y|V) - I(U;Z|V) s.t.
  I(U;Y|V) - I(U;Z|V) >= D over P_{V,U} P_{X|U}.

The first two are concave programs and are solved to optimality up to the
iteration budget. The third is not concave; its output is a lower bound.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from . import randomness
from .channel import (
    Party,
    bec_channel,
    channel_digest,
    degrading_witness,
    is_physically_degraded,
    marginal,
)
from .exceptions import RegionError, RegionGridError
from .outputs import format_number, to_json, write_atomic
from .probkit import LN2
from .simplex import ascend, project_rows, project_simplex
from .zeroinfo import DEFAULT_ROW_TOL, zero_info_partition

logger = logging.getLogger(__name__)

LOG2E = 1.0 / LN2
TINY = 1e-12
GRAD_CAP = 60.0
FEASIBILITY_SLACK = 1e-7
INCLUSION_TOL = 1e-6

DEFAULT_GRID_POINTS = 101
DEFAULT_RESTARTS = 32
DEFAULT_MAX_ITER = 5000
MESSAGE_RESTARTS = 64
MESSAGE_MAX_ITER = 2000
PENALTY_SCHEDULE = (10.0, 1e3, 1e5, 1e7)

EXACT = "exact"
LOWER_BOUND = "optimizer lower bound"
INNER_BOUND = "achievable (inner bound)"
CLOSED_FORM = "closed form"

CLOSED_FORM_KINDS = ("Rm", "Req", "Rbcc")


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = DEFAULT_RESTARTS
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    threads: int = 1
    penalty_schedule: tuple = PENALTY_SCHEDULE


MESSAGE_CONFIG = OptimizerConfig(restarts=MESSAGE_RESTARTS, max_iter=MESSAGE_MAX_ITER)


@dataclass(frozen=True)
class FrontierPoint:
    d: float
    r: float
    witness: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RegionBoundary:
    points: tuple
    kind: str
    channel_digest: str
    bound: str
    grid: tuple = ()
    infeasible: tuple = ()

    @property
    def meta(self):
        return {"kind": self.kind, "channel_digest": self.channel_digest, "bound": self.bound}

    def r_at(self, d):
        for point in self.points:
            if abs(point.d - d) <= 1e-12:
                return point.r
        return None


# Information functionals on arrays


def _h(v):
    return float(entr(v).sum() / LN2)


def _row_entropies(m):
    return entr(m).sum(axis=-1) / LN2


def _safelog(a):
    return np.log2(np.maximum(a, TINY))


def _kl_rows(rows, q):
    """D(rows[i] ‖ q[i]) for every row; q broadcasts against rows."""
    q = np.broadcast_to(q, rows.shape)
    terms = np.where(rows > 0, rows * (_safelog(rows) - _safelog(q)), 0.0)
    return np.minimum(terms.sum(axis=-1), GRAD_CAP)


def _kl_table(rows, qs):
    """out[v, u] = D(rows[u] ‖ qs[v])."""
    return np.minimum(-_row_entropies(rows)[None, :] - _safelog(qs) @ rows.T, GRAD_CAP)


def channel_capacity(d, tol=1e-12, max_iter=10_000):
    """
    Blahut-Arimoto capacity of a DMC.

    Returns:
        (capacity in bits, capacity-achieving input as an array)
    """
    w = d.rows
    p = np.full(d.in_size, 1.0 / d.in_size)
    for _ in range(max_iter):
        c = np.exp2(_kl_rows(w, p @ w))
        total = p @ c
        lower, upper = math.log2(total), math.log2(c.max())
        p = p * c / total
        if upper - lower < tol:
            break
    q = p @ w
    return _h(q) - float(p @ _row_entropies(w)), p


class _InputProblem:
    """
    max I(X;Y) s.t. I(X;Y|G) >= D over P_X.

    G is either a function of X (x_groups, transmitter) or a function of Y
    (y_groups, receiver).
    """

    def __init__(self, bob_rows, x_groups=None, y_groups=None):
        self.w = bob_rows
        self.row_h = _row_entropies(bob_rows)
        self.dim = bob_rows.shape[0]
        self.x_groups = x_groups
        if x_groups is not None:
            self.class_of = np.asarray(x_groups.class_of)
            self.x_ind = x_groups.indicator()
        if y_groups is not None:
            self.wv = bob_rows @ y_groups.indicator()
            self.wv_h = _row_entropies(self.wv)
        self.capacity_input = None

    def project(self, p):
        return project_simplex(p)

    def objective(self, p):
        return _h(p @ self.w) - float(p @ self.row_h)

    def grad_objective(self, p):
        return _kl_rows(self.w, p @ self.w) - LOG2E

    def constraint(self, p):
        if self.x_groups is not None:
            pu = p @ self.x_ind
            m = self.x_ind.T @ (p[:, None] * self.w)
            return float((entr(m).sum() - entr(pu).sum()) / LN2 - p @ self.row_h)
        return self.objective(p) - (_h(p @ self.wv) - float(p @ self.wv_h))

    def grad_constraint(self, p):
        if self.x_groups is not None:
            pu = p @ self.x_ind
            m = self.x_ind.T @ (p[:, None] * self.w)
            q_u = np.divide(m, pu[:, None], out=np.zeros_like(m), where=pu[:, None] > 0)
            grad = _kl_rows(self.w, q_u[self.class_of])
            return np.where(pu[self.class_of] > 0, grad, 0.0)
        return _kl_rows(self.w, p @ self.w) - _kl_rows(self.wv, p @ self.wv)

    def warm_starts(self):
        starts = [np.full(self.dim, 1.0 / self.dim)]
        if self.capacity_input is not None:
            starts.append(self.capacity_input)
        return starts

    def random_start(self, rng):
        return rng.dirichlet(np.ones(self.dim))

    def witness(self, p):
        return {"p_x": [float(v) for v in p]}


class _MessageProblem:
    """
    Joint search over P_{V,U} (one simplex) and P_{X|U} (row simplices).

    With pin_u the satellite law is the identity (U = X) and only P_{V,X}
    is searched.
    """

    def __init__(self, bob_rows, judy_rows, v_card, u_card, pin_u):
        self.w = bob_rows
        self.g = judy_rows
        self.x_size = bob_rows.shape[0]
        self.v_card = v_card
        self.pin_u = pin_u
        self.u_card = self.x_size if pin_u else u_card
        self.j_size = self.v_card * self.u_card
        self.dim = self.j_size + (0 if pin_u else self.u_card * self.x_size)
        self.capacity_input = None

    def split(self, theta):
        j = theta[: self.j_size].reshape(self.v_card, self.u_card)
        if self.pin_u:
            return j, np.eye(self.x_size)
        return j, theta[self.j_size :].reshape(self.u_card, self.x_size)

    def join(self, j, t):
        if self.pin_u:
            return j.ravel().copy()
        return np.concatenate([j.ravel(), t.ravel()])

    def project(self, theta):
        j, t = self.split(theta)
        j = project_simplex(j.ravel()).reshape(j.shape)
        return self.join(j, t if self.pin_u else project_rows(t))

    def _terms(self, theta):
        j, t = self.split(theta)
        wu, gu = t @ self.w, t @ self.g
        pu, pv = j.sum(axis=0), j.sum(axis=1)
        my, mz = j @ wu, j @ gu
        qy = my.sum(axis=0)
        h_y_v = (entr(my).sum() - entr(pv).sum()) / LN2
        h_z_v = (entr(mz).sum() - entr(pv).sum()) / LN2
        h_y_u = float(pu @ _row_entropies(wu))
        h_z_u = float(pu @ _row_entropies(gu))
        return j, t, wu, gu, pu, pv, my, mz, qy, h_y_v, h_z_v, h_y_u, h_z_u

    def objective(self, theta):
        *_, qy, h_y_v, h_z_v, h_y_u, h_z_u = self._terms(theta)
        return float(_h(qy) - h_y_u - h_z_v + h_z_u)

    def constraint(self, theta):
        *_, h_y_v, h_z_v, h_y_u, h_z_u = self._terms(theta)
        return float(h_y_v - h_y_u - h_z_v + h_z_u)

    def _gradients(self, theta):
        j, t, wu, gu, pu, pv, my, mz, qy, *_ = self._terms(theta)
        live = pv[:, None] > 0
        qy_v = np.divide(my, pv[:, None], out=np.zeros_like(my), where=live)
        qz_v = np.divide(mz, pv[:, None], out=np.zeros_like(mz), where=live)
        kl_judy = np.where(live, _kl_table(gu, qz_v), 0.0)
        d_constraint_j = np.where(live, _kl_table(wu, qy_v), 0.0) - kl_judy
        d_objective_j = (_kl_rows(wu, qy) - LOG2E)[None, :] - kl_judy
        if self.pin_u:
            return self.join(d_objective_j, None), self.join(d_constraint_j, None)
        lz_v = _safelog(qz_v)
        d_gu = j.T @ lz_v - pu[:, None] * _safelog(gu)
        d_wu_constraint = -(j.T @ _safelog(qy_v)) + pu[:, None] * _safelog(wu)
        d_wu_objective = pu[:, None] * (_safelog(wu) - _safelog(qy)[None, :])
        d_constraint_t = d_wu_constraint @ self.w.T + d_gu @ self.g.T
        d_objective_t = d_wu_objective @ self.w.T + d_gu @ self.g.T
        return (
            self.join(d_objective_j, d_objective_t),
            self.join(d_constraint_j, d_constraint_t),
        )

    def grad_objective(self, theta):
        return self._gradients(theta)[0]

    def grad_constraint(self, theta):
        return self._gradients(theta)[1]

    def _start(self, j, t=None):
        if t is None:
            t = np.eye(self.u_card, self.x_size)
            t[self.x_size :] = 1.0 / self.x_size
        return self.join(j, t)

    def warm_starts(self):
        x = self.x_size
        if self.u_card < x:
            return []
        inputs = [np.full(x, 1.0 / x)]
        if self.capacity_input is not None:
            inputs.append(self.capacity_input)
        starts = []
        for p in inputs:
            # V constant, U = X
            j = np.zeros((self.v_card, self.u_card))
            j[0, :x] = p
            starts.append(self._start(j))
            # V = U = X
            if self.v_card >= x:
                j = np.zeros((self.v_card, self.u_card))
                j[np.arange(x), np.arange(x)] = p
                starts.append(self._start(j))
            # one cloud carrying P_X plus one point-mass cloud per symbol
            if self.v_card >= x + 1:
                for weight in (0.25, 0.5, 0.75):
                    j = np.zeros((self.v_card, self.u_card))
                    j[0, :x] = weight * p
                    j[1 + np.arange(x), np.arange(x)] = (1.0 - weight) * p
                    starts.append(self._start(j))
        return starts

    def random_start(self, rng):
        j = rng.dirichlet(np.ones(self.j_size)).reshape(self.v_card, self.u_card)
        t = rng.dirichlet(np.ones(self.x_size), size=self.u_card)
        return self.join(j, t)

    def witness(self, theta):
        j, t = self.split(theta)
        pv = j.sum(axis=1)
        u_given_v = np.divide(j, pv[:, None], out=np.zeros_like(j), where=pv[:, None] > 0)
        return {
            "p_v": pv.tolist(),
            "p_u_given_v": u_given_v.tolist(),
            "p_x_given_u": t.tolist(),
        }


# Solver


def _maximise(fn, grad, starts, project, max_iter):
    best, best_value = None, -math.inf
    for start in starts:
        point, value = ascend(fn, grad, start, project, max_iter)
        if value > best_value:
            best, best_value = point, value
    return best, best_value


def _polish(problem, theta, d, anchor):
    """Move towards `anchor` until the deniability constraint holds."""
    if problem.constraint(theta) >= d:
        return theta
    low, high = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (low + high)
        if problem.constraint((1.0 - mid) * theta + mid * anchor) >= d:
            high = mid
        else:
            low = mid
    return (1.0 - high) * theta + high * anchor


def _solve_point(problem, d, starts, anchor, cfg):
    stage_iter = max(cfg.max_iter // len(cfg.penalty_schedule), 1)
    best, best_r = anchor, problem.objective(anchor)
    for start in starts:
        theta = problem.project(start)
        for rho in cfg.penalty_schedule:

            def penalised(t, rho=rho):
                return problem.objective(t) - rho * max(0.0, d - problem.constraint(t)) ** 2

            def penalised_grad(t, rho=rho):
                gap = max(0.0, d - problem.constraint(t))
                grad = problem.grad_objective(t)
                if gap > 0:
                    grad = grad + 2.0 * rho * gap * problem.grad_constraint(t)
                return grad

            theta, _ = ascend(penalised, penalised_grad, theta, problem.project, stage_iter)
        theta = _polish(problem, theta, d, anchor)
        if problem.constraint(theta) < d - FEASIBILITY_SLACK:
            continue
        r = problem.objective(theta)
        if r > best_r:
            best, best_r = theta, r
    return best, best_r


def _monotone(points):
    """Running maximum from the right: a point feasible at D is feasible at every smaller D."""
    repaired = list(points)
    for i in range(len(repaired) - 2, -1, -1):
        if repaired[i].r < repaired[i + 1].r:
            repaired[i] = FrontierPoint(repaired[i].d, repaired[i + 1].r, repaired[i + 1].witness)
    return tuple(repaired)


def _frontier_point(kind, d, r, witness):
    """Every feasible point has D <= R; a rate below D is an optimizer shortfall."""
    d, r = float(d), float(r)
    if r < d - INCLUSION_TOL:
        logger.warning(f"{kind} region: optimizer reached R={r:.6f} below D={d:.6f}; reporting R=D")
    return FrontierPoint(d, max(r, d), witness)


def _frontier(problem, d_grid, cfg, kind, digest, bound):
    anchor_starts = problem.warm_starts() + [
        problem.random_start(randomness.stream(cfg.seed, f"{kind}-anchor", k))
        for k in range(cfg.restarts)
    ]
    anchor, d_max = _maximise(
        problem.constraint, problem.grad_constraint, anchor_starts, problem.project, cfg.max_iter
    )
    logger.info(f"{kind} region: max deniability {d_max:.6f}, {len(d_grid)} grid points")

    def solve(index, d):
        if d > d_max + FEASIBILITY_SLACK:
            return None
        target = min(d, d_max)
        starts = problem.warm_starts() + [anchor]
        starts += [
            problem.random_start(randomness.stream(cfg.seed, f"{kind}-restart", index, k))
            for k in range(cfg.restarts)
        ]
        theta, r = _solve_point(problem, target, starts, anchor, cfg)
        return _frontier_point(kind, d, r, problem.witness(theta))

    grid = [float(d) for d in d_grid]
    with ThreadPoolExecutor(max_workers=max(cfg.threads, 1)) as pool:
        results = list(pool.map(solve, range(len(grid)), grid))

    infeasible = tuple(d for d, point in zip(grid, results) if point is None)
    if infeasible:
        logger.warning(f"{kind} region: {len(infeasible)} grid points exceed max deniability")
    points = _monotone([point for point in results if point is not None])
    return RegionBoundary(points, kind, digest, bound, tuple(grid), infeasible)


def _transmitter_problem(ch, row_tol):
    bob, judy = marginal(ch, Party.BOB), marginal(ch, Party.JUDY)
    problem = _InputProblem(bob.rows, x_groups=zero_info_partition(judy, row_tol))
    problem.capacity_input = channel_capacity(bob)[1]
    return problem


def _receiver_problem(ch, row_tol, degraded_tol):
    witness, _ = degrading_witness(ch, tol=degraded_tol)
    bob = marginal(ch, Party.BOB)
    problem = _InputProblem(bob.rows, y_groups=zero_info_partition(witness, row_tol))
    problem.capacity_input = channel_capacity(bob)[1]
    return problem


def auxiliary_caps(ch):
    """Cardinality caps (|V|, |U|) sufficient for the message region."""
    return ch.x_size + 2, (ch.x_size + 1) * (ch.x_size + 2)


def _message_problem(ch, caps, degraded_tol):
    v_cap, u_cap = auxiliary_caps(ch)
    v_card, u_card = caps if caps is not None else (v_cap, u_cap)
    if not (1 <= v_card <= v_cap and 1 <= u_card <= u_cap):
        raise RegionError(f"caps {(v_card, u_card)} outside 1..{(v_cap, u_cap)}")
    bob, judy = marginal(ch, Party.BOB), marginal(ch, Party.JUDY)
    degraded, _ = is_physically_degraded(ch, tol=degraded_tol)
    if degraded:
        logger.debug("degraded channel: searching with U = X")
    problem = _MessageProblem(bob.rows, judy.rows, v_card, u_card, pin_u=degraded)
    problem.capacity_input = channel_capacity(bob)[1]
    return problem


def default_grid(d_max, points=DEFAULT_GRID_POINTS):
    if d_max <= FEASIBILITY_SLACK:
        return (0.0,)
    return tuple(float(d) for d in np.linspace(0.0, d_max, points))


def _max_constraint(problem, cfg, kind):
    starts = problem.warm_starts() + [
        problem.random_start(randomness.stream(cfg.seed, f"{kind}-anchor", k))
        for k in range(cfg.restarts)
    ]
    return _maximise(
        problem.constraint, problem.grad_constraint, starts, problem.project, cfg.max_iter
    )[1]


def max_deniability(
    ch, kind, opt_cfg=None, row_tol=DEFAULT_ROW_TOL, degraded_tol=1e-7, caps=None
):
    """Largest deniability rate the region of `kind` admits (tx, rx or message)."""
    if kind == "tx":
        cfg = opt_cfg or OptimizerConfig()
        return _max_constraint(_transmitter_problem(ch, row_tol), cfg, kind)
    if kind == "rx":
        cfg = opt_cfg or OptimizerConfig()
        return _max_constraint(_receiver_problem(ch, row_tol, degraded_tol), cfg, kind)
    if kind == "message":
        cfg = opt_cfg or MESSAGE_CONFIG
        return _max_constraint(_message_problem(ch, caps, degraded_tol), cfg, kind)
    raise RegionError(f"unknown region kind {kind!r}")


def transmitter_region(ch, d_grid=None, opt_cfg=None, row_tol=DEFAULT_ROW_TOL):
    cfg = opt_cfg or OptimizerConfig()
    problem = _transmitter_problem(ch, row_tol)
    if d_grid is None:
        d_grid = default_grid(_max_constraint(problem, cfg, "tx"))
    return _frontier(problem, d_grid, cfg, "tx", channel_digest(ch), EXACT)


def receiver_region(ch, d_grid=None, opt_cfg=None, row_tol=DEFAULT_ROW_TOL, degraded_tol=1e-7):
    cfg = opt_cfg or OptimizerConfig()
    problem = _receiver_problem(ch, row_tol, degraded_tol)
    if d_grid is None:
        d_grid = default_grid(_max_constraint(problem, cfg, "rx"))
    return _frontier(problem, d_grid, cfg, "rx", channel_digest(ch), INNER_BOUND)


def message_region(ch, d_grid=None, caps=None, opt_cfg=None, degraded_tol=1e-7):
    cfg = opt_cfg or MESSAGE_CONFIG
    problem = _message_problem(ch, caps, degraded_tol)
    if d_grid is None:
        d_grid = default_grid(_max_constraint(problem, cfg, "message"))
    return _frontier(problem, d_grid, cfg, "message", channel_digest(ch), LOWER_BOUND)


# Erasure example in closed form


def _check_erasure(p):
    if not 0.0 < p < 1.0:
        raise RegionError(f"erasure probability {p} outside (0, 1)")


def bec_closed_forms(p, kind, r):
    """
    Largest deniability at rate r for the erasure example (Y = X, Z = BEC(p)).

    Rm is the message region, Req the equivocation region and Rbcc the
    broadcast-with-confidential-messages region.
    """
    _check_erasure(p)
    if not 0.0 <= r <= 1.0:
        raise RegionError(f"rate {r} outside [0, 1]")
    if kind == "Rm":
        return min(p * (1.0 - r) / (1.0 - p), r)
    if kind == "Req":
        return min(p, r)
    if kind == "Rbcc":
        if p < 0.5:
            return max(min(p * (1.0 - p - r) / (1.0 - 2.0 * p), r), 0.0)
        # with Judy's channel the weaker one, a constant V already gives R = D = p
        return r if r <= p else 0.0
    raise RegionError(f"unknown closed form {kind!r}")


def _closed_form_rate(p, kind, d):
    if kind == "Rm":
        return 1.0 - d * (1.0 - p) / p
    if kind == "Req":
        return 1.0
    if kind == "Rbcc":
        if p < 0.5:
            return 1.0 - p - d * (1.0 - 2.0 * p) / p
        return p
    raise RegionError(f"unknown closed form {kind!r}")


def closed_form_region(p, kind, d_grid=None):
    """The closed-form region of the erasure example as an R_max(D) frontier."""
    _check_erasure(p)
    if d_grid is None:
        d_grid = default_grid(p)
    points, infeasible = [], []
    for d in d_grid:
        d = float(d)
        if d > p + 1e-12 or d < 0.0:
            infeasible.append(d)
            continue
        points.append(FrontierPoint(d, max(_closed_form_rate(p, kind, d), d), {"p": p}))
    digest = channel_digest(bec_channel(p))
    region_kind = {"Rm": "message", "Req": "eq", "Rbcc": "bcc"}[kind]
    return RegionBoundary(
        tuple(points), region_kind, digest, CLOSED_FORM, tuple(float(d) for d in d_grid), tuple(infeasible)
    )


def region_inclusion_check(a, b):
    """True when a ⊆ b on their common grid."""
    if a.channel_digest != b.channel_digest:
        raise RegionGridError(
            f"regions belong to different channels ({a.channel_digest} vs {b.channel_digest})"
        )
    if len(a.grid) != len(b.grid) or not np.allclose(a.grid, b.grid, rtol=0.0, atol=1e-12):
        raise RegionGridError("regions were computed on different grids")
    for point in a.points:
        other = b.r_at(point.d)
        if other is None or point.r > other + INCLUSION_TOL:
            return False
    return True


# Output


CSV_HEADER = "D,R,kind,channel_digest"


def region_csv(boundary):
    lines = [CSV_HEADER]
    for point in boundary.points:
        lines.append(
            f"{format_number(point.d)},{format_number(point.r)},"
            f"{boundary.kind},{boundary.channel_digest}"
        )
    return "\n".join(lines) + "\n"


def region_witnesses(boundary):
    return to_json(
        {
            "meta": boundary.meta,
            "infeasible": list(boundary.infeasible),
            "witnesses": {str(i): point.witness for i, point in enumerate(boundary.points)},
        }
    )


def write_region_csv(boundary, path):
    """Write the CSV and its `<path>.witnesses.json` sidecar atomically."""
    csv_path = write_atomic(path, region_csv(boundary))
    sidecar = csv_path.with_name(csv_path.name + ".witnesses.json")
    write_atomic(sidecar, region_witnesses(boundary))
    return csv_path, sidecar

"""
Principal infinity-eigenvalue and minimal eigenfunctions.

The eigenvalue is exact: 1 / inradius. Eigenfunctions are fixed points of
the monotone node update

    T u(x) = max(midrange(x), min_i u_i / (1 - lambda g_i))

with boundary nodes held at 0 and constraint nodes at 1, where the
midrange is max_i min_j (g_j u_i + g_i u_j) / (g_i + g_j) over the
neighbours u_i at gaps g_i.

Solving runs in two phases. A decreasing iteration from the supersolution
min(1, Lambda d(., boundary)) at a level slightly below the target lands on
the unique subcritical fixed point; an increasing iteration at the target
level then climbs to the smallest fixed point above it, the discrete
Perron infimum. Both phases may jump ahead with a policy-iteration step.
Near the principal eigenvalue the sweeps contract very slowly, so the
downward phase takes its first policy from a warm start: fixed points on
a ladder of levels Lambda (1 - anneal 2^-k) climbing toward it.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from inflap.config import SolverConfig
from inflap.const import (
    CHUNK_ELEMENTS,
    DECAY_THRESHOLD,
    DEFAULT_COLLAPSE_SWEEPS,
    FEASIBILITY_SLACK,
    MONOTONE_SLACK,
    POLICY_SLACK,
    Branch,
    NodeRole,
    SolveStatus,
    SweepMode,
)
from inflap.metric_graph import (
    GraphPoint,
    MetricGraph,
    RidgeSet,
    boundary_distance_field,
    inradius_and_ridge,
    require_valid,
)
from inflap.numeric import Scalar, close, format_scalar, is_exact, parse_scalar, tolerance
from inflap.pl_calculus import PLFunction, distance_field, slopes_at
from inflap.report import CheckReport, Witness, verdict

_LOG = logging.getLogger(__name__)


def principal_eigenvalue(g: MetricGraph) -> tuple[Scalar, RidgeSet]:
    """Lambda = 1 / R, exact on rational graphs, with the ridge where R is attained."""
    ridge = inradius_and_ridge(g)
    return 1 / ridge.value, ridge


# -- Discretization ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Discretization:
    """Nodes along every edge at spacing <= h, with all vertices and ridge points among them."""

    graph: MetricGraph
    h: Scalar
    nodes: tuple[GraphPoint, ...]
    roles: tuple[NodeRole, ...]
    neighbors: tuple[tuple[tuple[int, Scalar], ...], ...]
    edge_nodes: Mapping[str, tuple[tuple[Scalar, int], ...]]
    constraint: tuple[GraphPoint, ...]
    ridge: RidgeSet
    _index: dict[GraphPoint, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._index.update({p: k for k, p in enumerate(self.nodes)})

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def free(self) -> np.ndarray:
        return np.array([k for k, role in enumerate(self.roles) if role is NodeRole.INTERIOR], dtype=np.intp)

    @property
    def fixed(self) -> np.ndarray:
        return np.array([k for k, role in enumerate(self.roles) if role is not NodeRole.INTERIOR], dtype=np.intp)

    @property
    def max_gap(self) -> Scalar:
        return max(gap for nbrs in self.neighbors for _, gap in nbrs)

    def index_of(self, point: GraphPoint) -> int:
        try:
            return self._index[self.graph.canonical(point)]
        except KeyError:
            raise ValueError(f"{point} is not a node of the discretization") from None

    def fixed_values(self) -> np.ndarray:
        """0 on boundary nodes, 1 on constraint nodes, 0 elsewhere."""
        return np.array([1.0 if role is NodeRole.CONSTRAINT else 0.0 for role in self.roles])

    def sample(self, fn: PLFunction) -> NodeFunction:
        """Node values of a PL function on the same graph."""
        return NodeFunction(self, np.array([float(fn(p)) for p in self.nodes]))

    def same_nodes(self, other: Discretization) -> bool:
        return self.graph == other.graph and self.nodes == other.nodes and self.roles == other.roles


def _edge_parameters(length: Scalar, h: Scalar, loop: bool) -> list[Scalar]:
    if is_exact(length, h):
        n = math.ceil(length / h)
    else:
        n = math.ceil(float(length) / float(h) - 1e-9)
    n = max(n, 2 if loop else 1)
    if isinstance(length, Fraction):
        return [length * k / n for k in range(n + 1)]
    return [length * (k / n) for k in range(n + 1)]


def _snap(ridge: RidgeSet, point: GraphPoint) -> GraphPoint | None:
    for candidate in ridge.points:
        if candidate == point:
            return candidate
        if candidate.is_vertex or point.is_vertex or candidate.edge != point.edge:
            continue
        if close(candidate.t, point.t):
            return candidate
    return None


def discretize(g: MetricGraph, h: object, constraint: Iterable[GraphPoint] = ()) -> Discretization:
    """Nodes and gaps for the monotone scheme, ordered by edge id then arclength."""
    require_valid(g)
    h = parse_scalar(h)
    if h <= 0:
        raise ValueError(f"spacing h must be positive, got {h}")
    lam, ridge = principal_eigenvalue(g)
    if h * lam >= 1:
        raise ValueError(f"h * Lambda = {h * lam} must be below 1")
    pinned = []
    for point in constraint:
        snapped = _snap(ridge, g.canonical(point))
        if snapped is None:
            raise ValueError(f"constraint point {point} is not on the high ridge")
        if snapped not in pinned:
            pinned.append(snapped)

    nodes: list[GraphPoint] = []
    index: dict[GraphPoint, int] = {}
    adjacency: list[list[tuple[int, Scalar]]] = []
    edge_nodes: dict[str, tuple[tuple[Scalar, int], ...]] = {}

    def node(point: GraphPoint) -> int:
        if point not in index:
            index[point] = len(nodes)
            nodes.append(point)
            adjacency.append([])
        return index[point]

    for edge in g.edges:
        ts = _edge_parameters(edge.length, h, edge.is_loop)
        for p in ridge.points:
            if p.is_vertex or p.edge != edge.id:
                continue
            near = [k for k, t in enumerate(ts) if close(t, p.t)]
            if near:
                ts[near[0]] = p.t
            else:
                ts.append(p.t)
        ts.sort()
        chain = []
        for t in ts:
            if t == 0:
                point = GraphPoint.at_vertex(edge.start)
            elif t == edge.length:
                point = GraphPoint.at_vertex(edge.end)
            else:
                point = GraphPoint(edge.id, t)
            chain.append((t, node(point)))
        for (t0, a), (t1, b) in zip(chain, chain[1:]):
            adjacency[a].append((b, t1 - t0))
            adjacency[b].append((a, t1 - t0))
        edge_nodes[edge.id] = tuple(chain)

    roles = []
    for p in nodes:
        if g.is_boundary(p):
            roles.append(NodeRole.BOUNDARY)
        elif p in pinned:
            roles.append(NodeRole.CONSTRAINT)
        else:
            roles.append(NodeRole.INTERIOR)
    _LOG.debug("Discretized %r at h=%s into %d nodes", g, h, len(nodes))
    return Discretization(
        g,
        h,
        tuple(nodes),
        tuple(roles),
        tuple(tuple(nbrs) for nbrs in adjacency),
        edge_nodes,
        tuple(pinned),
        ridge,
    )


@dataclass(frozen=True, eq=False)
class NodeFunction:
    """Values at the nodes of a discretization."""

    disc: Discretization
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.disc.size,):
            raise ValueError(f"expected {self.disc.size} node values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("node values must be finite")
        object.__setattr__(self, "values", values)

    def __call__(self, point: GraphPoint) -> float:
        return self.value_at(point)

    def value_at(self, point: GraphPoint) -> float:
        """Node value, or linear interpolation between the two nodes around ``point``."""
        point = self.disc.graph.canonical(point)
        if point in self.disc._index:
            return float(self.values[self.disc._index[point]])
        chain = self.disc.edge_nodes[point.edge]
        for (t0, a), (t1, b) in zip(chain, chain[1:]):
            if t0 <= point.t <= t1:
                s = float((point.t - t0) / (t1 - t0))
                return float(self.values[a] * (1 - s) + self.values[b] * s)
        raise ValueError(f"{point} not found on its edge")

    def to_pl(self) -> PLFunction:
        return PLFunction(
            self.disc.graph,
            {eid: [(t, float(self.values[k])) for t, k in chain] for eid, chain in self.disc.edge_nodes.items()},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NodeFunction):
            return NotImplemented
        return self.disc.same_nodes(other.disc) and np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


# -- The node operator ---------------------------------------------------------


class _Scheme:
    """T at a fixed level lambda, as padded numpy arrays and as a per-node plan."""

    def __init__(self, disc: Discretization, lam: Scalar, threads: int = 1) -> None:
        self.disc = disc
        self.lam = float(lam)
        self.threads = threads
        n = disc.size
        width = max(1, max(len(nbrs) for nbrs in disc.neighbors))
        self.index = np.zeros((n, width), dtype=np.intp)
        self.gap = np.ones((n, width))
        self.mask = np.zeros((n, width), dtype=bool)
        for k, nbrs in enumerate(disc.neighbors):
            for slot, (other, gap) in enumerate(nbrs):
                self.index[k, slot] = other
                self.gap[k, slot] = float(gap)
                self.mask[k, slot] = True
        if np.any(self.lam * self.gap[self.mask] >= 1):
            raise ValueError(f"lambda * gap must stay below 1 (lambda={lam}, max gap {float(disc.max_gap)})")
        self.coef = np.where(self.mask, 1.0 / (1.0 - self.lam * np.where(self.mask, self.gap, 0.0)), 1.0)
        self.free = disc.free
        self.fixed = disc.fixed
        rows = max(1, CHUNK_ELEMENTS // (width * width))
        self.chunks = [self.free[k : k + rows] for k in range(0, len(self.free), rows)]
        self.plan = [self._node_plan(int(x)) for x in self.free]

    def _node_plan(self, x: int) -> tuple:
        nbrs = [int(k) for k, _ in self.disc.neighbors[x]]
        gaps = [float(g) for _, g in self.disc.neighbors[x]]
        coefs = [1.0 / (1.0 - self.lam * g) for g in gaps]
        if len(nbrs) == 2:
            a, b = nbrs
            ga, gb = gaps
            return x, nbrs, coefs, (a, b, gb / (ga + gb), ga / (ga + gb))
        pairs = []
        for i, (ki, gi) in enumerate(zip(nbrs, gaps)):
            others = [(kj, gj / (gi + gj), gi / (gi + gj)) for j, (kj, gj) in enumerate(zip(nbrs, gaps)) if j != i]
            pairs.append((ki, others))
        return x, nbrs, coefs, pairs

    def evaluate(self, u: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, ...]:
        """T u on ``rows`` with the active branch and neighbour slots (i, j) per row."""
        idx, gap, mask = self.index[rows], self.gap[rows], self.mask[rows]
        vals = u[idx]
        count, width = vals.shape
        gi, gj = gap[:, :, None], gap[:, None, :]
        pair = (gj * vals[:, :, None] + gi * vals[:, None, :]) / (gi + gj)
        diag = np.arange(width)
        pair[:, diag, diag] = vals
        pair = np.where(mask[:, None, :], pair, np.inf)
        inner = pair.min(axis=2)
        inner_arg = pair.argmin(axis=2)
        inner = np.where(mask, inner, -np.inf)
        i_arg = inner.argmax(axis=1)
        at = np.arange(count)
        mid = inner[at, i_arg]
        j_arg = inner_arg[at, i_arg]
        eik_all = np.where(mask, vals * self.coef[rows], np.inf)
        k_arg = eik_all.argmin(axis=1)
        eik = eik_all[at, k_arg]
        use_eik = eik > mid
        return (
            np.where(use_eik, eik, mid),
            use_eik,
            np.where(use_eik, k_arg, i_arg),
            np.where(use_eik, k_arg, j_arg),
            mid,
            eik,
        )

    def _map_chunks(self, u: np.ndarray) -> list[tuple[np.ndarray, ...]]:
        if self.threads > 1 and len(self.chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(lambda rows: self.evaluate(u, rows), self.chunks))
        return [self.evaluate(u, rows) for rows in self.chunks]

    def parts(self, u: np.ndarray) -> tuple[np.ndarray, ...]:
        """All outputs of ``evaluate`` over the free nodes, in free-node order."""
        if not len(self.free):
            empty = np.empty(0)
            return empty, empty.astype(bool), empty.astype(np.intp), empty.astype(np.intp), empty, empty
        results = self._map_chunks(u)
        return tuple(np.concatenate([r[k] for r in results]) for k in range(6))

    def apply(self, u: np.ndarray) -> np.ndarray:
        out = u.copy()
        if len(self.free):
            out[self.free] = self.parts(u)[0]
        return out

    def jacobi_sweep(self, u: np.ndarray) -> float:
        new = self.apply(u)
        delta = float(np.max(np.abs(new - u))) if len(u) else 0.0
        u[:] = new
        return delta

    def gauss_seidel_sweep(self, u: np.ndarray) -> float:
        vals = u.tolist()
        delta = 0.0
        for x, nbrs, coefs, pairs in self.plan:
            eik = min(vals[k] * c for k, c in zip(nbrs, coefs))
            if isinstance(pairs, tuple):
                a, b, wa, wb = pairs
                mid = wa * vals[a] + wb * vals[b]
            else:
                mid = -math.inf
                for ki, others in pairs:
                    ui = vals[ki]
                    low = ui
                    for kj, wi, wj in others:
                        r = wi * ui + wj * vals[kj]
                        if r < low:
                            low = r
                    if low > mid:
                        mid = low
            new = eik if eik > mid else mid
            change = abs(new - vals[x])
            if change > delta:
                delta = change
            vals[x] = new
        u[:] = vals
        return delta

    def sweep(self, u: np.ndarray, mode: SweepMode) -> float:
        if mode is SweepMode.JACOBI:
            return self.jacobi_sweep(u)
        return self.gauss_seidel_sweep(u)

    def policy_candidate(self, u: np.ndarray) -> tuple[np.ndarray | None, bytes]:
        """Fixed point of the linear map obtained by freezing the active branch and neighbours of every node."""
        _, use_eik, i_slot, j_slot, _, _ = self.parts(u)
        key = use_eik.tobytes() + i_slot.tobytes() + j_slot.tobytes()
        rows = self.free
        count = len(rows)
        ni, nj = self.index[rows, i_slot], self.index[rows, j_slot]
        gi, gj = self.gap[rows, i_slot], self.gap[rows, j_slot]
        single = use_eik | (i_slot == j_slot)
        wi = np.where(use_eik, self.coef[rows, i_slot], np.where(single, 1.0, gj / (gi + gj)))
        wj = np.where(single, 0.0, gi / (gi + gj))
        at = np.arange(count)
        weights = sparse.csr_matrix(
            (np.concatenate([wi, wj]), (np.concatenate([at, at]), np.concatenate([ni, nj]))),
            shape=(count, self.disc.size),
        )
        system = sparse.identity(count, format="csc") - weights[:, rows].tocsc()
        rhs = weights[:, self.fixed] @ u[self.fixed] if len(self.fixed) else np.zeros(count)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MatrixRankWarning)
            solved = np.atleast_1d(spsolve(system, rhs))
        if not np.all(np.isfinite(solved)):
            return None, key
        candidate = u.copy()
        candidate[rows] = solved
        return candidate, key


# -- Solving -------------------------------------------------------------------


@dataclass
class _Phase:
    """Progress of one monotone iteration."""

    sweeps: int = 0
    max_update: float = math.inf
    monotone: bool = True
    accepted_jumps: int = 0
    infeasible: bool = False
    converged: bool = False


def _residual_sup(scheme: _Scheme, u: np.ndarray) -> float:
    free = scheme.free
    return float(np.max(np.abs(scheme.apply(u)[free] - u[free])))


def _accelerate(
    scheme: _Scheme,
    u: np.ndarray,
    upward: bool,
    unique: bool,
    config: SolverConfig,
    phase: _Phase,
    guide: np.ndarray | None = None,
) -> np.ndarray:
    """Policy iteration from ``guide`` (default ``u``) until the frozen policy repeats.

    A candidate on the phase's side of the fixed point (a supersolution going
    down, a subsolution going up) is merged with min or max. Below the
    principal eigenvalue the fixed point is unique, so a candidate that only
    lowers the sup-residual replaces u outright. At or above it an upward
    candidate must also stay above u and within ``bracket`` of it.
    """
    free = scheme.free
    best = _residual_sup(scheme, u)
    current = u if guide is None else guide
    seen: set[bytes] = set()
    for _ in range(config.policy_rounds):
        if best <= POLICY_SLACK:
            break
        candidate, key = scheme.policy_candidate(current)
        if candidate is None or key in seen:
            break
        seen.add(key)
        if float(np.min(candidate[free])) < -POLICY_SLACK or float(np.max(candidate[free])) > 1 + POLICY_SLACK:
            break
        image = scheme.apply(candidate)
        surplus = float(np.max(image[free] - candidate[free]))
        shortfall = float(np.max(candidate[free] - image[free]))
        sided = shortfall if upward else surplus
        if upward and not unique:
            ok = (
                sided <= POLICY_SLACK
                and bool(np.all(candidate >= u - POLICY_SLACK))
                and float(np.max(candidate - u)) <= config.bracket
            )
            if not ok:
                break
            u = np.maximum(u, candidate)
        elif sided <= POLICY_SLACK:
            u = np.maximum(u, candidate) if upward else np.minimum(u, candidate)
        elif unique and max(surplus, shortfall) < best:
            u = candidate
        elif unique:
            current = candidate
            continue
        else:
            break
        best = _residual_sup(scheme, u)
        phase.accepted_jumps += 1
        current = candidate
    return u


def _iterate(
    scheme: _Scheme,
    u: np.ndarray,
    upward: bool,
    unique: bool,
    config: SolverConfig,
    budget: int,
    guide: np.ndarray | None = None,
) -> tuple[np.ndarray, _Phase]:
    phase = _Phase()
    free = scheme.free
    if not len(free):
        phase.max_update, phase.converged = 0.0, True
        return u, phase
    while phase.sweeps < budget:
        if config.accelerate_every and phase.sweeps % config.accelerate_every == 0:
            u = _accelerate(scheme, u, upward, unique, config, phase, guide if phase.sweeps == 0 else None)
        before = u.copy()
        phase.max_update = scheme.sweep(u, config.mode)
        phase.sweeps += 1
        if upward and np.any(u < before - MONOTONE_SLACK):
            phase.monotone = False
        if not upward and np.any(u > before + MONOTONE_SLACK):
            phase.monotone = False
        if float(np.max(u[free])) > 1 + FEASIBILITY_SLACK:
            phase.infeasible = True
            break
        if phase.max_update < config.tol:
            phase.converged = True
            break
        if phase.sweeps % 1000 == 0:
            _LOG.debug("Sweep %d: max update %.3e", phase.sweeps, phase.max_update)
    return u, phase


@dataclass
class EigenResult:
    """Solver output with the eigenvalue data it was computed against.

    ``phase_monotone`` is True when every sweep moved in its own phase's
    direction (down while descending, up while climbing). It says nothing
    about the sequence across phases, and a policy step that only lowers the
    residual may leave the next sweep moving the other way.
    """

    lam: Scalar
    r_inf: Scalar
    ridge: RidgeSet
    u: NodeFunction
    level: Scalar
    status: SolveStatus
    iterations: int
    max_update: float
    residual_sup: float
    phase_monotone: bool
    constraint: tuple[GraphPoint, ...] = ()
    phases: list[dict[str, Any]] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": format_scalar(self.lam),
            "r_inf": format_scalar(self.r_inf),
            "ridge": [p.to_dict() for p in self.ridge.points],
            "level": format_scalar(self.level),
            "status": str(self.status),
            "iterations": self.iterations,
            "max_update": self.max_update,
            "residual_sup": self.residual_sup,
            "phase_monotone": self.phase_monotone,
            "constraint": [p.to_dict() for p in self.constraint],
            "phases": self.phases,
            "nodes": self.u.disc.size,
        }


def _resolve_constraint(g: MetricGraph, constraint: Sequence[GraphPoint] | str | None) -> tuple[GraphPoint, ...]:
    ridge = inradius_and_ridge(g)
    if constraint is None or constraint == "all":
        return ridge.points
    if isinstance(constraint, str):
        return tuple(g.resolve(part.strip()) for part in constraint.split(",") if part.strip())
    return tuple(constraint)


def initial_supersolution(disc: Discretization, lam: Scalar) -> np.ndarray:
    """min(1, lam d(., boundary)) at the nodes with the fixed values imposed."""
    field_ = boundary_distance_field(disc.graph)
    u = np.array([min(1.0, float(lam) * float(field_(p))) for p in disc.nodes])
    fixed = disc.fixed
    u[fixed] = disc.fixed_values()[fixed]
    return u


def anneal_levels(principal: float, start_level: float, config: SolverConfig) -> list[float]:
    """Levels Lambda (1 - anneal 2^-k) below ``start_level``, stopping once the gap reaches ``continuation``."""
    levels = []
    gap = config.anneal
    while gap > config.continuation:
        level = principal * (1 - gap)
        if level >= start_level:
            break
        levels.append(level)
        gap /= 2
    return levels


def _warm_start(
    disc: Discretization,
    u: np.ndarray,
    levels: list[float],
    config: SolverConfig,
    phases: list[dict[str, Any]],
) -> tuple[np.ndarray | None, int]:
    """Subcritical fixed points on a rising ladder of levels, each started from the last.

    Only the first rung descends from ``u``; later rungs climb from a fixed
    point at a lower level, which is a subsolution at the next. The top rung
    is returned as the policy guide for the downward phase, or None if a
    rung did not converge.
    """
    ladder = u.copy()
    used = 0
    for k, level in enumerate(levels):
        rung = _Scheme(disc, level, config.threads)
        ladder, phase = _iterate(rung, ladder, k > 0, True, config, config.max_iters - used)
        used += phase.sweeps
        phases.append(_phase_summary("anneal", level, phase))
        if not phase.converged:
            _LOG.debug("Warm start stopped at level %.6g after %d sweeps", level, used)
            return None, used
    return (ladder if levels else None), used


def solve_ground_state(
    g: MetricGraph,
    lam: object | None = None,
    constraint: Sequence[GraphPoint] | str | None = None,
    config: SolverConfig | None = None,
) -> EigenResult:
    """Smallest fixed point of T with u = 0 on the boundary and u = 1 on the constraint set.

    ``lam`` defaults to the principal eigenvalue and ``constraint`` to the
    whole ridge. Non-convergence and infeasibility come back as statuses.
    """
    config = config or SolverConfig()
    principal, ridge = principal_eigenvalue(g)
    level = principal if lam is None else parse_scalar(lam)
    if level <= 0:
        raise ValueError(f"lambda must be positive, got {level}")
    pinned = _resolve_constraint(g, constraint)
    if not pinned:
        raise ValueError("the constraint set must not be empty")
    disc = discretize(g, config.h, pinned)
    if float(disc.max_gap) * float(level) >= 1:
        raise ValueError(f"h * lambda = {float(disc.max_gap) * float(level)} must be below 1")

    start_level = min(float(level), float(principal) * (1 - config.continuation))
    u = initial_supersolution(disc, principal)
    phases: list[dict[str, Any]] = []
    guide, used = _warm_start(disc, u, anneal_levels(float(principal), start_level, config), config, phases)
    down = _Scheme(disc, start_level, config.threads)
    u, first = _iterate(down, u, False, True, config, config.max_iters - used, guide)
    used += first.sweeps
    phases.append(_phase_summary("down", start_level, first))
    final, scheme = first, down
    if first.converged and float(level) > start_level:
        scheme = _Scheme(disc, level, config.threads)
        unique = float(level) < float(principal)
        u, final = _iterate(scheme, u, True, unique, config, config.max_iters - used)
        phases.append(_phase_summary("up", float(level), final))

    if final.infeasible:
        status = SolveStatus.INFEASIBLE
    elif final.converged:
        status = SolveStatus.CONVERGED
    else:
        status = SolveStatus.MAX_ITERS
    result_scheme = scheme if scheme.lam == float(level) else _Scheme(disc, level, config.threads)
    residual = result_scheme.apply(u) - u
    result = EigenResult(
        lam=principal,
        r_inf=ridge.value,
        ridge=ridge,
        u=NodeFunction(disc, u),
        level=level,
        status=status,
        iterations=sum(p["sweeps"] for p in phases),
        max_update=final.max_update,
        residual_sup=float(np.max(np.abs(residual))) if len(residual) else 0.0,
        phase_monotone=all(p["monotone"] for p in phases),
        constraint=disc.constraint,
        phases=phases,
    )
    if status is SolveStatus.CONVERGED:
        _LOG.info("Converged after %d sweeps, residual %.3e", result.iterations, result.residual_sup)
    else:
        _LOG.warning("Solver stopped with status %s after %d sweeps", status, result.iterations)
    return result


def _phase_summary(name: str, level: float, phase: _Phase) -> dict[str, Any]:
    return {
        "phase": name,
        "level": level,
        "sweeps": phase.sweeps,
        "max_update": phase.max_update,
        "monotone": phase.monotone,
        "accepted_jumps": phase.accepted_jumps,
    }


# -- Diagnostics ---------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """u - T u per node (0 on fixed nodes) and the active branch of T."""

    u: NodeFunction
    residuals: np.ndarray
    branches: tuple[Branch | None, ...]

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    def eikonal_nodes(self) -> frozenset[GraphPoint]:
        return frozenset(p for p, b in zip(self.u.disc.nodes, self.branches) if b is Branch.EIKONAL)

    def to_dict(self) -> dict[str, Any]:
        disc = self.u.disc
        worst = int(np.argmax(np.abs(self.residuals))) if len(self.residuals) else None
        return {
            "residual_sup": self.sup,
            "worst": disc.nodes[worst].to_dict() if worst is not None else None,
            "nodes": [
                [str(p), float(r), str(b) if b else None]
                for p, r, b in zip(disc.nodes, self.residuals, self.branches)
            ],
        }


def residual_report(u: NodeFunction, lam: object) -> ResidualReport:
    scheme = _Scheme(u.disc, parse_scalar(lam))
    values = u.values.copy()
    residuals = np.zeros_like(values)
    branches: list[Branch | None] = [None] * u.disc.size
    if len(scheme.free):
        image, use_eik, *_ = scheme.parts(values)
        residuals[scheme.free] = values[scheme.free] - image
        for k, flag in zip(scheme.free, use_eik):
            branches[int(k)] = Branch.EIKONAL if flag else Branch.MIDRANGE
    return ResidualReport(u, residuals, tuple(branches))


def scheme_conditions(u: NodeFunction, lam: object, tol: float) -> CheckReport:
    """Discrete super side (u >= midrange, u >= eikonal) and sub side (one of them tight) at interior nodes."""
    scheme = _Scheme(u.disc, parse_scalar(lam))
    witnesses = []
    if len(scheme.free):
        _, _, _, _, mid, eik = scheme.parts(u.values)
        here = u.values[scheme.free]
        for k, x in enumerate(scheme.free):
            point = u.disc.nodes[int(x)]
            if here[k] < mid[k] - tol:
                witnesses.append(Witness(point, float(mid[k] - here[k]), "below the midrange"))
            if here[k] < eik[k] - tol:
                witnesses.append(Witness(point, float(eik[k] - here[k]), "below the eikonal value"))
            if min(abs(here[k] - mid[k]), abs(here[k] - eik[k])) > tol:
                gap = min(abs(here[k] - mid[k]), abs(here[k] - eik[k]))
                witnesses.append(Witness(point, float(gap), "neither branch tight"))
    return verdict("scheme_conditions", witnesses, tol=tol)


def incenter_bound_check(u: NodeFunction | PLFunction, lam: object) -> CheckReport:
    """At every ridge point: lam u(x0) <= subslope(x0) <= Lambda u(x0), and u peaks on the ridge.

    Node functions use the one-sided discrete subslope with slack 2h;
    PL functions use exact subslopes.
    """
    lam = parse_scalar(lam)
    g = u.disc.graph if isinstance(u, NodeFunction) else u.graph
    principal, ridge = principal_eigenvalue(g)
    witnesses = []
    peaks = []
    for x0 in ridge.points:
        if isinstance(u, NodeFunction):
            disc = u.disc
            k = disc.index_of(x0)
            value = float(u.values[k])
            sub = max([0.0] + [(value - float(u.values[j])) / float(gap) for j, gap in disc.neighbors[k]])
            slack = 2 * float(disc.h)
        else:
            value = u(x0)
            sub = slopes_at(u, x0).subslope
            slack = tolerance(sub, value)
        peaks.append(value)
        if sub > principal * value + slack:
            witnesses.append(Witness(x0, sub - principal * value, "subslope above Lambda u"))
        if sub < lam * value - slack:
            witnesses.append(Witness(x0, lam * value - sub, "subslope below lambda u"))
    top = float(u.values.max()) if isinstance(u, NodeFunction) else u.max_value()
    peak = max(peaks)
    if isinstance(u, NodeFunction):
        slack = 2 * float(u.disc.h)
    else:
        slack = tolerance(top, peak)
    if top > peak + slack:
        witnesses.append(Witness(None, top - peak, "maximum not attained on the ridge"))
    return verdict("incenter_bound", witnesses, principal=format_scalar(principal), level=format_scalar(lam))


# -- Experiments ---------------------------------------------------------------


@dataclass(frozen=True)
class CollapseReport:
    level: float
    trajectory: tuple[float, ...]
    decayed: bool
    sweeps: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "level": self.level,
            "sweeps": self.sweeps,
            "decayed": self.decayed,
            "final_sup": self.trajectory[-1] if self.trajectory else None,
            "trajectory": list(self.trajectory),
        }


def subcritical_collapse_probe(
    g: MetricGraph,
    lam: object,
    config: SolverConfig | None = None,
    constraint: Sequence[GraphPoint] = (),
    sweeps: int = DEFAULT_COLLAPSE_SWEEPS,
    bump_at: GraphPoint | None = None,
) -> CollapseReport:
    """Iterate T from a positive bump and record the sup norm after every sweep.

    Below the principal eigenvalue the bump decays to 0; a constraint set pins it.
    """
    config = config or SolverConfig()
    lam = parse_scalar(lam)
    principal, ridge = principal_eigenvalue(g)
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if sweeps < 1:
        raise ValueError(f"sweeps must be at least 1, got {sweeps}")
    if lam >= principal and not constraint:
        raise ValueError(f"lambda = {lam} is not below the principal eigenvalue {principal}")
    disc = discretize(g, config.h, constraint)
    center = bump_at or ridge.points[0]
    to_center = distance_field(g, center)
    radius = float(ridge.value)
    u = np.array([max(0.0, 1.0 - float(to_center(p)) / radius) for p in disc.nodes])
    u[disc.fixed] = disc.fixed_values()[disc.fixed]
    scheme = _Scheme(disc, lam, config.threads)
    free = scheme.free
    trajectory = []
    for _ in range(sweeps):
        delta = scheme.sweep(u, config.mode)
        trajectory.append(float(np.max(u[free])) if len(free) else 0.0)
        if trajectory[-1] <= DECAY_THRESHOLD or delta < config.tol:
            break
    decayed = bool(trajectory) and trajectory[-1] <= DECAY_THRESHOLD
    _LOG.info("Collapse run at lambda=%s: sup %.3e after %d sweeps", lam, trajectory[-1], len(trajectory))
    return CollapseReport(float(lam), tuple(trajectory), decayed, len(trajectory))


@dataclass(frozen=True)
class FeasibilityRow:
    level: Scalar
    status: SolveStatus
    incenter: CheckReport

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.CONVERGED and self.incenter.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "level": format_scalar(self.level),
            "status": str(self.status),
            "incenter": str(self.incenter.status),
            "feasible": self.feasible,
        }


def feasibility_scan(
    g: MetricGraph,
    lambdas: Iterable[object],
    config: SolverConfig | None = None,
    constraint: Sequence[GraphPoint] | str | None = None,
) -> list[FeasibilityRow]:
    """Solve at each level; positive normalized solutions exist only up to the principal eigenvalue."""
    rows = []
    for lam in lambdas:
        result = solve_ground_state(g, lam, constraint, config)
        rows.append(FeasibilityRow(result.level, result.status, incenter_bound_check(result.u, result.level)))
    return rows

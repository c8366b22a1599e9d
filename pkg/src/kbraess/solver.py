"""Steady-state DC solution of voltage-controlled circuits.

The solve goes in three steps:

1. :func:`reduce_steady_state` drops capacitors (open at DC) and contracts
   inductors (short at DC).
2. :func:`node_basis` groups nodes into connected components of the
   voltage-source subgraph. Inside a component every potential is fixed
   relative to a representative node by summing source voltages along a
   path, so one unknown per component remains.
3. :func:`solve_dc` minimises the total resistive loss over those unknowns.
   The loss is a convex quadratic, so its stationary point is the solution of
   a symmetric positive-definite system (supernode KCL).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Element, Kind

SOURCE_LOOP_TOL = 1e-9


class InconsistentCircuitError(CircuitError):
    """The circuit has no DC steady state (source loop or shorted source)."""


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _union(parent: list[int], x: int, y: int) -> None:
    rx, ry = _find(parent, x), _find(parent, y)
    if rx != ry:
        parent[max(rx, ry)] = min(rx, ry)


@dataclass(frozen=True)
class ReducedCircuit:
    """Resistor/source circuit equivalent to ``original`` in DC steady state.

    ``node_map[n]`` is the reduced node of original node ``n`` and
    ``provenance[k]`` the original index of reduced element ``k``. Original
    elements that did not survive are listed in ``dropped``.
    """

    original: Circuit
    base: Circuit
    node_map: tuple[int, ...]
    provenance: tuple[int, ...]
    dropped: tuple[int, ...]

    @property
    def merged_nodes(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.base.n_nodes)]
        for n, r in enumerate(self.node_map):
            groups[r].append(n)
        return groups


def reduce_steady_state(c: Circuit) -> ReducedCircuit:
    parent = list(range(c.n_nodes))
    for el in c.elements:
        if el.kind is Kind.INDUCTOR:
            _union(parent, el.a, el.b)
    roots = sorted({_find(parent, n) for n in c.nodes})
    index = {r: k for k, r in enumerate(roots)}
    node_map = tuple(index[_find(parent, n)] for n in c.nodes)

    kept: list[Element] = []
    provenance: list[int] = []
    dropped: list[int] = []
    for k, el in enumerate(c.elements):
        if el.kind in (Kind.CAPACITOR, Kind.INDUCTOR):
            dropped.append(k)
            continue
        ra, rb = node_map[el.a], node_map[el.b]
        if ra == rb:
            if el.kind is Kind.VOLTAGE_SOURCE and abs(el.value) > SOURCE_LOOP_TOL:
                raise InconsistentCircuitError(
                    f"inconsistent short: inductors short the {el.value:g} V source "
                    f"(element {k}, nodes {el.a}-{el.b})"
                )
            # both terminals merged: zero voltage across, zero current
            dropped.append(k)
            continue
        kept.append(Element(el.kind, el.value, ra, rb))
        provenance.append(k)
    base = Circuit(len(roots), tuple(kept))
    return ReducedCircuit(c, base, node_map, tuple(provenance), tuple(dropped))


@dataclass(frozen=True)
class NodeBasis:
    """Fundamental node basis of a reduced circuit.

    ``offsets[n]`` is the potential of node ``n`` above the representative of
    its component. Components listed in ``grounds`` (one per connected piece
    of the full circuit graph) have their representative held at 0 V; the
    remaining ``free`` components carry the unknowns of the loss potential.
    """

    components: tuple[tuple[int, ...], ...]
    component_of: tuple[int, ...]
    representatives: tuple[int, ...]
    offsets: np.ndarray
    grounds: tuple[int, ...]
    free: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.components)


def node_basis(rc: ReducedCircuit, representatives: Sequence[int] | None = None) -> NodeBasis:
    """Build the basis; ``representatives`` overrides the default lowest node."""
    base = rc.base
    n = base.n_nodes
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for el in base.elements:
        if el.kind is Kind.VOLTAGE_SOURCE:
            adjacency[el.a].append((el.b, el.value))
            adjacency[el.b].append((el.a, -el.value))

    component_of = [-1] * n
    components: list[tuple[int, ...]] = []
    for start in range(n):
        if component_of[start] >= 0:
            continue
        cid = len(components)
        members = [start]
        component_of[start] = cid
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, _ in adjacency[u]:
                if component_of[v] < 0:
                    component_of[v] = cid
                    members.append(v)
                    queue.append(v)
        components.append(tuple(sorted(members)))

    if representatives is None:
        reps = [comp[0] for comp in components]
    else:
        reps = [-1] * len(components)
        for r in representatives:
            cid = component_of[r]
            if reps[cid] >= 0:
                raise ValueError(f"two representatives given for component {cid}")
            reps[cid] = r
        if min(reps, default=0) < 0:
            raise ValueError("every component needs a representative")

    offsets = np.full(n, np.nan)
    for cid, rep in enumerate(reps):
        offsets[rep] = 0.0
        queue = deque([rep])
        while queue:
            u = queue.popleft()
            for v, e in adjacency[u]:
                if np.isnan(offsets[v]):
                    offsets[v] = offsets[u] + e
                    queue.append(v)

    scale = 1.0 + max((abs(el.value) for el in base.elements
                       if el.kind is Kind.VOLTAGE_SOURCE), default=0.0) * n
    for k, el in enumerate(base.elements):
        if el.kind is not Kind.VOLTAGE_SOURCE:
            continue
        mismatch = offsets[el.b] - offsets[el.a] - el.value
        if abs(mismatch) > SOURCE_LOOP_TOL * scale:
            orig = rc.provenance[k]
            raise InconsistentCircuitError(
                f"inconsistent source loop through element {orig}: "
                f"source voltages around the loop sum to {mismatch:.6g} V"
            )

    # one grounded component per connected piece of the full graph
    parent = list(range(n))
    for el in base.elements:
        _union(parent, el.a, el.b)
    lowest: dict[int, int] = {}
    for node in range(n):
        lowest.setdefault(_find(parent, node), node)
    grounds = tuple(sorted({component_of[node] for node in lowest.values()}))
    free = tuple(c for c in range(len(components)) if c not in set(grounds))
    offsets.setflags(write=False)
    return NodeBasis(tuple(components), tuple(component_of), tuple(reps), offsets, grounds, free)


def _assemble(rc: ReducedCircuit, basis: NodeBasis):
    """Quadratic form of the loss potential over all component voltages.

    Returns ``(A, rhs, intra)`` with ``P(e) = e^T A e - 2 rhs^T e + c`` up to the
    constant; ``intra`` lists reduced resistor indices whose terminals share a
    component.
    """
    m = basis.size
    A = np.zeros((m, m))
    rhs = np.zeros(m)
    intra = []
    for k, el in enumerate(rc.base.elements):
        if el.kind is not Kind.RESISTOR:
            continue
        ci, cj = basis.component_of[el.a], basis.component_of[el.b]
        if ci == cj:
            intra.append(k)
            continue
        g = 1.0 / el.value
        d = basis.offsets[el.a] - basis.offsets[el.b]
        A[ci, ci] += g
        A[cj, cj] += g
        A[ci, cj] -= g
        A[cj, ci] -= g
        rhs[ci] -= g * d
        rhs[cj] += g * d
    return A, rhs, intra


def evaluate_potential(
    rc: ReducedCircuit, basis_voltages: Sequence[float], basis: NodeBasis | None = None
) -> float:
    """Total resistive loss with the free representatives at ``basis_voltages``.

    Voltages are ordered as ``basis.free``; grounded representatives sit at 0 V.
    The point does not need to satisfy Kirchhoff's current law.
    """
    basis = basis or node_basis(rc)
    e = np.zeros(basis.size)
    vals = np.asarray(basis_voltages, dtype=float)
    if vals.shape != (len(basis.free),):
        raise ValueError(f"expected {len(basis.free)} basis voltages, got {vals.shape}")
    e[list(basis.free)] = vals
    total = 0.0
    for el in rc.base.elements:
        if el.kind is Kind.RESISTOR:
            drop = (e[basis.component_of[el.a]] + basis.offsets[el.a]
                    - e[basis.component_of[el.b]] - basis.offsets[el.b])
            total += drop * drop / el.value
    return float(total)


@dataclass(frozen=True)
class SolvedState:
    """DC steady state, reported on the original circuit.

    Arrays follow original node and element order. ``branch_losses`` is zero for
    every element that is not a resistor.
    """

    node_voltages: np.ndarray
    branch_currents: np.ndarray
    branch_losses: np.ndarray
    total_loss: float
    intra_component_loss: float
    inter_component_loss: float
    basis_voltages: np.ndarray
    basis: NodeBasis = field(repr=False)
    reduced: ReducedCircuit = field(repr=False)


def solve_dc(rc: ReducedCircuit, basis: NodeBasis | None = None) -> SolvedState:
    basis = basis or node_basis(rc)
    A, rhs, intra = _assemble(rc, basis)
    e = np.zeros(basis.size)
    free = list(basis.free)
    if free:
        try:
            e[free] = np.linalg.solve(A[np.ix_(free, free)], rhs[free])
        except np.linalg.LinAlgError as exc:
            raise CircuitError(
                f"singular supernode system over components {free}: check the circuit model"
            ) from exc

    base = rc.base
    vr = e[list(basis.component_of)] + basis.offsets
    # Reference each connected piece to its lowest-numbered node so voltages do
    # not depend on which representatives were picked.
    parent = list(range(base.n_nodes))
    for el in base.elements:
        _union(parent, el.a, el.b)
    roots = [_find(parent, node) for node in range(base.n_nodes)]
    vr = vr - vr[roots]

    orig = rc.original
    v = vr[list(rc.node_map)]
    currents = np.zeros(len(orig))
    losses = np.zeros(len(orig))
    for k, el in enumerate(orig.elements):
        if el.kind is Kind.RESISTOR:
            currents[k] = (v[el.a] - v[el.b]) / el.value
            losses[k] = currents[k] ** 2 * el.value
    _zero_impedance_currents(orig, currents)

    intra_orig = {rc.provenance[k] for k in intra}
    intra_loss = float(sum(losses[k] for k in intra_orig))
    total = float(losses.sum())
    for arr in (v, currents, losses):
        arr.setflags(write=False)
    return SolvedState(
        node_voltages=v,
        branch_currents=currents,
        branch_losses=losses,
        total_loss=total,
        intra_component_loss=intra_loss,
        inter_component_loss=total - intra_loss,
        basis_voltages=e[free],
        basis=basis,
        reduced=rc,
    )


def _zero_impedance_currents(c: Circuit, currents: np.ndarray) -> None:
    """Fill source and inductor currents from KCL, in place.

    Currents of source/inductor loops are not fixed by the network; the
    minimum-norm circulation is reported for those.
    """
    zero_imp = [k for k, el in enumerate(c.elements)
                if el.kind in (Kind.VOLTAGE_SOURCE, Kind.INDUCTOR)]
    if not zero_imp:
        return
    inj = np.zeros(c.n_nodes)
    for k, el in enumerate(c.elements):
        inj[el.a] += currents[k]
        inj[el.b] -= currents[k]
    Az = np.zeros((c.n_nodes, len(zero_imp)))
    for col, k in enumerate(zero_imp):
        Az[c.elements[k].a, col] = 1.0
        Az[c.elements[k].b, col] = -1.0
    x, *_ = np.linalg.lstsq(Az, -inj, rcond=None)
    currents[zero_imp] = x


def solve(c: Circuit) -> SolvedState:
    """Reduce and solve ``c`` in one call."""
    return solve_dc(reduce_steady_state(c))


def total_loss(s: SolvedState) -> float:
    return float(np.sum(s.branch_losses))


def kcl_residual(s: SolvedState) -> float:
    """Largest nodal current imbalance relative to the largest branch current."""
    c = s.reduced.original
    net = np.zeros(c.n_nodes)
    for k, el in enumerate(c.elements):
        net[el.a] += s.branch_currents[k]
        net[el.b] -= s.branch_currents[k]
    scale = max(1.0, float(np.max(np.abs(s.branch_currents), initial=0.0)))
    return float(np.max(np.abs(net), initial=0.0) / scale)


def kvl_residual(s: SolvedState) -> float:
    """Largest branch-law violation relative to the largest node voltage.

    Every resistor must obey Ohm's law and every source its set voltage;
    inductors carry no voltage. Together these make every cycle sum vanish.
    """
    c = s.reduced.original
    v = s.node_voltages
    worst = 0.0
    for k, el in enumerate(c.elements):
        if el.kind is Kind.RESISTOR:
            r = v[el.a] - v[el.b] - s.branch_currents[k] * el.value
        elif el.kind is Kind.VOLTAGE_SOURCE:
            r = v[el.b] - v[el.a] - el.value
        elif el.kind is Kind.INDUCTOR:
            r = v[el.b] - v[el.a]
        else:
            continue
        worst = max(worst, abs(r))
    scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
    return worst / scale

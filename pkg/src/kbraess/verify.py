"""Seeded randomized checks: link addition never lowers loss, OPF optimum ignores B."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .braess import UndefinedRatioError, lcl
from .circuit import Circuit, Kind, LinkSpec, build_circuit, capacitor, inductor, resistor, source
from .dcopf import ThreeBusNetwork, minimize_over_phases, objective_independence_check, optimal_injections
from .solver import _find, _union, node_basis, reduce_steady_state, solve

LCL_TOL = 1e-9


def random_circuit(rng: np.random.Generator, *, min_nodes: int = 3, max_nodes: int = 12,
                   reactive: bool = True) -> Circuit:
    """Random solvable circuit: resistors 0.1-10 ohm, sources 0-5 V.

    Sources and inductors never close a loop, so no source mesh can be
    inconsistent; one extra source may close a loop with a consistent value.
    """
    n = int(rng.integers(min_nodes, max_nodes + 1))
    elements = []
    parent = list(range(n))
    offsets = np.zeros(n)  # potential relative to the source-tree root, tracked for the loop source

    n_sources = int(rng.integers(1, n))
    for _ in range(n_sources):
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        if _find(parent, a) == _find(parent, b):
            continue
        e = float(rng.uniform(0.0, 5.0))
        elements.append(source(a, b, e))
        _merge_offsets(parent, offsets, a, b, e)

    if reactive and n > 3 and rng.random() < 0.5:
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        if _find(parent, a) != _find(parent, b):
            elements.append(inductor(a, b))
            _merge_offsets(parent, offsets, a, b, 0.0)

    # a redundant source consistent with the tree
    if rng.random() < 0.3:
        for _ in range(10):
            a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
            if _find(parent, a) == _find(parent, b) and offsets[b] != offsets[a]:
                elements.append(source(a, b, float(offsets[b] - offsets[a])))
                break

    n_res = int(rng.integers(n - 1, 2 * n + 2))
    for _ in range(n_res):
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        elements.append(resistor(a, b, float(rng.uniform(0.1, 10.0))))

    if reactive and rng.random() < 0.5:
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        elements.append(capacitor(a, b))

    order = rng.permutation(len(elements))
    return build_circuit(n, [elements[k] for k in order])


def _merge_offsets(parent, offsets, a, b, e) -> None:
    # shift b's tree so that offsets[b] - offsets[a] == e, then union
    ra, rb = _find(parent, a), _find(parent, b)
    shift = offsets[a] + e - offsets[b]
    for node in range(len(parent)):
        if _find(parent, node) == rb:
            offsets[node] += shift
    _union(parent, ra, rb)


def random_resistive_link(rng: np.random.Generator, c: Circuit) -> LinkSpec:
    a, b = (int(v) for v in rng.choice(c.n_nodes, size=2, replace=False))
    return LinkSpec(a, b, Kind.RESISTOR, float(rng.uniform(0.1, 10.0)))


def same_component_link(rng: np.random.Generator, c: Circuit) -> LinkSpec | None:
    """Resistive link whose endpoints share a voltage-source component, if any."""
    rc = reduce_steady_state(c)
    basis = node_basis(rc)
    groups: dict[int, list[int]] = {}
    for node in c.nodes:
        groups.setdefault(basis.component_of[rc.node_map[node]], []).append(node)
    candidates = [g for g in groups.values() if len(g) >= 2]
    if not candidates:
        return None
    g = candidates[int(rng.integers(len(candidates)))]
    a, b = (int(v) for v in rng.choice(g, size=2, replace=False))
    return LinkSpec(a, b, Kind.RESISTOR, float(rng.uniform(0.1, 10.0)))


@dataclass
class LclSuiteResult:
    cases: int = 0
    lcl_ok: int = 0
    original_ok: int = 0
    same_component_cases: int = 0
    same_component_ok: int = 0
    min_lcl: float = np.inf
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.lcl_ok == self.cases and self.original_ok == self.cases
                and self.same_component_ok == self.same_component_cases)


def run_lcl_suite(seed: int, cases: int) -> LclSuiteResult:
    """Add random resistive links to random circuits; loss must never drop."""
    rng = np.random.default_rng(seed)
    res = LclSuiteResult()
    while res.cases < cases:
        c = random_circuit(rng)
        if solve(c).total_loss < 1e-9:
            continue  # ratio undefined; draw again
        link = random_resistive_link(rng, c)
        try:
            rep = lcl(c, link)
        except UndefinedRatioError:
            continue
        res.cases += 1
        res.min_lcl = min(res.min_lcl, rep.lcl)
        if rep.lcl >= 1.0 - LCL_TOL:
            res.lcl_ok += 1
        else:
            res.failures.append(f"case {res.cases}: LCL {rep.lcl:.12g} < 1")
        if rep.original_loss_after >= rep.loss_before * (1.0 - LCL_TOL):
            res.original_ok += 1
        else:
            res.failures.append(f"case {res.cases}: original-resistor loss dropped")

        inner = same_component_link(rng, c)
        if inner is not None:
            res.same_component_cases += 1
            rep_in = lcl(c, inner)
            if abs(rep_in.lcl_original - 1.0) <= LCL_TOL:
                res.same_component_ok += 1
            else:
                res.failures.append(
                    f"case {res.cases}: same-component link changed original loss "
                    f"(ratio {rep_in.lcl_original:.12g})"
                )
    return res


def random_reactances(rng: np.random.Generator) -> tuple[float, float, float]:
    return tuple(float(x) for x in rng.uniform(0.2, 5.0, size=3))


@dataclass
class OpfSuiteResult:
    cases: int = 0
    argmin_ok: int = 0
    independence_ok: bool = True
    max_injection_error: float = 0.0
    max_relative_spread: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.argmin_ok == self.cases and self.independence_ok


def run_opf_suite(seed: int, cases: int, *, base: ThreeBusNetwork | None = None) -> OpfSuiteResult:
    """Optimal injections and objective must not depend on the line reactances."""
    rng = np.random.default_rng(seed)
    base = base or ThreeBusNetwork(1.0, 1.0, 1.0, alpha=3.0, beta1=1.0, beta2=1.675)
    res = OpfSuiteResult()
    triples = [random_reactances(rng) for _ in range(cases)]
    P1, P2, _ = optimal_injections(base)
    for x in triples:
        res.cases += 1
        q1, q2 = minimize_over_phases(base.with_reactances(*x))
        err = max(abs(q1 - P1), abs(q2 - P2))
        res.max_injection_error = max(res.max_injection_error, err)
        if err <= 1e-6:
            res.argmin_ok += 1
        else:
            res.failures.append(f"reactances {x}: numerical optimum off by {err:.3g}")
    report = objective_independence_check(base, triples)
    res.max_relative_spread = report.max_relative_spread
    res.independence_ok = report.independent
    if not report.independent:
        res.failures.append(f"objective spread {report.max_relative_spread:.3g} exceeds 1e-9")
    return res

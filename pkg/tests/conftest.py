import numpy as np
import pytest

from kbraess.circuit import Circuit, Kind


def mna_solve(c: Circuit):
    """Textbook modified nodal analysis, independent of the supernode solver.

    Unknowns are all node voltages plus one current per source and inductor
    (inductors are 0 V sources). One node per connected piece is grounded.
    Returns (node_voltages, branch_currents) in original order.
    """
    n = c.n_nodes
    extra = [k for k, el in enumerate(c.elements) if el.kind in (Kind.VOLTAGE_SOURCE, Kind.INDUCTOR)]
    size = n + len(extra)
    rows, rhs = [], []
    G = np.zeros((n, size))
    for k, el in enumerate(c.elements):
        if el.kind is Kind.RESISTOR:
            g = 1.0 / el.value
            G[el.a, el.a] += g
            G[el.b, el.b] += g
            G[el.a, el.b] -= g
            G[el.b, el.a] -= g
    for col, k in enumerate(extra):
        el = c.elements[k]
        G[el.a, n + col] += 1.0
        G[el.b, n + col] -= 1.0
    rows.extend(G)
    rhs.extend([0.0] * n)
    for col, k in enumerate(extra):
        el = c.elements[k]
        row = np.zeros(size)
        row[el.b], row[el.a] = 1.0, -1.0
        rows.append(row)
        rhs.append(el.value if el.kind is Kind.VOLTAGE_SOURCE else 0.0)
    # ground the lowest node of each connected piece (capacitors do not connect)
    seen = [False] * n
    adj = [[] for _ in range(n)]
    for el in c.elements:
        if el.kind is not Kind.CAPACITOR:
            adj[el.a].append(el.b)
            adj[el.b].append(el.a)
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        row = np.zeros(size)
        row[start] = 1.0
        rows.append(row)
        rhs.append(0.0)
    A, b = np.array(rows), np.array(rhs)
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    assert np.allclose(A @ x, b, atol=1e-9 * max(1.0, np.abs(b).max())), "MNA system inconsistent"
    v = x[:n]
    currents = np.zeros(len(c))
    for k, el in enumerate(c.elements):
        if el.kind is Kind.RESISTOR:
            currents[k] = (v[el.a] - v[el.b]) / el.value
    for col, k in enumerate(extra):
        currents[k] = x[n + col]
    return v, currents


def mna_loss(c: Circuit) -> float:
    v, i = mna_solve(c)
    return float(sum(i[k] ** 2 * el.value for k, el in enumerate(c.elements) if el.kind is Kind.RESISTOR))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)

"""DC power flow and unconstrained optimal power flow on a three-bus network.

Buses 1 and 2 hold generators with cost ``beta_j * P_j**2``; bus 3 carries an
inelastic load ``Pc`` plus an elastic load ``Pe`` valued at ``alpha * Pe``.
Bus 1 is the angle reference.

Line conductances are stored signed, ``b_ij = -1 / x_ij``, so the conductance
matrix is::

    [[-b12 - b13,  b12,        b13      ],
     [ b12,       -b12 - b23,  b23      ],
     [ b13,        b23,       -b13 - b23]]

and ``P12 = b12*theta2``, ``P13 = b13*theta3``, ``P23 = b23*(theta3 - theta2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .circuit import FormatError

BINDING_TOL = 1e-9
LINES = ("P12", "P13", "P23")


class NetworkError(ValueError):
    """Three-bus network cannot be solved (islanded bus, singular matrix)."""


@dataclass(frozen=True)
class ThreeBusNetwork:
    x12: float | None
    x13: float | None
    x23: float | None
    alpha: float
    beta1: float
    beta2: float
    Pc: float = 0.0
    Pmax: tuple[float, float] = (math.inf, math.inf)
    Fmax: tuple[float, float, float] = (math.inf, math.inf, math.inf)

    def __post_init__(self) -> None:
        for name in ("x12", "x13", "x23"):
            x = getattr(self, name)
            if x is not None and not x > 0:
                raise ValueError(f"{name} must be positive or absent, got {x}")
        for name in ("alpha", "beta1", "beta2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.Pc < 0:
            raise ValueError("Pc must be nonnegative")
        object.__setattr__(self, "Pmax", tuple(float(v) for v in self.Pmax))
        object.__setattr__(self, "Fmax", tuple(float(v) for v in self.Fmax))
        if len(self.Pmax) != 2 or len(self.Fmax) != 3:
            raise ValueError("Pmax needs 2 entries and Fmax 3")
        if min(self.Pmax + self.Fmax) < 0:
            raise ValueError("limits must be nonnegative")

    def with_reactances(self, x12, x13, x23) -> "ThreeBusNetwork":
        return replace(self, x12=x12, x13=x13, x23=x23)


@dataclass(frozen=True)
class ConductanceData:
    b12: float
    b13: float
    b23: float
    B: np.ndarray
    Br: np.ndarray
    H: np.ndarray
    D: float


def _b(x: float | None) -> float:
    return 0.0 if x is None else -1.0 / x


def conductance_matrices(n: ThreeBusNetwork) -> ConductanceData:
    present = [x for x in (n.x12, n.x13, n.x23) if x is not None]
    if len(present) < 2:
        raise NetworkError("disconnected bus: at least two of the three lines are required")
    b12, b13, b23 = _b(n.x12), _b(n.x13), _b(n.x23)
    B = np.array([
        [-b12 - b13, b12, b13],
        [b12, -b12 - b23, b23],
        [b13, b23, -b13 - b23],
    ])
    Br = np.array([
        [b12, b13],
        [-b12 - b23, b23],
    ])
    H = np.array([
        [b12, 0.0],
        [0.0, b13],
        [-b23, b23],
    ])
    D = b12 * b13 + b23 * b13 + b12 * b23
    return ConductanceData(b12, b13, b23, B, Br, H, D)


class Status(str, Enum):
    SLACK = "slack"
    BINDING = "binding"
    VIOLATED = "violated"


@dataclass(frozen=True)
class OpfSolution:
    P1: float
    P2: float
    Pe: float
    Pd: float
    theta2: float
    theta3: float
    flows: tuple[float, float, float]
    objective: float
    congestion: dict[str, Status] = field(default_factory=dict)
    elastic_infeasible: bool = False

    @property
    def congested(self) -> bool:
        return any(s is not Status.SLACK for s in self.congestion.values())

    def conservation_residual(self) -> float:
        P12, P13, P23 = self.flows
        return max(
            abs(P12 + P13 - self.P1),
            abs(self.P2 + P12 - P23),
            abs(P13 + P23 - self.Pd),
        )


def optimal_injections(n: ThreeBusNetwork) -> tuple[float, float, float]:
    """Uncongested optimum ``(P1, P2, Pe)``; note no line parameter enters."""
    P1 = n.alpha / (2.0 * n.beta1)
    P2 = n.alpha / (2.0 * n.beta2)
    Pe = 0.5 * (n.alpha / n.beta1 + n.alpha / n.beta2 - 2.0 * n.Pc)
    return P1, P2, Pe


def objective(n: ThreeBusNetwork, P1: float, P2: float) -> float:
    """Generation cost minus elastic-load welfare, with ``Pe = P1 + P2 - Pc``."""
    return n.beta1 * P1 ** 2 + n.beta2 * P2 ** 2 - n.alpha * (P1 + P2 - n.Pc)


def _status(value: float, upper: float, lower: float | None = None) -> Status:
    if value > upper + BINDING_TOL or (lower is not None and value < lower - BINDING_TOL):
        return Status.VIOLATED
    if abs(value - upper) <= BINDING_TOL or (lower is not None and abs(value - lower) <= BINDING_TOL):
        return Status.BINDING
    return Status.SLACK


def check_congestion(sol: OpfSolution, n: ThreeBusNetwork) -> dict[str, Status]:
    """Injections against ``[0, Pmax]``; line flows as ``|P_ij| <= Fmax``."""
    status = {
        "P1": _status(sol.P1, n.Pmax[0], 0.0),
        "P2": _status(sol.P2, n.Pmax[1], 0.0),
    }
    for name, flow, limit in zip(LINES, sol.flows, n.Fmax):
        status[name] = _status(abs(flow), limit)
    return status


def unconstrained_opf(n: ThreeBusNetwork) -> OpfSolution:
    cd = conductance_matrices(n)
    P1, P2, Pe = optimal_injections(n)
    try:
        theta = np.linalg.solve(cd.Br, np.array([P1, P2]))
    except np.linalg.LinAlgError as exc:
        raise NetworkError("reduced conductance matrix is singular") from exc
    flows = cd.H @ theta
    sol = OpfSolution(
        P1=P1, P2=P2, Pe=Pe, Pd=n.Pc + Pe,
        theta2=float(theta[0]), theta3=float(theta[1]),
        flows=tuple(float(f) for f in flows),
        objective=objective(n, P1, P2),
        elastic_infeasible=Pe < 0,
    )
    return replace(sol, congestion=check_congestion(sol, n))


def line_flows_closed_form(n: ThreeBusNetwork) -> tuple[float, float, float]:
    cd = conductance_matrices(n)
    b12, b13, b23, D = cd.b12, cd.b13, cd.b23, cd.D
    if D == 0.0:
        raise NetworkError("singular network (D = 0)")
    g1 = n.alpha / (2.0 * n.beta1)
    g2 = n.alpha / (2.0 * n.beta2)
    P12 = g1 * b12 * b23 / D - g2 * b12 * b13 / D
    P13 = g1 * (b12 + b23) * b13 / D + g2 * b12 * b13 / D
    P23 = g1 * b12 * b23 / D + g2 * (b12 + b13) * b23 / D
    return P12, P13, P23


def sensitivity_matrix(n: ThreeBusNetwork) -> np.ndarray:
    """Line flows per unit injection: ``H @ inv(Br)`` (3 x 2)."""
    cd = conductance_matrices(n)
    try:
        return cd.H @ np.linalg.inv(cd.Br)
    except np.linalg.LinAlgError as exc:
        raise NetworkError("reduced conductance matrix is singular") from exc


WEAK_LINE_PATTERN = np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 1.0]])


def weak_line_deviation(n: ThreeBusNetwork) -> float:
    """Largest entrywise gap between the sensitivity matrix and its ``b13 -> 0`` limit."""
    return float(np.max(np.abs(sensitivity_matrix(n) - WEAK_LINE_PATTERN)))


def minimize_over_phases(n: ThreeBusNetwork, *, tol: float = 1e-10,
                         max_sweeps: int = 100_000) -> tuple[float, float]:
    """Minimise the OPF objective over ``(theta2, theta3)`` numerically.

    Coordinate descent with exact line search: the objective is quadratic in
    the angles, so each coordinate step has a closed form. Returns ``(P1, P2)``.
    """
    cd = conductance_matrices(n)
    W = np.diag([n.beta1, n.beta2])
    Q = cd.Br.T @ W @ cd.Br
    g = n.alpha * cd.Br.T @ np.ones(2)
    theta = np.zeros(2)
    for _ in range(max_sweeps):
        step = 0.0
        for k in range(2):
            other = 1 - k
            new = (0.5 * g[k] - Q[k, other] * theta[other]) / Q[k, k]
            step = max(step, abs(new - theta[k]))
            theta[k] = new
        if step <= tol * max(1.0, float(np.max(np.abs(theta)))):
            break
    P = cd.Br @ theta
    return float(P[0]), float(P[1])


@dataclass(frozen=True)
class IndependenceReport:
    objectives: list[float]
    congested: list[bool]
    max_relative_spread: float
    independent: bool


def objective_independence_check(
    n: ThreeBusNetwork, perturbations: Iterable[Sequence[float | None]], *, rtol: float = 1e-9
) -> IndependenceReport:
    """Compare optimal objectives across reactance triples.

    Triples whose optimum congests the network are reported but left out of
    the comparison, since independence is only claimed without congestion.
    """
    objectives, congested = [], []
    for x12, x13, x23 in perturbations:
        sol = unconstrained_opf(n.with_reactances(x12, x13, x23))
        objectives.append(sol.objective)
        congested.append(sol.congested)
    clean = [o for o, c in zip(objectives, congested) if not c]
    if clean:
        ref = clean[0]
        spread = max(abs(o - ref) for o in clean) / max(abs(ref), 1e-300)
    else:
        spread = 0.0
    return IndependenceReport(objectives, congested, spread, spread <= rtol)


@dataclass(frozen=True)
class P23Fit:
    beta1: np.ndarray
    P23: np.ndarray
    C: float
    intercept: float


def p23_cost_sensitivity(n: ThreeBusNetwork, beta1grid: Sequence[float]) -> P23Fit:
    """Tabulate ``P23`` against ``beta1`` and fit ``P23 = C / beta1 + c0``."""
    betas = np.asarray(beta1grid, dtype=float)
    p23 = np.array([line_flows_closed_form(replace(n, beta1=b))[2] for b in betas])
    if len(betas) >= 2:
        C, c0 = np.polyfit(1.0 / betas, p23, 1)
    else:
        C, c0 = math.nan, math.nan
    return P23Fit(betas, p23, float(C), float(c0))


# -- JSON file format ---------------------------------------------------------

_NETWORK_KEYS = {"x12", "x13", "x23", "alpha", "beta1", "beta2", "Pc", "Pmax", "Fmax"}


def _limit(v: Any) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise FormatError(f"limit must be a number or 'inf', got {v!r}")
    return float(v)


def network_from_dict(doc: Any) -> ThreeBusNetwork:
    if not isinstance(doc, dict):
        raise FormatError("network document must be a JSON object")
    extra = set(doc) - _NETWORK_KEYS
    if extra:
        raise FormatError(f"unknown network keys: {sorted(extra)}")
    missing = _NETWORK_KEYS - set(doc)
    if missing:
        raise FormatError(f"missing network keys: {sorted(missing)}")
    if len(doc["Pmax"]) != 2 or len(doc["Fmax"]) != 3:
        raise FormatError("Pmax needs 2 entries and Fmax 3")
    return ThreeBusNetwork(
        x12=None if doc["x12"] is None else float(doc["x12"]),
        x13=None if doc["x13"] is None else float(doc["x13"]),
        x23=None if doc["x23"] is None else float(doc["x23"]),
        alpha=float(doc["alpha"]),
        beta1=float(doc["beta1"]),
        beta2=float(doc["beta2"]),
        Pc=float(doc["Pc"]),
        Pmax=tuple(_limit(v) for v in doc["Pmax"]),
        Fmax=tuple(_limit(v) for v in doc["Fmax"]),
    )


def load_network(path: str | Path) -> ThreeBusNetwork:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return network_from_dict(doc)

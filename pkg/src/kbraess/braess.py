"""Loss cost of adding a link, and the two-source cross-link circuit.

The two-source circuit is a single loop ``E1 - R1 - R2 - E2`` closed through
the junction of the two sources. The cross link ``R3`` joins that source
junction to the junction of the two resistors, so each source drives its own
resistor through ``R3``. Node numbering::

    node 1: junction of E1 and E2        node 2: junction of R1 and R2
    node 0: between E1 and R1            node 3: between R2 and E2

    E1: 1 -> 0    R1: 0 -> 2    R2: 2 -> 3    E2: 3 -> 1    R3: 1 -> 2

With these orientations the branch currents of R1, R2, R3 are the ``i1, i2,
i3`` of :func:`closed_form_currents`, and ``i2 = i1 + i3``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Kind, LinkSpec, add_link, build_circuit, resistor, source
from .solver import node_basis, reduce_steady_state, solve

R1_INDEX, R2_INDEX, R3_INDEX = 1, 2, 4
CROSS_NODES = (1, 2)


class UndefinedRatioError(CircuitError):
    """LCL requested for a circuit that dissipates nothing before the link."""


@dataclass(frozen=True)
class BraessCircuitParams:
    E1: float
    E2: float
    R1: float
    R2: float
    R3: float | None = None

    def __post_init__(self) -> None:
        for name in ("R1", "R2"):
            r = getattr(self, name)
            if not (math.isfinite(r) and r > 0):
                raise ValueError(f"{name} must be finite and positive, got {r}")
        if self.R3 is not None and not self.R3 > 0:
            raise ValueError(f"R3 must be positive when present, got {self.R3}")

    def without_link(self) -> "BraessCircuitParams":
        return BraessCircuitParams(self.E1, self.E2, self.R1, self.R2)


def cross_link(R3: float) -> LinkSpec:
    return LinkSpec(*CROSS_NODES, Kind.RESISTOR, R3)


def fig3_circuit(p: BraessCircuitParams) -> Circuit:
    """Build the two-source circuit; R3 is appended last when present."""
    c = build_circuit(4, [
        source(1, 0, p.E1),
        resistor(0, 2, p.R1),
        resistor(2, 3, p.R2),
        source(3, 1, p.E2),
    ])
    if p.R3 is not None:
        c = add_link(c, cross_link(p.R3))
    return c


def closed_form_currents(p: BraessCircuitParams) -> tuple[float, float, float]:
    if p.R3 is None:
        raise ValueError("closed-form currents need the cross link (R3)")
    E1, E2, R1, R2, R3 = p.E1, p.E2, p.R1, p.R2, p.R3
    D = R1 * R2 + R1 * R3 + R2 * R3
    i1 = (E1 * (R2 + R3) + E2 * R3) / D
    i2 = (E1 * R3 + E2 * (R1 + R3)) / D
    i3 = (-E1 * R2 + E2 * R1) / D
    return i1, i2, i3


@dataclass(frozen=True)
class LclReport:
    loss_before: float
    loss_after: float
    lcl: float
    includes_new_link_loss: bool
    per_branch_delta: np.ndarray
    original_loss_after: float
    new_link_loss: float
    same_component: bool

    @property
    def lcl_original(self) -> float:
        """Loss ratio restricted to the resistors present before the link."""
        return self.original_loss_after / self.loss_before


def lcl(c: Circuit, link: LinkSpec, *, min_loss: float = 1e-300) -> LclReport:
    """Loss cost of the link: total loss after adding ``link`` over loss before.

    The numerator counts the new link's own dissipation. ``per_branch_delta``
    gives the loss change of every original element.
    """
    before = solve(c)
    if before.total_loss <= min_loss:
        raise UndefinedRatioError(
            f"loss before the link is {before.total_loss:g} W; the ratio is undefined"
        )
    after = solve(add_link(c, link))
    n = len(c)
    original_after = float(after.branch_losses[:n].sum())
    rc = before.reduced
    basis = before.basis
    same = (basis.component_of[rc.node_map[link.a]]
            == basis.component_of[rc.node_map[link.b]])
    return LclReport(
        loss_before=before.total_loss,
        loss_after=after.total_loss,
        lcl=after.total_loss / before.total_loss,
        includes_new_link_loss=True,
        per_branch_delta=after.branch_losses[:n] - before.branch_losses,
        original_loss_after=original_after,
        new_link_loss=float(after.branch_losses[n]),
        same_component=bool(same),
    )


def lcl_formula_equal_sources(R1: float, R2: float, R3: float) -> float:
    """LCL of the cross link when both sources are equal."""
    return (R1 - R2) ** 2 / (4.0 * (R1 * R2 + R2 * R3 + R3 * R1)) + 1.0


def loss_gap(R1: float, R2: float, R3: float) -> float:
    """Sign of ``i1^2 R1 - i2^2 R2`` for equal sources (common positive factor dropped)."""
    return R1 * (R2 + 2.0 * R3) ** 2 - R2 * (R1 + 2.0 * R3) ** 2


def critical_r3(R1: float, R2: float, *, lo: float = 1e-9, hi: float = 1e9,
                rtol: float = 1e-12) -> float | None:
    """Cross-link resistance at which the R1 and R2 losses are equal.

    Bisection on ``log R3`` over ``[lo, hi]``. Returns ``None`` for ``R1 == R2``
    (losses coincide for every R3) or if the bracket holds no sign change.
    For ``R1 < R2`` the R1 loss is the larger one below the root.
    """
    if R1 == R2:
        return None
    g_lo = loss_gap(R1, R2, lo)
    if g_lo == 0.0:
        return lo
    if math.copysign(1.0, g_lo) == math.copysign(1.0, loss_gap(R1, R2, hi)):
        return None
    a, b = math.log(lo), math.log(hi)
    while b - a > rtol:
        mid = 0.5 * (a + b)
        g = loss_gap(R1, R2, math.exp(mid))
        if g == 0.0:
            return math.exp(mid)
        if math.copysign(1.0, g) == math.copysign(1.0, g_lo):
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


SWEEP_COLUMNS = ("R3", "i1", "i2", "i3", "loss1", "loss2", "loss3", "total_loss", "lcl")


@dataclass(frozen=True)
class SweepRow:
    R3: float
    i1: float
    i2: float
    i3: float
    loss1: float
    loss2: float
    loss3: float
    total_loss: float
    lcl: float


def sweep_cross_link(p: BraessCircuitParams, r3grid: Iterable[float]) -> list[SweepRow]:
    """Baseline row (no link, ``R3 = inf``) followed by one row per grid value."""
    base = p.without_link()
    grid = [float(r) for r in r3grid]
    if any(r <= 0 for r in grid):
        raise ValueError("cross-link resistances must be positive")

    s0 = solve(fig3_circuit(base))
    loss0 = s0.total_loss
    i = s0.branch_currents
    rows = [SweepRow(math.inf, i[R1_INDEX], i[R2_INDEX], 0.0,
                     s0.branch_losses[R1_INDEX], s0.branch_losses[R2_INDEX], 0.0,
                     loss0, 1.0 if loss0 > 0 else math.nan)]
    c0 = fig3_circuit(base)
    for r3 in grid:
        s = solve(add_link(c0, cross_link(r3)))
        i, L = s.branch_currents, s.branch_losses
        rows.append(SweepRow(r3, i[R1_INDEX], i[R2_INDEX], i[R3_INDEX],
                             L[R1_INDEX], L[R2_INDEX], L[R3_INDEX], s.total_loss,
                             s.total_loss / loss0 if loss0 > 0 else math.nan))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    """CSV text at full double precision; infinities written as ``inf``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([repr(float(getattr(row, col))) for col in SWEEP_COLUMNS])
    return buf.getvalue()


def parse_grid(spec: str, *, linear: bool = False) -> np.ndarray:
    """Parse ``lo:hi:n`` into ``n`` points, log-spaced unless ``linear``."""
    try:
        lo_s, hi_s, n_s = spec.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError as exc:
        raise ValueError(f"grid must look like lo:hi:n, got {spec!r}") from exc
    if n < 1 or lo <= 0 or hi < lo:
        raise ValueError(f"need 0 < lo <= hi and n >= 1, got {spec!r}")
    if linear:
        return np.linspace(lo, hi, n)
    return np.geomspace(lo, hi, n)


def same_source_component(c: Circuit, a: int, b: int) -> bool:
    """True when a path of voltage sources (after DC reduction) joins ``a`` and ``b``."""
    rc = reduce_steady_state(c)
    basis = node_basis(rc)
    return basis.component_of[rc.node_map[a]] == basis.component_of[rc.node_map[b]]

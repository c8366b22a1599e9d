"""Loss analysis of DC voltage-controlled circuits and three-bus DC optimal power flow."""

from .braess import (
    BraessCircuitParams,
    LclReport,
    closed_form_currents,
    critical_r3,
    cross_link,
    fig3_circuit,
    lcl,
    lcl_formula_equal_sources,
    sweep_cross_link,
)
from .circuit import Circuit, CircuitError, Element, Kind, LinkSpec, add_link, build_circuit
from .solver import (
    NodeBasis,
    ReducedCircuit,
    SolvedState,
    evaluate_potential,
    node_basis,
    reduce_steady_state,
    solve,
    solve_dc,
    total_loss,
)

__version__ = "0.1.0"

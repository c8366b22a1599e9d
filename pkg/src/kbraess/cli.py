"""Command-line front end.

Exit status: 0 on success, 1 when a circuit is inconsistent or a verification
check fails, 2 for usage and input-format errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import braess, dcopf, transport
from .circuit import CircuitError, FormatError, Kind, LinkSpec, load_circuit
from .solver import kcl_residual, solve
from .verify import run_lcl_suite, run_opf_suite


EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def cmd_solve(args, out) -> int:
    c = load_circuit(args.circuit)
    s = solve(c)
    print("node voltages (V)", file=out)
    print(_table(["node", "voltage"], [[n, fmt(v)] for n, v in enumerate(s.node_voltages)]), file=out)
    print(file=out)
    print("branches", file=out)
    rows = [[k, el.kind.value, fmt(el.value), el.a, el.b, fmt(s.branch_currents[k]), fmt(s.branch_losses[k])]
            for k, el in enumerate(c.elements)]
    print(_table(["#", "kind", "value", "a", "b", "current (A)", "loss (W)"], rows), file=out)
    print(file=out)
    print(f"total loss:           {fmt(s.total_loss)} W", file=out)
    print(f"intra-component loss: {fmt(s.intra_component_loss)} W", file=out)
    print(f"inter-component loss: {fmt(s.inter_component_loss)} W", file=out)
    print(f"KCL residual:         {fmt(kcl_residual(s))}", file=out)
    return EXIT_OK


def cmd_lcl(args, out) -> int:
    c = load_circuit(args.circuit)
    a, b = args.add
    if args.source is not None:
        link = LinkSpec(a, b, Kind.VOLTAGE_SOURCE, args.source)
    else:
        link = LinkSpec(a, b, Kind.RESISTOR, args.resistor)
    rep = braess.lcl(c, link)
    print(f"link:                      {link.element_kind.value} {fmt(link.value)} between nodes {a} and {b}", file=out)
    print(f"loss before:               {fmt(rep.loss_before)} W", file=out)
    print(f"loss after (incl. link):   {fmt(rep.loss_after)} W", file=out)
    print(f"new link loss:             {fmt(rep.new_link_loss)} W", file=out)
    print(f"LCL:                       {fmt(rep.lcl)}", file=out)
    print(f"LCL (original resistors):  {fmt(rep.lcl_original)}", file=out)
    print(f"endpoints share a source component: {'yes' if rep.same_component else 'no'}", file=out)
    print(file=out)
    rows = [[k, el.kind.value, fmt(rep.per_branch_delta[k])]
            for k, el in enumerate(c.elements) if el.kind is Kind.RESISTOR]
    print(_table(["#", "kind", "loss change (W)"], rows), file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    try:
        grid = braess.parse_grid(args.grid, linear=args.linear)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    p = braess.BraessCircuitParams(args.E1, args.E2, args.R1, args.R2)
    text = braess.sweep_to_csv(braess.sweep_cross_link(p, grid))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_opf(args, out) -> int:
    n = dcopf.load_network(args.network)
    sol = dcopf.unconstrained_opf(n)
    closed = dcopf.line_flows_closed_form(n)
    print(f"P1 = {fmt(sol.P1)}   P2 = {fmt(sol.P2)}   Pe = {fmt(sol.Pe)}   Pd = {fmt(sol.Pd)}", file=out)
    print(f"theta2 = {fmt(sol.theta2)} rad   theta3 = {fmt(sol.theta3)} rad", file=out)
    print(f"objective = {fmt(sol.objective)}", file=out)
    print(file=out)
    rows = [[name, fmt(f), fmt(cf)] for name, f, cf in zip(dcopf.LINES, sol.flows, closed)]
    print(_table(["line", "flow (H theta)", "flow (closed form)"], rows), file=out)
    print(file=out)
    limits = {"P1": n.Pmax[0], "P2": n.Pmax[1], **dict(zip(dcopf.LINES, n.Fmax))}
    values = {"P1": sol.P1, "P2": sol.P2, **dict(zip(dcopf.LINES, sol.flows))}
    rows = [[k, fmt(values[k]), fmt(limits[k]), st.value] for k, st in sol.congestion.items()]
    print(_table(["constraint", "value", "limit", "status"], rows), file=out)
    print(f"conservation residual: {fmt(sol.conservation_residual())}", file=out)
    if sol.elastic_infeasible:
        print("warning: elastic load infeasible (Pe < 0): generation cost and load value out of balance",
              file=out)
    return EXIT_OK


def cmd_sensitivity(args, out) -> int:
    n = dcopf.load_network(args.network)
    S = dcopf.sensitivity_matrix(n)
    print("line flow per unit injection (rows P12, P13, P23; columns P1, P2)", file=out)
    print(_table(["line", "dP/dP1", "dP/dP2"], [[name, fmt(r[0]), fmt(r[1])] for name, r in zip(dcopf.LINES, S)]),
          file=out)
    print(f"max deviation from weak-line pattern [[1,0],[0,0],[1,1]]: {fmt(dcopf.weak_line_deviation(n))}",
          file=out)
    if args.beta1_grid:
        grid = [float(v) for v in args.beta1_grid.split(",")]
        fit = dcopf.p23_cost_sensitivity(n, grid)
        print(file=out)
        print(_table(["beta1", "P23"], [[fmt(b), fmt(p)] for b, p in zip(fit.beta1, fit.P23)]), file=out)
        print(f"fit P23 = C/beta1 + c0:  C = {fmt(fit.C)}  c0 = {fmt(fit.intercept)}  (alpha/2 = {fmt(n.alpha / 2)})",
              file=out)
    return EXIT_OK


def cmd_transport(args, out) -> int:
    t = transport.TransportNetwork(args.alpha, args.beta, args.travelers)
    rows = []
    for link in (False, True):
        o = transport.transport_equilibrium(t, link)
        label = "with link" if link else "no link"
        for kind, assign, costs, total in (("Nash", o.nash, o.nash_costs, o.nash_total),
                                           ("optimum", o.optimum, o.optimum_costs, o.optimum_total)):
            rows.append([label, kind, _assignment(assign), _assignment(costs, fmt), fmt(total)])
    stampede = transport.simultaneous_switch(t)
    sc = transport.route_costs(t, stampede)
    rows.append(["with link", "all switch", _assignment(stampede), _assignment(sc, fmt),
                 fmt(transport.total_cost(t, stampede))])
    print(_table(["network", "outcome", "travellers", "route cost", "total"], rows), file=out)
    print(file=out)
    half = t.travelers // 2
    forced = transport.route_costs(t, {transport.CROSS: half})[transport.CROSS]
    print(f"cross route cost with only {half} travellers on the network: {fmt(forced)}", file=out)
    print(f"all-switch outcome is a Nash equilibrium: {'yes' if transport.is_nash(t, stampede) else 'no'}",
          file=out)
    return EXIT_OK


def _assignment(d, f=str) -> str:
    return " ".join(f"{k}:{f(v)}" for k, v in d.items())


def cmd_verify(args, out) -> int:
    res = run_lcl_suite(args.seed, args.cases)
    print(f"LCL>=1 in {res.lcl_ok}/{res.cases} cases (min LCL {fmt(res.min_lcl)})", file=out)
    print(f"original-resistor loss non-decreasing in {res.original_ok}/{res.cases} cases", file=out)
    print(f"same-component links leave original loss unchanged in "
          f"{res.same_component_ok}/{res.same_component_cases} cases", file=out)
    opf = run_opf_suite(args.seed, args.opf_cases)
    print(f"OPF optimum matches numerical minimum in {opf.argmin_ok}/{opf.cases} reactance draws "
          f"(max error {fmt(opf.max_injection_error)})", file=out)
    print(f"OPF objective spread across reactances: {fmt(opf.max_relative_spread)}", file=out)
    failures = res.failures + opf.failures
    for f in failures:
        print(f"FAIL {f}", file=out)
    return EXIT_OK if res.passed and opf.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbraess", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", help="DC steady state of a circuit file")
    p.add_argument("circuit")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("lcl", help="loss cost of adding a link")
    p.add_argument("circuit")
    p.add_argument("--add", nargs=2, type=int, required=True, metavar=("A", "B"))
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--resistor", type=float, metavar="OHMS")
    g.add_argument("--source", type=float, metavar="VOLTS")
    p.set_defaults(func=cmd_lcl)

    p = sub.add_parser("sweep", help="CSV of the two-source circuit against the cross-link resistance")
    p.add_argument("--grid", default="1e-4:1e2:61", help="lo:hi:n, log-spaced (default %(default)s)")
    p.add_argument("--linear", action="store_true", help="space the grid linearly")
    p.add_argument("--E1", type=float, default=0.0)
    p.add_argument("--E2", type=float, default=1.0)
    p.add_argument("--R1", type=float, default=1.0)
    p.add_argument("--R2", type=float, default=1.0)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("opf", help="unconstrained DC optimal power flow on a three-bus network")
    p.add_argument("network")
    p.set_defaults(func=cmd_opf)

    p = sub.add_parser("sensitivity", help="line-flow sensitivity to injections")
    p.add_argument("network")
    p.add_argument("--beta1-grid", help="comma-separated beta1 values for the P23 fit")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("transport", help="selfish routing with and without the cross link")
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--beta", type=float, default=50.0)
    p.add_argument("--travelers", type=int, default=6)
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("verify", help="seeded randomized loss and OPF checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--opf-cases", type=int, default=10)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (FormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CircuitError, dcopf.NetworkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

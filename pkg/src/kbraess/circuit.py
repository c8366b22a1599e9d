"""Graph model for DC voltage-controlled circuits.

A circuit is a multigraph: nodes are the integers ``0..n-1`` and every
element is a two-terminal branch ``(a, b)``. Parallel branches are allowed.

Sign conventions used throughout the package:

* a voltage source of value ``E`` on ``(a, b)`` raises the potential by ``E``
  going from ``a`` to ``b``, i.e. ``v[b] - v[a] = E``;
* a branch current is positive when it flows from terminal ``a`` to ``b``
  through the element.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable


class CircuitError(ValueError):
    """Raised for malformed or physically inconsistent circuits."""


class Kind(str, Enum):
    RESISTOR = "R"
    VOLTAGE_SOURCE = "V"
    CAPACITOR = "C"
    INDUCTOR = "L"


@dataclass(frozen=True)
class Element:
    kind: Kind
    value: float
    a: int
    b: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "value", float(self.value))
        if self.a == self.b:
            raise CircuitError(f"self-loop element {self.kind.value} on node {self.a}")
        if not math.isfinite(self.value):
            raise CircuitError(f"non-finite value for {self.kind.value} element")
        if self.kind is Kind.RESISTOR and self.value <= 0.0:
            raise CircuitError(f"resistance must be positive, got {self.value}")


def resistor(a: int, b: int, ohms: float) -> Element:
    return Element(Kind.RESISTOR, ohms, a, b)


def source(a: int, b: int, volts: float) -> Element:
    """Voltage source with ``v[b] - v[a] = volts``."""
    return Element(Kind.VOLTAGE_SOURCE, volts, a, b)


def capacitor(a: int, b: int, farads: float = 1.0) -> Element:
    return Element(Kind.CAPACITOR, farads, a, b)


def inductor(a: int, b: int, henries: float = 1.0) -> Element:
    return Element(Kind.INDUCTOR, henries, a, b)


@dataclass(frozen=True)
class Circuit:
    n_nodes: int
    elements: tuple[Element, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.n_nodes < 1:
            raise CircuitError("a circuit needs at least one node")
        for k, el in enumerate(self.elements):
            for t in (el.a, el.b):
                if not 0 <= t < self.n_nodes:
                    raise CircuitError(
                        f"element {k} references node {t} in a {self.n_nodes}-node circuit"
                    )

    @property
    def nodes(self) -> range:
        return range(self.n_nodes)

    def __len__(self) -> int:
        return len(self.elements)

    def indices(self, kind: Kind) -> list[int]:
        return [k for k, el in enumerate(self.elements) if el.kind is kind]


@dataclass(frozen=True)
class LinkSpec:
    """A two-terminal element to attach between two existing nodes."""

    a: int
    b: int
    element_kind: Kind = Kind.RESISTOR
    value: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "element_kind", Kind(self.element_kind))
        if self.element_kind not in (Kind.RESISTOR, Kind.VOLTAGE_SOURCE):
            raise CircuitError("a link must be a resistor or a voltage source")
        if self.a == self.b:
            raise CircuitError(f"link endpoints coincide (node {self.a})")

    @property
    def element(self) -> Element:
        return Element(self.element_kind, self.value, self.a, self.b)


def build_circuit(n_nodes: int, elements: Iterable[Element]) -> Circuit:
    """Validate and freeze a circuit. Element order is preserved."""
    return Circuit(int(n_nodes), tuple(elements))


def add_link(c: Circuit, link: LinkSpec) -> Circuit:
    """Return a new circuit with ``link`` appended as the last element."""
    return Circuit(c.n_nodes, c.elements + (link.element,))


# -- JSON file format ---------------------------------------------------------

_CIRCUIT_KEYS = {"nodes", "elements"}
_ELEMENT_KEYS = {"kind", "value", "a", "b"}


class FormatError(ValueError):
    """Input document does not follow the expected file format."""


def circuit_from_dict(doc: Any) -> Circuit:
    if not isinstance(doc, dict):
        raise FormatError("circuit document must be a JSON object")
    extra = set(doc) - _CIRCUIT_KEYS
    if extra:
        raise FormatError(f"unknown circuit keys: {sorted(extra)}")
    missing = _CIRCUIT_KEYS - set(doc)
    if missing:
        raise FormatError(f"missing circuit keys: {sorted(missing)}")
    elements = []
    for k, raw in enumerate(doc["elements"]):
        if not isinstance(raw, dict):
            raise FormatError(f"element {k} must be an object")
        extra = set(raw) - _ELEMENT_KEYS
        if extra:
            raise FormatError(f"unknown keys in element {k}: {sorted(extra)}")
        missing = _ELEMENT_KEYS - set(raw)
        if missing:
            raise FormatError(f"missing keys in element {k}: {sorted(missing)}")
        if raw["kind"] not in {m.value for m in Kind}:
            raise FormatError(f"element {k}: unknown kind {raw['kind']!r}")
        for t in ("a", "b"):
            if isinstance(raw[t], bool) or not isinstance(raw[t], int):
                raise FormatError(f"element {k}: terminal {t} must be an integer")
        elements.append(Element(Kind(raw["kind"]), float(raw["value"]), raw["a"], raw["b"]))
    if isinstance(doc["nodes"], bool) or not isinstance(doc["nodes"], int):
        raise FormatError("'nodes' must be an integer count")
    return build_circuit(doc["nodes"], elements)


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "nodes": c.n_nodes,
        "elements": [
            {"kind": el.kind.value, "value": el.value, "a": el.a, "b": el.b}
            for el in c.elements
        ],
    }


def load_circuit(path: str | Path) -> Circuit:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return circuit_from_dict(doc)

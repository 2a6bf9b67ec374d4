"""Single-gate fault models and faulty circuit variants.

Two fault kinds are supported per gate:
  * missing gate: the gate silently acts as the identity,
  * replacement: the gate is swapped for a known wrong unitary of the
    same arity.
A FaultSpec assigns one kind to every gate index via a default plus
sparse overrides, and serializes to JSON with [re, im] matrix entries.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from qatpg.circuit import Circuit, GateKind, PlacedGate
from qatpg.linalg import CMatrix, as_cmatrix, unitarity_deviation

REPLACEMENT_UNITARY_TOL = 1e-8


class FaultModel(enum.Enum):
    SMGF = "smgf"
    REPLACE = "replace"


@dataclass(frozen=True, eq=False)
class GateFault:
    """The fault hypothesis for one gate index."""

    kind: FaultModel = FaultModel.SMGF
    matrix: CMatrix | None = None

    def __post_init__(self):
        if self.kind is FaultModel.REPLACE:
            if self.matrix is None:
                raise ValueError("replacement faults require a matrix")
            m = as_cmatrix(self.matrix)
            if m.shape[0] != m.shape[1]:
                raise ValueError(f"replacement matrix must be square, got {m.shape}")
            dev = unitarity_deviation(m)
            if dev > REPLACEMENT_UNITARY_TOL:
                raise ValueError(
                    f"replacement matrix is not unitary (deviation {dev:.3e})"
                )
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError("missing-gate faults carry no matrix")

    def __eq__(self, other):
        if not isinstance(other, GateFault):
            return NotImplemented
        if self.kind is not other.kind:
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is other.matrix
        return bool(np.array_equal(self.matrix, other.matrix))


def _matrix_to_json(m: CMatrix) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _matrix_from_json(rows) -> CMatrix:
    try:
        return np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in rows],
            dtype=np.complex128,
        )
    except (TypeError, IndexError) as exc:
        raise ValueError(f"malformed matrix entries: {exc}") from None


@dataclass(frozen=True, eq=False)
class FaultSpec:
    """Default fault kind for every gate plus per-index overrides (1-based)."""

    default: FaultModel = FaultModel.SMGF
    overrides: dict[int, GateFault] = field(default_factory=dict)

    def __post_init__(self):
        if self.default is not FaultModel.SMGF:
            # A REPLACE default would need one matrix per gate; overrides cover that.
            raise ValueError("the default fault kind must be smgf; use overrides for replacements")
        clean = {}
        for key, value in self.overrides.items():
            idx = int(key)
            if idx < 1:
                raise ValueError(f"override index {idx} must be >= 1")
            if not isinstance(value, GateFault):
                raise ValueError("overrides must map gate indexes to GateFault")
            clean[idx] = value
        object.__setattr__(self, "overrides", clean)

    def fault_for(self, i: int) -> GateFault:
        return self.overrides.get(int(i), GateFault(kind=self.default))

    def __eq__(self, other):
        if not isinstance(other, FaultSpec):
            return NotImplemented
        return self.default is other.default and self.overrides == other.overrides

    def to_json(self) -> dict:
        return {
            "default": self.default.value,
            "overrides": {
                str(i): (
                    {"kind": f.kind.value}
                    if f.matrix is None
                    else {"kind": f.kind.value, "matrix": _matrix_to_json(f.matrix)}
                )
                for i, f in sorted(self.overrides.items())
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "FaultSpec":
        if not isinstance(data, dict):
            raise ValueError("fault spec must be a JSON object")
        default = FaultModel(data.get("default", "smgf"))
        overrides = {}
        for key, entry in (data.get("overrides") or {}).items():
            try:
                idx = int(key)
            except ValueError:
                raise ValueError(f"override key '{key}' is not a gate index") from None
            kind = FaultModel(entry["kind"])
            matrix = None
            if "matrix" in entry and entry["matrix"] is not None:
                matrix = _matrix_from_json(entry["matrix"])
            overrides[idx] = GateFault(kind=kind, matrix=matrix)
        return cls(default=default, overrides=overrides)

    def canonical_json(self) -> str:
        """Stable compact rendering used for hashing."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def fault_operator(circuit: Circuit, spec: FaultSpec, i: int) -> CMatrix:
    """The wrong unitary that replaces gate i under the fault spec (gate-local dims)."""
    if not 1 <= i <= circuit.size:
        raise ValueError(f"gate index {i} outside 1..{circuit.size}")
    gate = circuit.gates[i - 1]
    fault = spec.fault_for(i)
    dim = 2 ** gate.arity
    if fault.kind is FaultModel.SMGF:
        return np.eye(dim, dtype=np.complex128)
    if fault.matrix.shape != (dim, dim):
        raise ValueError(
            f"replacement for gate {i} has shape {fault.matrix.shape}, "
            f"the gate needs {(dim, dim)}"
        )
    return fault.matrix.copy()


def faulty_variant(circuit: Circuit, spec: FaultSpec, i: int) -> Circuit:
    """Circuit variant with gate i faulty; i = 0 returns the circuit unchanged."""
    if i == 0:
        return circuit
    if not 1 <= i <= circuit.size:
        raise ValueError(f"gate index {i} outside 0..{circuit.size}")
    fault = spec.fault_for(i)
    gates = list(circuit.gates)
    if fault.kind is FaultModel.SMGF:
        del gates[i - 1]
        return Circuit(circuit.n, tuple(gates))
    target = gates[i - 1]
    op = fault_operator(circuit, spec, i)
    gates[i - 1] = PlacedGate(kind=GateKind.CUSTOM, qubits=target.qubits, matrix=op)
    return Circuit(circuit.n, tuple(gates))

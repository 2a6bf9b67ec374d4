"""Emit the separator catalog for the built-in gates as one JSON document.

Covers both rotation conventions in a single file, which the CLI's
`catalog` subcommand only produces one at a time.

Usage:
    python scripts/regen_catalog.py
    python scripts/regen_catalog.py -o catalog.json
"""
import argparse
import json
import math
import sys

import numpy as np

from qatpg import PlacedGate, GateKind, RotationConvention, __version__
from qatpg.circuit import gate_matrix
from qatpg.helstrom import error_probability
from qatpg.separator import gate_separator

GATES = [
    ("h", GateKind.H, 1, None),
    ("x", GateKind.X, 1, None),
    ("y", GateKind.Y, 1, None),
    ("z", GateKind.Z, 1, None),
    ("phase", GateKind.PHASE, 1, None),
    ("cnot", GateKind.CNOT, 2, None),
    ("toffoli", GateKind.TOFFOLI, 3, None),
    ("ry(pi/6)", GateKind.RY, 1, math.pi / 6),
    ("rz(pi/16)", GateKind.RZ, 1, math.pi / 16),
]


def catalog_for(conv: RotationConvention) -> list[dict]:
    entries = []
    for name, kind, arity, angle in GATES:
        gate = PlacedGate(kind=kind, qubits=tuple(range(arity)), angle=angle)
        g = gate_matrix(gate, conv)
        sol = gate_separator(g, np.eye(g.shape[0], dtype=np.complex128))
        entries.append({
            "gate": name,
            "k": sol.k,
            "delta": error_probability(sol.k),
            "kappa": sol.kappa,
            "phases": [c.phase for c in sol.classes],
            "weights": [c.weight for c in sol.classes],
            "input_state": [[float(v.real), float(v.imag)]
                            for v in sol.phi_prime],
        })
    return entries


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", help="write here instead of stdout")
    args = parser.parse_args()
    body = {
        "tool": "qatpg",
        "version": __version__,
        "catalog": {
            "half": catalog_for(RotationConvention.HALF_ANGLE),
            "full": catalog_for(RotationConvention.FULL_ANGLE),
        },
    }
    text = json.dumps(body, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

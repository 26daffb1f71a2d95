#!/usr/bin/env python3
"""Regenerates benchmarks/*.qasm.

Gate-count-matched programs are seeded random circuits with fixed U/CX/measure
counts. Two-qubit gates only use Yorktown coupling edges so every fixture
passes device validation on configs/yorktown.json.
"""

import math
import random
from pathlib import Path

YORKTOWN = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]

# name: (qubits, U, CX, measured qubits)
RANDOM_BENCHMARKS = {
    "rb": (2, 9, 2, [0, 1]),
    "grover": (3, 87, 25, [0, 1, 2]),
    "wstate": (3, 21, 9, [0, 1, 2]),
    "7x1mod15": (4, 17, 9, [0, 1, 2, 3]),
    "qft4": (4, 42, 15, [0, 1, 2, 3]),
    "qft5": (5, 83, 26, [0, 1, 2, 3, 4]),
    "qv_n5d2": (5, 44, 12, [0, 1, 2, 3, 4]),
    "qv_n5d3": (5, 74, 21, [0, 1, 2, 3, 4]),
    "qv_n5d4": (5, 100, 30, [0, 1, 2, 3, 4]),
    "qv_n5d5": (5, 130, 36, [0, 1, 2, 3, 4]),
}

SEED = 20190401
HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";'


def angle(rng):
    return f"{rng.uniform(0.0, 2.0 * math.pi):.6f}"


def random_circuit(name, qubits, n_u, n_cx, measured, rng):
    edges = [e for e in YORKTOWN if e[0] < qubits and e[1] < qubits]
    ops = ["u"] * n_u + ["cx"] * n_cx
    rng.shuffle(ops)
    lines = [HEADER, f"qreg q[{qubits}];", f"creg c[{len(measured)}];"]
    for op in ops:
        if op == "u":
            q = rng.randrange(qubits)
            lines.append(f"U({angle(rng)},{angle(rng)},{angle(rng)}) q[{q}];")
        else:
            a, b = rng.choice(edges)
            if rng.random() < 0.5:
                a, b = b, a
            lines.append(f"CX q[{a}],q[{b}];")
    for c, q in enumerate(measured):
        lines.append(f"measure q[{q}] -> c[{c}];")
    return "\n".join(lines) + "\n"


def bernstein_vazirani(data_qubits, ancilla):
    qubits = len(data_qubits) + 1
    lines = [HEADER, f"qreg q[{qubits}];", f"creg c[{len(data_qubits)}];"]
    lines += [f"h q[{q}];" for q in data_qubits]
    lines += [f"x q[{ancilla}];", f"h q[{ancilla}];"]
    lines += [f"CX q[{q}],q[{ancilla}];" for q in data_qubits]
    lines += [f"h q[{q}];" for q in data_qubits]
    lines += [f"measure q[{q}] -> c[{c}];" for c, q in enumerate(data_qubits)]
    return "\n".join(lines) + "\n"


HANDWRITTEN = {
    "bell": """OPENQASM 2.0;
include "qelib1.inc";
qreg q[2];
creg c[2];
h q[0];
CX q[0],q[1];
measure q[0] -> c[0];
measure q[1] -> c[1];
""",
    "bv4_prefix": """OPENQASM 2.0;
qreg q[4];
h q[0];
h q[1];
h q[2];
x q[3];
h q[3];
""",
    "bv4_prefix_reordered": """OPENQASM 2.0;
qreg q[4];
h q[0];
h q[1];
x q[3];
h q[2];
h q[3];
""",
    "active_reset": """OPENQASM 2.0;
include "qelib1.inc";
qreg q[1];
creg c[1];
measure q[0] -> c[0];
wait 60;
if (c==1) x q[0];
measure q[0] -> c[0];
wait 60;
if (c==1) x q[0];
measure q[0] -> c[0];
wait 60;
if (c==1) x q[0];
""",
}

ALLXY_PAIRS = [
    ("id", "id"), ("x", "x"), ("y", "y"), ("x", "y"), ("y", "x"),
    ("rx90", "id"), ("ry90", "id"), ("rx90", "ry90"), ("ry90", "rx90"), ("rx90", "y"), ("ry90", "x"),
    ("x", "ry90"), ("y", "rx90"), ("rx90", "x"), ("x", "rx90"), ("ry90", "y"), ("y", "ry90"),
    ("x", "id"), ("y", "id"), ("rx90", "rx90"), ("ry90", "ry90"),
]

ALLXY_GATES = {
    "id": "id",
    "x": "x",
    "y": "y",
    "rx90": "U(pi/2,-pi/2,pi/2)",
    "ry90": "U(pi/2,0,0)",
}


def allxy():
    lines = [HEADER, "qreg q[1];", "creg c[21];"]
    for i, (a, b) in enumerate(ALLXY_PAIRS):
        lines.append(f"{ALLXY_GATES[a]} q[0];")
        lines.append(f"{ALLXY_GATES[b]} q[0];")
        lines.append(f"measure q[0] -> c[{i}];")
    return "\n".join(lines) + "\n"


def main():
    out = Path(__file__).resolve().parent.parent / "benchmarks"
    out.mkdir(exist_ok=True)
    for i, (name, (qubits, n_u, n_cx, measured)) in enumerate(sorted(RANDOM_BENCHMARKS.items())):
        rng = random.Random(SEED + i)
        (out / f"{name}.qasm").write_text(random_circuit(name, qubits, n_u, n_cx, measured, rng))
    (out / "bv4.qasm").write_text(bernstein_vazirani([0, 1, 3], 2))
    (out / "bv5.qasm").write_text(bernstein_vazirani([0, 1, 3, 4], 2))
    for name, text in HANDWRITTEN.items():
        (out / f"{name}.qasm").write_text(text)
    (out / "allxy.qasm").write_text(allxy())


if __name__ == "__main__":
    main()

"""Arithmetic circuits: emit the dynamic program as an explicit {+, x} circuit
over inputs 0, 1, u, v, x_a, y_a, and interpret such circuits.

Circuits are division-free.  The forget rule's occasional 1/v factor is
handled by bookkeeping: every part carries an integer v-offset alongside its
gate, offsets are settled when parts are added (rebasing to the smaller
offset with explicit v-power gates), and the root offset is provably zero
because part coefficients are nonnegative counts, so the tracked offset is
exactly the v-adic valuation and the polynomial has constant term 1.

``size`` counts Add/Mul gates; inputs are listed but traditionally free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .evaluator import Assignment, EngineStats, run_dp
from .graph import Graph
from .tdecomp import DEFAULT_BAG_LIMIT, FormatError, NiceTreeDecomposition, check_bag_guard

IN, ADD, MUL = "IN", "ADD", "MUL"


@dataclass(frozen=True)
class Circuit:
    """Gates in topological order: ("IN", label) with label a constant or a
    variable name, or ("ADD"/"MUL", left, right) referencing earlier gates."""

    gates: tuple[tuple, ...]
    output: int

    @property
    def size(self) -> int:
        return sum(1 for gate in self.gates if gate[0] != IN)

    @property
    def n_inputs(self) -> int:
        return sum(1 for gate in self.gates if gate[0] == IN)

    def variables(self) -> list[str]:
        out = []
        for gate in self.gates:
            if gate[0] == IN and isinstance(gate[1], str):
                out.append(gate[1])
        return out


class CircuitBuilder:
    def __init__(self):
        self.gates: list[tuple] = []
        self._inputs: dict = {}
        self.one = self.input_const(1)

    def input_const(self, value) -> int:
        key = ("const", Fraction(value))
        return self._input(key, Fraction(value))

    def input_var(self, name: str) -> int:
        return self._input(("var", name), name)

    def _input(self, key, label) -> int:
        gid = self._inputs.get(key)
        if gid is None:
            gid = len(self.gates)
            self.gates.append((IN, label))
            self._inputs[key] = gid
        return gid

    def add(self, l: int, r: int) -> int:
        gid = len(self.gates)
        self.gates.append((ADD, l, r))
        return gid

    def mul(self, l: int, r: int) -> int:
        if l == self.one:
            return r
        if r == self.one:
            return l
        gid = len(self.gates)
        self.gates.append((MUL, l, r))
        return gid

    def finish(self, output: int) -> Circuit:
        return Circuit(tuple(self.gates), output)


class CountingBuilder:
    """Same interface as CircuitBuilder but records only gate counts.

    Mirrors the builder exactly (input dedup, multiply-by-one elision) so the
    reported size matches what a real build would produce.  Inputs get
    negative ids, operations positive ones; nothing is stored per gate."""

    def __init__(self):
        self.n_ops = 0
        self._inputs: dict = {}
        self._next = 0
        self.one = self.input_const(1)

    def _input(self, key) -> int:
        gid = self._inputs.get(key)
        if gid is None:
            gid = -1 - len(self._inputs)
            self._inputs[key] = gid
        return gid

    def input_const(self, value) -> int:
        return self._input(("const", Fraction(value)))

    def input_var(self, name: str) -> int:
        return self._input(("var", name))

    def add(self, l: int, r: int) -> int:
        self.n_ops += 1
        self._next += 1
        return self._next

    def mul(self, l: int, r: int) -> int:
        if l == self.one or r == self.one:
            return l if r == self.one else r
        self.n_ops += 1
        self._next += 1
        return self._next

    @property
    def size(self) -> int:
        return self.n_ops


class CircuitDomain:
    """Value domain whose values are (gate id, v offset) pairs."""

    def __init__(self, g: Graph, builder):
        self.b = builder
        self.one = (builder.one, 0)
        self.zero = None  # never materialised; the tables are sparse
        self._u = builder.input_var("u")
        self._v = builder.input_var("v")
        self._upow = {0: builder.one, 1: self._u}
        self._vpow = {0: builder.one, 1: self._v}
        self._factor: dict[tuple[int, str, int], int] = {}
        self._g = g

    def _u_power(self, e: int) -> int:
        gid = self._upow.get(e)
        if gid is None:
            gid = self.b.mul(self._u_power(e - 1), self._u)
            self._upow[e] = gid
        return gid

    def _v_power(self, e: int) -> int:
        gid = self._vpow.get(e)
        if gid is None:
            gid = self.b.mul(self._v_power(e - 1), self._v)
            self._vpow[e] = gid
        return gid

    def add(self, a, b):
        g1, o1 = a
        g2, o2 = b
        o = min(o1, o2)
        if o1 > o:
            g1 = self.b.mul(g1, self._v_power(o1 - o))
        if o2 > o:
            g2 = self.b.mul(g2, self._v_power(o2 - o))
        return (self.b.add(g1, g2), o)

    def mul(self, a, b):
        g1, o1 = a
        g2, o2 = b
        return (self.b.mul(g1, g2), o1 + o2)

    def scale(self, val, a: int, kind: str, r: int):
        gid, off = val
        key = (a, kind, r)
        f = self._factor.get(key)
        if f is None:
            var = self.b.input_var(f"{kind}_{self._g.labels[a]}")
            f = self.b.mul(var, self._u_power(r))
            self._factor[key] = f
        return (self.b.mul(gid, f), off + 1 - r)

    @staticmethod
    def is_zero(val) -> bool:
        return False


def build_circuit(
    g: Graph,
    ntd: NiceTreeDecomposition,
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
    stats: EngineStats | None = None,
) -> Circuit:
    """Compile the evaluation into an explicit arithmetic circuit."""
    check_bag_guard(ntd.k, bag_limit)
    builder = CircuitBuilder()
    domain = CircuitDomain(g, builder)
    root = run_dp(g, ntd, domain, stats=stats)
    if root is None:
        return builder.finish(builder.input_const(0))
    gid, off = root
    if off < 0:
        raise AssertionError("root part has a negative v offset")
    if off > 0:
        gid = builder.mul(gid, domain._v_power(off))
    return builder.finish(gid)


def count_circuit_gates(
    g: Graph, ntd: NiceTreeDecomposition, *, bag_limit: int = DEFAULT_BAG_LIMIT
) -> int:
    """Add/Mul count of build_circuit without materialising the gates."""
    check_bag_guard(ntd.k, bag_limit)
    builder = CountingBuilder()
    domain = CircuitDomain(g, builder)
    root = run_dp(g, ntd, domain)
    if root is not None and root[1] > 0:
        builder.mul(root[0], domain._v_power(root[1]))
    return builder.size


def bindings_from_assignment(g: Graph, asg: Assignment) -> dict[str, Fraction]:
    out = {"u": Fraction(asg.u), "v": Fraction(asg.v)}
    for i, lab in enumerate(g.labels):
        out[f"x_{lab}"] = Fraction(asg.x[i])
        out[f"y_{lab}"] = Fraction(asg.y[i])
    return out


def eval_circuit(c: Circuit, bindings: Mapping[str, Fraction]) -> Fraction:
    """Evaluate topologically with exact arithmetic; all variables must bind."""
    values: list[Fraction] = []
    for gid, gate in enumerate(c.gates):
        op = gate[0]
        if op == IN:
            label = gate[1]
            if isinstance(label, str):
                if label not in bindings:
                    raise KeyError(f"unbound circuit variable {label!r}")
                values.append(Fraction(bindings[label]))
            else:
                values.append(Fraction(label))
        elif op == ADD:
            values.append(values[gate[1]] + values[gate[2]])
        else:
            values.append(values[gate[1]] * values[gate[2]])
    return values[c.output]


# ---------------------------------------------------------------------------
# Line-based text serialization.


def dumps(c: Circuit) -> str:
    lines = []
    for gid, gate in enumerate(c.gates):
        if gate[0] == IN:
            lines.append(f"{gid} IN {gate[1]}")
        else:
            lines.append(f"{gid} {gate[0]} {gate[1]} {gate[2]}")
    lines.append(f"OUT {c.output}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    gates: list[tuple] = []
    output = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "OUT":
            if len(parts) != 2:
                raise FormatError("OUT line must be 'OUT <id>'", line_no)
            output = int(parts[1])
            continue
        if len(parts) < 3:
            raise FormatError(f"malformed gate line {line!r}", line_no)
        try:
            gid = int(parts[0])
        except ValueError:
            raise FormatError(f"bad gate id in {line!r}", line_no)
        if gid != len(gates):
            raise FormatError(f"gate ids must be consecutive, got {gid}", line_no)
        op = parts[1]
        if op == IN:
            label = " ".join(parts[2:])
            try:
                gates.append((IN, Fraction(label)))
            except ValueError:
                gates.append((IN, label))
        elif op in (ADD, MUL):
            if len(parts) != 4:
                raise FormatError(f"{op} needs two sources", line_no)
            l, r = int(parts[2]), int(parts[3])
            if l >= gid or r >= gid:
                raise FormatError("gate sources must reference earlier gates", line_no)
            gates.append((op, l, r))
        else:
            raise FormatError(f"unknown gate type {op!r}", line_no)
    if output is None or not 0 <= output < len(gates):
        raise FormatError("missing or out-of-range OUT line", 1)
    return Circuit(tuple(gates), output)

"""Shallow-circuit IR: alternating single-qubit and multi-qubit-CZ layers.

A circuit acts on n_inputs + n_ancillae qubits (inputs first, qubit 0 is the
output wire).  Layers alternate L (disjoint single-qubit unitaries) and M
(disjoint CZ gates of arbitrary arity); depth counts M layers only.  CNOT and
generalized Toffoli are accepted as parser sugar and rewritten into
Hadamard-conjugated CZ at parse time.
"""
from __future__ import annotations

import ast
import cmath
import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .pauli_core import PauliOperator, dense_limit, expand_from_dense

SIM_LIMIT = 24          # statevector qubit cap
UNITARY_TOL = 1e-10

_SQ2 = 1.0 / math.sqrt(2.0)

NAMED_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
}


def rotation_gate(axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "z":
        return np.array([[cmath.exp(-1j * theta / 2), 0],
                         [0, cmath.exp(1j * theta / 2)]], dtype=complex)
    raise ValueError(f"unknown rotation axis {axis!r}")


def _resolve_gate(name: str, args: str | None) -> np.ndarray:
    upper = name.upper()
    if upper in NAMED_GATES:
        if args:
            raise ValueError(f"gate {name} takes no arguments")
        return NAMED_GATES[upper]
    if upper in ("RX", "RY", "RZ"):
        return rotation_gate(upper[1].lower(), float(ast.literal_eval(args)))
    if name == "g":
        mat = np.array(ast.literal_eval(args), dtype=complex)
        if mat.shape != (2, 2):
            raise ValueError("explicit gates must be 2x2")
        return mat
    raise ValueError(f"unknown gate {name!r}")


@dataclass(frozen=True)
class LLayer:
    """Single-qubit layer: map qubit -> 2x2 unitary."""
    gates: dict[int, np.ndarray]

    def support(self) -> set[int]:
        return set(self.gates)


@dataclass(frozen=True)
class MLayer:
    """CZ layer: disjoint gate supports, each a sorted tuple of >= 2 qubits."""
    gates: tuple[tuple[int, ...], ...]

    def support(self) -> set[int]:
        return {q for g in self.gates for q in g}


Layer = LLayer | MLayer


def _merge_llayers(a: LLayer, b: LLayer) -> LLayer:
    """Compose b after a on any shared qubits (still a single-qubit layer)."""
    gates = dict(a.gates)
    for q, m in b.gates.items():
        gates[q] = m @ gates[q] if q in gates else m
    return LLayer(gates)


def normalize_layers(layers: list[Layer]) -> list[Layer]:
    """Canonical alternating form L, M, L, ..., M, L (merging adjacent Ls)."""
    out: list[Layer] = [LLayer({})]
    for layer in layers:
        if isinstance(layer, LLayer):
            assert isinstance(out[-1], (LLayer, MLayer))
            if isinstance(out[-1], LLayer):
                out[-1] = _merge_llayers(out[-1], layer)
            else:
                out.append(layer)
        else:
            if isinstance(out[-1], MLayer):
                out.append(LLayer({}))
            out.append(layer)
    if isinstance(out[-1], MLayer):
        out.append(LLayer({}))
    return out


class QacCircuit:
    """Alternating-layer circuit with optional ancilla state."""

    def __init__(self, n_inputs: int, n_ancillae: int, layers: list[Layer],
                 ancilla_state: np.ndarray | None = None):
        if n_inputs < 1 or n_ancillae < 0:
            raise ValueError("need n_inputs >= 1 and n_ancillae >= 0")
        self.n_inputs = n_inputs
        self.n_ancillae = n_ancillae
        self.layers = normalize_layers(layers)
        self.ancilla_state = None if ancilla_state is None else np.asarray(ancilla_state, dtype=complex)
        self._validate()

    # -- invariants ------------------------------------------------------------

    @property
    def n_total(self) -> int:
        return self.n_inputs + self.n_ancillae

    @property
    def depth(self) -> int:
        return sum(isinstance(l, MLayer) for l in self.layers)

    @property
    def ancilla_is_mixed(self) -> bool:
        return self.ancilla_state is not None and self.ancilla_state.ndim == 2

    def _validate(self) -> None:
        n = self.n_total
        for layer in self.layers:
            if isinstance(layer, LLayer):
                for q, m in layer.gates.items():
                    if not 0 <= q < n:
                        raise ValueError(f"qubit {q} out of range")
                    if np.abs(m @ m.conj().T - np.eye(2)).max() > UNITARY_TOL:
                        raise ValueError(f"gate on qubit {q} is not unitary")
            else:
                seen: set[int] = set()
                for g in layer.gates:
                    if len(g) < 2:
                        raise ValueError("CZ gates need arity >= 2")
                    if sorted(set(g)) != list(g):
                        raise ValueError("CZ support must be sorted and distinct")
                    for q in g:
                        if not 0 <= q < n:
                            raise ValueError(f"qubit {q} out of range")
                        if q in seen:
                            raise ValueError(f"overlapping CZ supports at qubit {q}")
                        seen.add(q)
        anc = self.ancilla_state
        if anc is not None:
            dim = 1 << self.n_ancillae
            if anc.ndim == 1:
                if anc.shape != (dim,):
                    raise ValueError("ancilla vector has wrong dimension")
                if abs(np.linalg.norm(anc) - 1.0) > 1e-9:
                    raise ValueError("ancilla vector is not normalized")
            elif anc.ndim == 2:
                if anc.shape != (dim, dim):
                    raise ValueError("ancilla density has wrong dimension")
                if abs(np.trace(anc) - 1.0) > 1e-9:
                    raise ValueError("ancilla density trace != 1")
                if np.linalg.eigvalsh(anc).min() < -1e-10:
                    raise ValueError("ancilla density is not PSD")
            else:
                raise ValueError("ancilla state must be a vector or a matrix")

    def ancilla_vector(self) -> np.ndarray:
        if self.ancilla_is_mixed:
            raise ValueError("ancilla state is mixed")
        if self.ancilla_state is not None:
            return self.ancilla_state
        v = np.zeros(1 << self.n_ancillae, dtype=complex)
        v[0] = 1.0
        return v

    # -- serialization ---------------------------------------------------------

    def to_json_obj(self) -> dict:
        layers = []
        for layer in self.layers:
            if isinstance(layer, LLayer):
                layers.append({"kind": "L", "gates": [
                    {"q": q, "matrix": [[[m[r, c].real, m[r, c].imag] for c in (0, 1)]
                                        for r in (0, 1)]}
                    for q, m in sorted(layer.gates.items())]})
            else:
                layers.append({"kind": "M", "gates": [list(g) for g in layer.gates]})
        obj = {"n_inputs": self.n_inputs, "n_ancillae": self.n_ancillae, "layers": layers}
        anc = self.ancilla_state
        if anc is not None:
            if anc.ndim == 1:
                obj["ancilla"] = {"kind": "pure", "amplitudes": [[a.real, a.imag] for a in anc]}
            else:
                obj["ancilla"] = {"kind": "mixed",
                                  "rows": [[[e.real, e.imag] for e in row] for row in anc]}
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "QacCircuit":
        layers: list[Layer] = []
        for ld in obj["layers"]:
            if ld["kind"] == "L":
                gates = {int(g["q"]): np.array([[complex(*e) for e in row] for row in g["matrix"]])
                         for g in ld["gates"]}
                layers.append(LLayer(gates))
            else:
                layers.append(MLayer(tuple(tuple(sorted(g)) for g in ld["gates"])))
        anc = None
        if "ancilla" in obj:
            a = obj["ancilla"]
            if a["kind"] == "pure":
                anc = np.array([complex(*e) for e in a["amplitudes"]])
            else:
                anc = np.array([[complex(*e) for e in row] for row in a["rows"]])
        return cls(int(obj["n_inputs"]), int(obj["n_ancillae"]), layers, anc)


# -- text format ----------------------------------------------------------------

_GATE_RE = re.compile(r"^([A-Za-z]+|g)(\((?:[^()]|\([^()]*\))*\))?@([0-9,]+)$")


def _split_tokens(body: str, sep: str) -> list[str]:
    """Split on sep at bracket depth zero."""
    out, depth, cur = [], 0, []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            tok = "".join(cur).strip()
            if tok:
                out.append(tok)
            cur = []
        else:
            cur.append(ch)
    tok = "".join(cur).strip()
    if tok:
        out.append(tok)
    return out


def parse(text: str, ancilla_dir: str | None = None) -> QacCircuit:
    """Parse the line format (see module docs); raises ValueError on bad input."""
    import os

    n_inputs = n_anc = None
    ancilla = None
    layers: list[Layer] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("qubits"):
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"bad qubits line: {raw!r}")
            n_inputs, n_anc = int(parts[1]), int(parts[2])
        elif line.startswith("anc"):
            rest = line[3:].strip()
            if rest.startswith("|") and rest.endswith(">"):
                bits = rest[1:-1]
                if bits.strip("0."):
                    raise ValueError("literal ancilla kets must be all zeros")
                ancilla = None
            elif rest.startswith("pure ") or rest.startswith("mixed "):
                kind, path = rest.split(None, 1)
                if ancilla_dir is not None:
                    path = os.path.join(ancilla_dir, path)
                with open(path) as fh:
                    data = json.load(fh)
                if kind == "pure":
                    ancilla = np.array([complex(*e) for e in data])
                else:
                    ancilla = np.array([[complex(*e) for e in row] for row in data])
            else:
                raise ValueError(f"bad anc line: {raw!r}")
        elif line.startswith("layer"):
            m = re.match(r"layer\s+([LM])\s*:\s*(.*)$", line)
            if not m:
                raise ValueError(f"bad layer line: {raw!r}")
            kind, body = m.group(1), m.group(2)
            if kind == "L":
                gates = {}
                for tok in _split_tokens(body, " "):
                    gm = _GATE_RE.match(tok)
                    if not gm:
                        raise ValueError(f"bad gate token {tok!r}")
                    name, args, qs = gm.group(1), gm.group(2), gm.group(3)
                    mat = _resolve_gate(name, args[1:-1] if args else None)
                    q = int(qs)
                    if q in gates:
                        raise ValueError(f"duplicate gate on qubit {q}")
                    gates[q] = mat
                layers.append(LLayer(gates))
            else:
                supports: list[tuple[int, ...]] = []
                h_targets: list[int] = []
                for tok in _split_tokens(body, ";"):
                    gm = _GATE_RE.match(tok)
                    if not gm:
                        raise ValueError(f"bad gate token {tok!r}")
                    name = gm.group(1).upper()
                    qubits = tuple(int(q) for q in gm.group(3).split(","))
                    if name == "CZ":
                        supports.append(tuple(sorted(qubits)))
                    elif name in ("CNOT", "CX", "TOF", "TOFFOLI", "CCX"):
                        # Hadamard-conjugated CZ: last listed qubit is the target
                        h_targets.append(qubits[-1])
                        supports.append(tuple(sorted(qubits)))
                    else:
                        raise ValueError(f"gate {name} not allowed in an M layer")
                if h_targets:
                    hmap = {q: NAMED_GATES["H"] for q in h_targets}
                    layers.append(LLayer(dict(hmap)))
                    layers.append(MLayer(tuple(supports)))
                    layers.append(LLayer(dict(hmap)))
                else:
                    layers.append(MLayer(tuple(supports)))
        else:
            raise ValueError(f"unrecognized line: {raw!r}")
    if n_inputs is None:
        raise ValueError("missing qubits line")
    return QacCircuit(n_inputs, n_anc, layers, ancilla)


# -- simulation -------------------------------------------------------------------

def _apply_1q(state: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, state, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _apply_cz(state: np.ndarray, support: tuple[int, ...], n_axes: int) -> None:
    idx: list[slice | int] = [slice(None)] * state.ndim
    for q in support:
        idx[q] = 1
    state[tuple(idx)] *= -1.0


def _run_layers_vector(state: np.ndarray, layers, n: int) -> np.ndarray:
    for layer in layers:
        if isinstance(layer, LLayer):
            for q, m in layer.gates.items():
                state = _apply_1q(state, m, q)
        else:
            for g in layer.gates:
                _apply_cz(state, g, n)
    return state


def simulate(circuit: QacCircuit, x: int | str | np.ndarray) -> np.ndarray:
    """Run the circuit on input x; returns the final state.

    Pure ancillae give a statevector of shape (2^n_total,); a mixed ancilla
    gives a density matrix.  Norm/trace is checked to 1e-10.
    """
    n = circuit.n_total
    d_in = 1 << circuit.n_inputs
    if isinstance(x, str):
        if len(x) != circuit.n_inputs or x.strip("01"):
            raise ValueError(f"bad input bitstring {x!r}")
        x = int(x, 2) if x else 0
    if isinstance(x, (int, np.integer)):
        vec_in = np.zeros(d_in, dtype=complex)
        vec_in[int(x)] = 1.0
    else:
        vec_in = np.asarray(x, dtype=complex)
        if vec_in.shape != (d_in,):
            raise ValueError("input vector has wrong dimension")

    if not circuit.ancilla_is_mixed:
        if n > SIM_LIMIT:
            raise ValueError(f"statevector simulation capped at {SIM_LIMIT} qubits")
        full = np.kron(vec_in, circuit.ancilla_vector()).reshape([2] * n)
        full = _run_layers_vector(full, circuit.layers, n)
        out = full.reshape(-1)
        if abs(np.linalg.norm(out) - np.linalg.norm(vec_in)) > 1e-10:
            raise AssertionError("simulation did not preserve the norm")
        return out

    if n > SIM_LIMIT // 2:
        raise ValueError(f"density simulation capped at {SIM_LIMIT // 2} qubits")
    rho_in = np.outer(vec_in, vec_in.conj())
    rho = np.kron(rho_in, circuit.ancilla_state).reshape([2] * (2 * n))
    for layer in circuit.layers:
        if isinstance(layer, LLayer):
            for q, m in layer.gates.items():
                rho = _apply_1q(rho, m, q)
                rho = _apply_1q(rho, m.conj(), n + q)
        else:
            for g in layer.gates:
                _apply_cz(rho, g, 2 * n)
                _apply_cz(rho, tuple(n + q for q in g), 2 * n)
    rho = rho.reshape(1 << n, 1 << n)
    if abs(np.trace(rho).real - np.linalg.norm(vec_in) ** 2) > 1e-10:
        raise AssertionError("simulation did not preserve the trace")
    return rho


def prob_qubit0_one(state: np.ndarray, n: int) -> float:
    """P[measuring qubit 0 gives 1] for a statevector or density matrix."""
    dim = 1 << n
    if state.ndim == 1:
        amp = state.reshape(2, dim // 2)
        return float(np.sum(np.abs(amp[1]) ** 2))
    diag = np.real(np.diagonal(state))
    return float(np.sum(diag[dim // 2:]))


def output_probability(circuit: QacCircuit, x: int | str) -> float:
    """p(x) = P[measuring qubit 0 after the circuit gives 1]."""
    return prob_qubit0_one(simulate(circuit, x), circuit.n_total)


def output_function(circuit: QacCircuit):
    """The full acceptance-probability table p, as a BooleanFunction."""
    from .boolfn import BooleanFunction

    table = np.empty(1 << circuit.n_inputs)
    for x in range(1 << circuit.n_inputs):
        table[x] = output_probability(circuit, x)
    return BooleanFunction(circuit.n_inputs, table)


# -- dense unitary and Heisenberg conjugation -----------------------------------------

def unitary(circuit: QacCircuit) -> np.ndarray:
    """Dense unitary of the full layer sequence (ancilla state not applied)."""
    n = circuit.n_total
    if n > dense_limit():
        raise ValueError(f"dense unitary needs n <= {dense_limit()}")
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    u = _run_layers_vector(u, circuit.layers, n)
    return u.reshape(dim, dim)


def heisenberg(circuit: QacCircuit, op: PauliOperator) -> PauliOperator:
    """Exact U^dag A U in the Pauli basis (dense route)."""
    if op.n != circuit.n_total:
        raise ValueError("observable must act on all circuit qubits")
    u = unitary(circuit)
    return expand_from_dense(u.conj().T @ op.to_dense() @ u)


# -- Choi matrices -----------------------------------------------------------------

@dataclass
class ChoiMatrix:
    """Unnormalized Choi operator of the first-k-qubits channel of a circuit."""
    k: int
    n_inputs: int
    dense: np.ndarray
    op: PauliOperator = field(init=False)

    def __post_init__(self):
        dim = 1 << (self.k + self.n_inputs)
        if self.dense.shape != (dim, dim):
            raise ValueError("Choi matrix has wrong dimension")
        evals = np.linalg.eigvalsh(self.dense)
        if evals.min() < -1e-9:
            raise ValueError(f"Choi matrix not PSD: min eigenvalue {evals.min():.3e}")
        tr = np.trace(self.dense).real
        if abs(tr - (1 << self.n_inputs)) > 1e-8 * (1 << self.n_inputs):
            raise ValueError(f"Choi trace {tr}, expected {1 << self.n_inputs}")
        self.op = expand_from_dense(self.dense)

    @property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.dense))))


def _epr_with_identity(k: int, rest: int) -> np.ndarray:
    """EPR_k ox 1_rest on registers [k out][k in-first][rest in], unnormalized."""
    d_k, d_r = 1 << k, 1 << rest
    d_in = d_k * d_r
    m = np.zeros((d_k * d_in, d_k * d_in), dtype=complex)
    for i in range(d_k):
        for j in range(d_k):
            for u2 in range(d_r):
                m[i * d_in + i * d_r + u2, j * d_in + j * d_r + u2] = 1.0
    return m


def choi_of_unitary(u: np.ndarray, n: int, k: int) -> np.ndarray:
    """(1 ox U^T)(EPR_k ox 1_{n-k})(1 ox conj(U)) for the keep-first-k channel."""
    d_k = 1 << k
    base = _epr_with_identity(k, n - k)
    left = np.kron(np.eye(d_k), u.T)
    return left @ base @ np.kron(np.eye(d_k), u.conj())


def choi(circuit: QacCircuit, k: int, verify: bool = True) -> ChoiMatrix:
    """Choi matrix of rho -> Tr_{[k]^c}[U (rho ox ancilla) U^dag].

    Internally cross-checked against the transpose identity
    (1 ox U^T)(EPR_k ox 1)(1 ox conj(U)) contracted with the conjugated
    ancilla state, to 1e-10 entrywise.
    """
    n_in, a = circuit.n_inputs, circuit.n_ancillae
    if not 1 <= k <= n_in + a:
        raise ValueError("need 1 <= k <= total qubits")
    u = unitary(circuit)
    d_in, d_k = 1 << n_in, 1 << k
    d_rest = 1 << (n_in + a - k)

    if circuit.ancilla_is_mixed:
        evals, vecs = np.linalg.eigh(circuit.ancilla_state)
        comps = [(float(p), vecs[:, i]) for i, p in enumerate(evals) if p > 1e-14]
    else:
        comps = [(1.0, circuit.ancilla_vector())]

    phi = np.zeros((d_k * d_in, d_k * d_in), dtype=complex)
    for p, vec in comps:
        cols = (u @ np.kron(np.eye(d_in), vec.reshape(-1, 1)))  # (2^{n+a}, d_in)
        g = cols.reshape(d_k, d_rest, d_in).transpose(0, 2, 1).reshape(d_k * d_in, d_rest)
        phi += p * (g @ g.conj().T)

    if verify and not circuit.ancilla_is_mixed and k + n_in + a <= dense_limit():
        big = choi_of_unitary(u, n_in + a, k)
        v = circuit.ancilla_vector()  # contract with <conj(v)| ... |conj(v)>
        d_a = 1 << a
        contr = big.reshape(d_k, d_in, d_a, d_k, d_in, d_a)
        contr = np.einsum('a,ixajyb,b->ixjy', v, contr, v.conj())
        contr = contr.reshape(d_k * d_in, d_k * d_in)
        if np.abs(contr - phi).max() > 1e-10:
            raise AssertionError("Choi transpose identity failed beyond 1e-10")

    return ChoiMatrix(k, n_in, phi)


# -- layer surgery helpers (used by circuit composition) ------------------------------

def remap_layers(layers: list[Layer], qubit_map: dict[int, int]) -> list[Layer]:
    out: list[Layer] = []
    for layer in layers:
        if isinstance(layer, LLayer):
            out.append(LLayer({qubit_map[q]: m for q, m in layer.gates.items()}))
        else:
            out.append(MLayer(tuple(tuple(sorted(qubit_map[q] for q in g))
                                    for g in layer.gates)))
    return out


def parallel_layers(parts: list[list[Layer]]) -> list[Layer]:
    """Zip circuits (already remapped to disjoint qubits) into one layer list.

    Shorter parts are padded with empty layers, so the result has the maximum
    depth of the parts.
    """
    norm = [normalize_layers(p) for p in parts]
    depth = max((len(p) - 1) // 2 for p in norm)
    for p in norm:
        while (len(p) - 1) // 2 < depth:
            p.extend([MLayer(()), LLayer({})])
    out: list[Layer] = []
    for i in range(2 * depth + 1):
        if i % 2 == 0:
            gates: dict[int, np.ndarray] = {}
            for p in norm:
                gates.update(p[i].gates)
            out.append(LLayer(gates))
        else:
            out.append(MLayer(tuple(g for p in norm for g in p[i].gates)))
    return out

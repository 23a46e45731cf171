"""State-level degree certificates and channel-degree bounds.

Special entangled states (cat, nekomata, a long-range-correlated pair),
Hamming-weight concentration and basis-separation certificates that lower
bound the approximate degree of a state, a near-product purification
extractor, feasibility reports for synthesizing a target state with a
shallow circuit, and a degree certificate for the scaled Choi operator of
the keep-first-k channel of a circuit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .pauli_core import (ErrorLedger, PauliOperator, dense_limit,
                         expand_from_dense, trace_against_state)
from .circuit_ir import SIM_LIMIT, LLayer, QacCircuit, choi, remap_layers
from .lowdeg_approx import (LOG2E, ApproxCertificate, approx_product_state,
                            default_r, heisenberg_degree_bound, shape_ledger,
                            verify_certificate)

# Largest admissible fidelity gap for which a cat-distribution target is
# certified hard at the corresponding epsilon = 10 delta^{1/4}.
SYNTHESIS_DELTA_THRESHOLD = 1.0 / 10240000


# -- states ---------------------------------------------------------------------------

class QuantumState:
    """An n-qubit register state: a unit vector (pure) or a PSD unit-trace matrix."""

    def __init__(self, data):
        arr = np.asarray(data, dtype=complex)
        if arr.ndim == 1:
            self.n = _qubits_of(arr.shape[0])
            nrm = np.linalg.norm(arr)
            if nrm < 1e-12:
                raise ValueError("state vector is zero")
            if abs(nrm - 1.0) > 1e-6:
                raise ValueError(f"state vector norm is {nrm:.6g}, expected 1")
            self.vector = arr / nrm
            self.matrix = None
        elif arr.ndim == 2:
            if arr.shape[0] != arr.shape[1]:
                raise ValueError("density matrix must be square")
            self.n = _qubits_of(arr.shape[0])
            if np.abs(arr - arr.conj().T).max() > 1e-9:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(arr).real
            if abs(tr - 1.0) > 1e-6:
                raise ValueError(f"density trace is {tr:.6g}, expected 1")
            arr = (arr + arr.conj().T) / (2.0 * tr)
            if self.n <= dense_limit() and np.linalg.eigvalsh(arr).min() < -1e-9:
                raise ValueError("density matrix is not PSD")
            self.vector = None
            self.matrix = arr
        else:
            raise ValueError("expected a vector or a square matrix")

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.vector, self.vector.conj())
        return self.matrix

    def diagonal_probabilities(self) -> np.ndarray:
        if self.is_pure:
            return np.abs(self.vector) ** 2
        return np.real(np.diagonal(self.matrix)).clip(min=0.0)

    def to_json_obj(self) -> dict:
        if self.is_pure:
            amps = [[float(a.real), float(a.imag)] for a in self.vector]
            return {"kind": "pure", "n": self.n, "amplitudes": amps}
        rows = [[[float(e.real), float(e.imag)] for e in row] for row in self.matrix]
        return {"kind": "mixed", "n": self.n, "rows": rows}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "QuantumState":
        if obj["kind"] == "pure":
            return cls(np.array([complex(re, im) for re, im in obj["amplitudes"]]))
        return cls(np.array([[complex(re, im) for re, im in row] for row in obj["rows"]]))

    def __repr__(self) -> str:
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState(n={self.n}, {kind})"


def _qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def _as_state(x) -> QuantumState:
    return x if isinstance(x, QuantumState) else QuantumState(x)


def make_cat(n: int) -> QuantumState:
    """(|0..0> + |1..1>)/sqrt(2) on n qubits."""
    if not 1 <= n <= SIM_LIMIT:
        raise ValueError(f"need 1 <= n <= {SIM_LIMIT}")
    v = np.zeros(1 << n, dtype=complex)
    v[0] = v[-1] = 1.0 / math.sqrt(2.0)
    return QuantumState(v)


def make_nekomata(n: int, psi0, psi1) -> QuantumState:
    """(|0^n, psi0> + |1^n, psi1>)/sqrt(2); psi0, psi1 live on the trailing qubits."""
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    if psi0.shape != psi1.shape or psi0.ndim != 1:
        raise ValueError("side states must be vectors of equal dimension")
    a = _qubits_of(psi0.shape[0]) if psi0.shape[0] > 1 else 0
    if psi0.shape[0] == 1:
        raise ValueError("side states need at least one qubit")
    if not 1 <= n or n + a > SIM_LIMIT:
        raise ValueError(f"need n >= 1 and n + a <= {SIM_LIMIT}")
    psi0 = psi0 / np.linalg.norm(psi0)
    psi1 = psi1 / np.linalg.norm(psi1)
    v = np.zeros(1 << (n + a), dtype=complex)
    v[: 1 << a] = psi0 / math.sqrt(2.0)
    v[(1 << (n + a)) - (1 << a):] = psi1 / math.sqrt(2.0)
    return QuantumState(v)


# -- Hamming-weight machinery ---------------------------------------------------------

@dataclass
class WeightDistribution:
    """Distribution of the Hamming weight of a computational-basis measurement."""
    n: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.n + 1,):
            raise ValueError("need one probability per weight 0..n")
        if self.probs.min() < -1e-12 or abs(self.probs.sum() - 1.0) > 1e-9:
            raise ValueError("weight probabilities must be a distribution")

    def tail_above(self, m: int) -> float:
        """P[W > m]."""
        return float(self.probs[max(m + 1, 0):].sum())

    def tail_below(self, m: int) -> float:
        """P[W < m]."""
        return float(self.probs[: max(m, 0)].sum())

    def as_dict(self, tol: float = 1e-12) -> dict:
        return {k: float(p) for k, p in enumerate(self.probs) if p > tol}

    def to_json_obj(self) -> dict:
        return {"n": self.n, "probs": [float(p) for p in self.probs]}


def weight_distribution(state) -> WeightDistribution:
    state = _as_state(state)
    probs = state.diagonal_probabilities()
    weights = np.bitwise_count(np.arange(1 << state.n, dtype=np.uint64))
    return WeightDistribution(state.n, np.bincount(weights.astype(np.int64),
                                                   weights=probs,
                                                   minlength=state.n + 1))


def concentration_violation_degree_lb(state, epsilon: float) -> int:
    """Degree lower bound from a weight tail too heavy to concentrate.

    Any degree-k operator within `epsilon` of a pure state forces the weight
    of a basis measurement to put at most 4 epsilon^2 of mass farther than k
    beyond (or below) any integer carrying half the mass on its side.  The
    returned value is one more than the farthest k at which some such tail
    still exceeds 4 epsilon^2 - a certified lower bound on the approximate
    degree - and 0 when every tail is compatible.
    """
    state = _as_state(state)
    if not state.is_pure:
        raise ValueError("weight-concentration certificates need a pure state")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    dist = weight_distribution(state)
    n = state.n
    threshold = 4.0 * epsilon * epsilon
    cum = np.cumsum(dist.probs)
    best = -1
    for m in range(n + 1):
        at_most_m = cum[m]
        at_least_m = 1.0 - (cum[m - 1] if m > 0 else 0.0)
        if at_most_m >= 0.5 - 1e-12:
            for k in range(n - m, best, -1):
                if dist.tail_above(m + k) > threshold * (1 + 1e-12) + 1e-300:
                    best = k
                    break
        if at_least_m >= 0.5 - 1e-12:
            for k in range(m, best, -1):
                if dist.tail_below(m - k) > threshold * (1 + 1e-12) + 1e-300:
                    best = k
                    break
    return best + 1


def nekomata_reduction_degree_lb(n: int, psi0, psi1, epsilon: float) -> dict:
    """Degree lower bound for (|0^n,psi0> + |1^n,psi1>)/sqrt(2) via ancilla contraction.

    Tracing the ancillae against the normalized rank-one combination
    (|psi0>+|psi1>)(<psi0|+<psi1|) / (2(1+g)) maps the full state to
    ((1+g)/2) x cat density, g the phase-aligned overlap <psi0|psi1>.  The
    contraction never increases degree or spectral error, so a degree-l
    approximant of the full state within epsilon yields one of the cat state
    within epsilon/((1+g)/2); the cat certificate transfers back.  Aligning
    the phase of psi1 first only multiplies the state by a single-qubit
    diagonal unitary, which changes no degree.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    psi0 = psi0 / np.linalg.norm(psi0)
    psi1 = psi1 / np.linalg.norm(psi1)
    overlap = np.vdot(psi0, psi1)
    if abs(overlap) > 1e-14:
        psi1 = psi1 * (overlap.conjugate() / abs(overlap))
    gamma = abs(overlap)
    scale = (1.0 + gamma) / 2.0

    neko = make_nekomata(n, psi0, psi1)
    a = neko.n - n
    comb = psi0 + psi1
    contraction = np.outer(comb, comb.conj()) / (2.0 * (1.0 + gamma))

    full_op = expand_from_dense(neko.density())
    reduced = trace_against_state(full_op, expand_from_dense(contraction))
    residual = np.abs(reduced.to_dense() - scale * make_cat(n).density()).max()
    if residual > 1e-9:
        raise AssertionError(f"reduction identity failed: residual {residual:.3e}")

    eps_eff = epsilon / scale
    lb = concentration_violation_degree_lb(make_cat(n), eps_eff)
    return {"lower_bound": lb, "cat_qubits": n, "ancilla_qubits": a,
            "overlap": gamma, "scale": scale,
            "epsilon": epsilon, "epsilon_effective": eps_eff,
            "reduction_residual": float(residual)}


# -- basis-separation certificates ----------------------------------------------------

@dataclass
class SeparationCertificate:
    """Degree lower bound from mass on two Hamming-separated basis sets."""
    n: int
    delta: float
    distance: int
    lower_bound: int
    certified: bool
    value: float
    branch: str | None
    route: str | None
    branches: dict

    def to_json_obj(self) -> dict:
        return {"n": self.n, "delta": self.delta, "distance": self.distance,
                "lower_bound": self.lower_bound, "certified": self.certified,
                "value": self.value, "branch": self.branch, "route": self.route,
                "branches": self.branches}


def _as_indices(points: Iterable, n: int) -> np.ndarray:
    out = []
    for p in points:
        x = int(p, 2) if isinstance(p, str) else int(p)
        if not 0 <= x < (1 << n):
            raise ValueError(f"basis index {p!r} out of range for {n} qubits")
        out.append(x)
    if not out:
        raise ValueError("basis sets must be nonempty")
    return np.array(sorted(set(out)), dtype=np.uint64)


def _hadamard_all(vec: np.ndarray) -> np.ndarray:
    v = vec.astype(complex).copy()
    m = v.shape[0]
    h = 1
    while h < m:
        blocks = v.reshape(-1, 2 * h)
        a = blocks[:, :h].copy()
        b = blocks[:, h:].copy()
        blocks[:, :h] = a + b
        blocks[:, h:] = a - b
        h *= 2
    return v / math.sqrt(m)


def separation_degree_lb(state, b0: Iterable, b1: Iterable,
                         delta: float) -> SeparationCertificate:
    """Certify deg_delta(state) >= Hamming distance between two basis sets.

    A degree-k operator cannot connect basis strings more than k apart, so
    the corner block of the state between the two sets survives in any
    difference with a lower-degree approximant.  For pure states the corner
    norm is sqrt(w0 w1) exactly; the weaker product w1 sqrt(w0) (and its
    swap) is reported alongside.  Both the computational basis and the
    Hadamard-rotated one are evaluated - the rotation permutes Pauli letters
    and so preserves degree - and the strongest branch certifies.  Mixed
    states certify on the corner norm only.
    """
    state = _as_state(state)
    n = state.n
    i0 = _as_indices(b0, n)
    i1 = _as_indices(b1, n)
    if np.intersect1d(i0, i1).size:
        raise ValueError("basis sets must be disjoint")
    distance = int(np.bitwise_count(np.bitwise_xor.outer(i0, i1)).min())

    branches = {}
    best = (0.0, None, None)  # value, branch, route
    for branch in ("z", "x"):
        if branch == "z":
            rotated = state
        elif state.is_pure:
            rotated = QuantumState(_hadamard_all(state.vector))
        else:
            from scipy.linalg import hadamard
            h = hadamard(1 << n) / math.sqrt(1 << n)
            rotated = QuantumState(h @ state.matrix @ h)
        p = rotated.diagonal_probabilities()
        w0, w1 = float(p[i0].sum()), float(p[i1].sum())
        mass_value = max(w1 * math.sqrt(w0), w0 * math.sqrt(w1))
        if rotated.is_pure:
            corner = math.sqrt(w0 * w1)
        else:
            block = rotated.matrix[np.ix_(i0.astype(int), i1.astype(int))]
            corner = float(np.linalg.svd(block, compute_uv=False)[0]) if block.size else 0.0
        branches[branch] = {"w0": w0, "w1": w1, "mass_value": mass_value,
                            "corner_norm": corner}
        candidates = [(mass_value, "mass")] if rotated.is_pure else []
        candidates.append((corner, "corner"))
        for val, route in candidates:
            if val > best[0]:
                best = (val, branch, route)

    value, branch, route = best
    certified = value > delta
    return SeparationCertificate(
        n=n, delta=delta, distance=distance,
        lower_bound=distance if certified else 0,
        certified=certified, value=value,
        branch=branch if certified else None,
        route=route if certified else None,
        branches=branches)


# -- purification ----------------------------------------------------------------------

@dataclass
class PurificationReport:
    """Leading-Schmidt purification of a near-product bipartite pure state."""
    nu: QuantumState
    phi: QuantumState
    epsilon: float
    epsilon_measured: float
    distance: float
    bound: float
    leading_weight: float
    ok: bool

    def to_json_obj(self) -> dict:
        return {"nu": self.nu.to_json_obj(), "phi": self.phi.to_json_obj(),
                "epsilon": self.epsilon, "epsilon_measured": self.epsilon_measured,
                "distance": self.distance, "bound": self.bound,
                "leading_weight": self.leading_weight, "ok": self.ok}


def purify_near_product(psi, epsilon: float | None = None, phi=None,
                        n_front: int | None = None) -> PurificationReport:
    """Extract the ancilla factor of a state close to phi (x) (something pure).

    Splits psi on n+a qubits into front (n) and ancilla (a) registers, takes
    nu as the leading ancilla-side Schmidt vector, and checks the product
    phi (x) nu against psi: the spectral distance of the densities is at most
    5 sqrt(eps) whenever the front reduction of psi is eps-close to phi in
    spectral norm.  With no phi supplied, the leading eigenvector of the
    reduced density is used; with no epsilon supplied, the measured premise
    distance is used in the bound.
    """
    psi = _as_state(psi)
    if not psi.is_pure:
        raise ValueError("purification needs a pure joint state")
    if phi is not None:
        phi = _as_state(phi)
        if not phi.is_pure:
            raise ValueError("the front target must be pure")
        n_front = phi.n
    if n_front is None:
        raise ValueError("need n_front (or phi) to place the register split")
    if not 1 <= n_front < psi.n:
        raise ValueError("front register must be a proper nonempty prefix")
    a = psi.n - n_front

    mat = psi.vector.reshape(1 << n_front, 1 << a)
    reduced = mat @ mat.conj().T
    if phi is None:
        evals, vecs = np.linalg.eigh(reduced)
        phi = QuantumState(vecs[:, -1])
    eps_measured = float(np.abs(np.linalg.eigvalsh(
        np.outer(phi.vector, phi.vector.conj()) - reduced)).max())
    if epsilon is not None and eps_measured > epsilon + 1e-9:
        raise ValueError(f"premise violated: measured {eps_measured:.3g} > {epsilon:.3g}")
    eps = eps_measured if epsilon is None else float(epsilon)

    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    nu = QuantumState(vh[0, :])  # row of vh is the ancilla-side Schmidt vector
    product = np.kron(phi.vector, nu.vector)
    overlap = abs(np.vdot(product, psi.vector))
    distance = math.sqrt(max(0.0, 1.0 - overlap * overlap))
    bound = 5.0 * math.sqrt(eps)
    return PurificationReport(
        nu=nu, phi=phi, epsilon=eps, epsilon_measured=eps_measured,
        distance=distance, bound=bound, leading_weight=float(s[0] ** 2),
        ok=distance <= bound + 1e-12)


# -- synthesis feasibility --------------------------------------------------------------

def synthesis_requirement(target, n: int, a: int, d: int, delta: float,
                          r: float | None = None,
                          lower_bound: int | None = None) -> dict:
    """Compare what depth-d circuits can reach against a target's certified degree.

    Any circuit on n+a qubits preparing the target with fidelity 1-delta
    leaves the target within epsilon = 10 delta^{1/4} + (pipeline slack) of a
    low-degree operator: the all-zeros input state admits an approximant of
    degree about sqrt((n+a) r), conjugation through d layers grows it per the
    shape ledger, and discarding the ancillae costs nothing.  The pipeline
    slack recorded here is the exact composed ledger error of that chain.  If
    the target's certified degree lower bound at epsilon exceeds the ledger
    degree, synthesis at these parameters is impossible.
    """
    target = _as_state(target)
    if target.n != n:
        raise ValueError("target must live on n qubits")
    if a < 0 or d < 0 or not 0 <= delta <= 1:
        raise ValueError("need a >= 0, d >= 0, 0 <= delta <= 1")
    total = n + a
    if r is None:
        r = default_r(total)

    seed = approx_product_state(1, total, r)
    shape = shape_ledger(total, d, ell=max(1, seed.degree), r=r)
    layer_term = total * 2.0 ** (1.0 - r / 256.0) * LOG2E
    eps_pipeline = seed.epsilon
    for _ in range(d):
        eps_pipeline = (1.0 + eps_pipeline) * (1.0 + layer_term) ** 2 - 1.0
    eps_fidelity = 10.0 * delta ** 0.25
    eps_total = eps_fidelity + eps_pipeline

    source = "supplied"
    if lower_bound is None:
        lower_bound = concentration_violation_degree_lb(target, eps_total)
        source = "weight-concentration certificate"
    blocked = lower_bound > shape.degree
    return {"n": n, "a": a, "d": d, "delta": delta, "r": r,
            "epsilon_fidelity": eps_fidelity,
            "epsilon_pipeline": eps_pipeline,
            "epsilon": eps_total,
            "seed_degree": seed.degree, "seed_epsilon": seed.epsilon,
            "ledger_degree": shape.degree,
            "closed_form_degree": shape.closed_form,
            "per_layer_degrees": list(shape.per_layer),
            "lower_bound": int(lower_bound), "lower_bound_source": source,
            "delta_threshold": SYNTHESIS_DELTA_THRESHOLD,
            "delta_below_threshold": delta < SYNTHESIS_DELTA_THRESHOLD,
            "verdict": ("synthesis impossible at this (a, d, delta)" if blocked
                        else "no obstruction at this (a, d, delta)")}


# -- long-range correlation --------------------------------------------------------------

def longrange_states(n: int) -> tuple[QuantumState, QuantumState]:
    """The biased product state and its single-CZ image with long-range correlation.

    The first is (sqrt(1-1/n)|0> + sqrt(1/n)|1>)^(x n); the second applies the
    all-qubit CZ conjugated by X^(x n), which flips the sign of the all-zeros
    amplitude and nothing else.
    """
    if not 2 <= n <= SIM_LIMIT:
        raise ValueError(f"need 2 <= n <= {SIM_LIMIT}")
    one = np.array([math.sqrt(1.0 - 1.0 / n), math.sqrt(1.0 / n)], dtype=complex)
    v = one
    for _ in range(n - 1):
        v = np.kron(v, one)
    v0 = v
    v1 = v.copy()
    v1[0] = -v1[0]
    return QuantumState(v0), QuantumState(v1)


def _single_excitation_vector(m: int) -> np.ndarray:
    u = np.zeros(1 << m, dtype=complex)
    u[0] = 1.0 / math.sqrt(2.0)
    for i in range(m):
        u[1 << (m - 1 - i)] = 1.0 / math.sqrt(2.0 * m)
    return u


def _validate_supports(n: int, s: Sequence[int], t: Sequence[int]):
    s, t = tuple(sorted(set(map(int, s)))), tuple(sorted(set(map(int, t))))
    if not s or not t:
        raise ValueError("supports must be nonempty")
    if set(s) & set(t):
        raise ValueError("supports must be disjoint")
    if min(s + t) < 0 or max(s + t) >= n:
        raise ValueError("supports must index qubits 0..n-1")
    return s, t


def correlation(state, s: Sequence[int], t: Sequence[int]) -> float:
    """<P0_S P1_T> - <P0_S><P1_T> for the all-zeros projector on S and the
    half-zeros/half-single-excitation projector on T (disjoint supports)."""
    state = _as_state(state)
    n = state.n
    s, t = _validate_supports(n, s, t)
    if not state.is_pure:
        raise ValueError("correlation is implemented for pure states")
    vec = state.vector
    idx = np.arange(1 << n, dtype=np.uint64)
    s_bits = np.uint64(sum(1 << (n - 1 - q) for q in s))
    zero_mask = (idx & s_bits) == 0

    tens = vec.reshape([2] * n)
    perm = list(t) + [q for q in range(n) if q not in t]
    mat = np.transpose(tens, perm).reshape(1 << len(t), -1)
    u = _single_excitation_vector(len(t))
    coeff = u.conj() @ mat
    proj = np.outer(u, coeff).reshape([2] * n)
    proj = np.transpose(proj, np.argsort(perm)).reshape(-1)

    p0 = float((np.abs(vec) ** 2)[zero_mask].sum())
    p1 = float(np.vdot(vec, proj).real)
    joint = float(np.vdot(np.where(zero_mask, vec, 0.0), proj).real)
    return joint - p0 * p1


def longrange_minus_c1(n: int, s_size: int, t_size: int) -> float:
    """Closed form of the correlation of the sign-flipped state: 2 a0 a1
    sqrt(|T|/n) (1 - (1-1/n)^{|S|})."""
    a0 = (1.0 - 1.0 / n) ** (n / 2.0)
    a1 = math.sqrt(n * (1.0 - 1.0 / n) ** n / (n - 1.0))
    return 2.0 * a0 * a1 * math.sqrt(t_size / n) * (1.0 - (1.0 - 1.0 / n) ** s_size)


def longrange_report(n: int, s: Sequence[int], t: Sequence[int]) -> dict:
    """Dense correlations of the product/sign-flipped pair against the closed form."""
    s, t = _validate_supports(n, s, t)
    rho0, rho1 = longrange_states(n)
    c0 = correlation(rho0, s, t)
    c1 = correlation(rho1, s, t)
    closed = longrange_minus_c1(n, len(s), len(t))
    a0 = (1.0 - 1.0 / n) ** (n / 2.0)
    a1 = math.sqrt(n * (1.0 - 1.0 / n) ** n / (n - 1.0))
    return {"n": n, "s_size": len(s), "t_size": len(t),
            "c0": c0, "c1": c1, "minus_c1_closed_form": closed,
            "a0": a0, "a1": a1, "residual": abs(-c1 - closed)}


def correlation_scaling_table(ns: Iterable[int]) -> list[dict]:
    """Quarter-register supports |S| = |T| = n/4 across sizes, for trend reporting."""
    rows = []
    for n in ns:
        if n % 4:
            raise ValueError("sizes must be divisible by 4")
        q = n // 4
        rows.append(longrange_report(n, range(q), range(q, 2 * q)))
    return rows


# -- channel degree certificates ---------------------------------------------------------

def channel_degree_bound(circuit: QacCircuit, k: int,
                         psi=None, r: float | None = None) -> ApproxCertificate:
    """Degree certificate for the 2^{-k}-scaled Choi operator of the
    keep-first-k channel of the circuit.

    The scaled Choi operator equals the circuit's conjugate, acting on a copy
    register, conjugating a tensor product of k maximally entangled pairs -
    pair i spans output wire i and copy wire k+i - followed by contraction of
    the copy-side ancilla slots against the conjugated ancilla state.  Each
    stage is certified: the pair product via the product-state approximant,
    the conjugation via the layer chain, and the contraction for free.  At
    dense sizes the explicit form is built and verified against the directly
    computed Choi matrix.
    """
    n_in, a = circuit.n_inputs, circuit.n_ancillae
    if not 1 <= k <= n_in:
        raise ValueError("need 1 <= k <= circuit inputs")
    total = k + n_in + a
    if r is None:
        r = default_r(total)

    verify_against = circuit
    if a == 0:
        anc_conj = None
    elif psi is None:
        if circuit.ancilla_is_mixed:
            anc_conj = circuit.ancilla_state.conj()
        else:
            vbar = circuit.ancilla_vector().conj()
            anc_conj = np.outer(vbar, vbar.conj())
    else:
        psi = np.asarray(psi, dtype=complex)
        if psi.shape != (1 << a,):
            raise ValueError("ancilla state has wrong dimension")
        psi = psi / np.linalg.norm(psi)
        vbar = psi.conj()
        anc_conj = np.outer(vbar, vbar.conj())
        verify_against = QacCircuit(n_inputs=n_in, n_ancillae=a,
                                    layers=circuit.layers, ancilla_state=psi)

    pair = np.zeros(4, dtype=complex)
    pair[0] = pair[3] = 1.0 / math.sqrt(2.0)
    supports = [(i, k + i) for i in range(k)]
    build_form = total <= dense_limit()
    seed = approx_product_state(
        2, k, r, state=pair if build_form else None,
        block_supports=supports if build_form else None,
        n_total=total if build_form else None)

    shifted = remap_layers(circuit.layers, {i: k + i for i in range(n_in + a)})
    conj_layers = [LLayer({q: m.conj() for q, m in lay.gates.items()})
                   if isinstance(lay, LLayer) else lay for lay in shifted]
    doubled = QacCircuit(n_inputs=total, n_ancillae=0, layers=conj_layers)

    hcert = heisenberg_degree_bound(doubled, seed, r=r)
    form = hcert.form
    if anc_conj is not None and form is not None:
        form = trace_against_state(form, expand_from_dense(anc_conj))

    ledger = hcert.ledger
    if a:
        ledger = ErrorLedger(ledger.epsilon, ledger.provenance + (
            "ancilla contraction (degree and error preserved)",))
    cert = ApproxCertificate(
        target=f"choi_scaled(inputs={n_in}, outputs={k}, ancillae={a}, "
               f"depth={circuit.depth})",
        degree=hcert.degree, ledger=ledger,
        promised_degree=hcert.promised_degree,
        promised_error=hcert.promised_error,
        in_guarantee_range=hcert.in_guarantee_range,
        form=form,
        detail={"seed": seed, "r": r, "depth": circuit.depth,
                "heisenberg": hcert.detail,
                "register": f"[{k} outputs][{n_in} inputs][{a} ancillae]"})

    if build_form and k + n_in <= dense_limit():
        exact = choi(verify_against, k)
        scaled = exact.dense * (2.0 ** -k)
        cert.detail["choi_spectral_norm"] = exact.spectral_norm
        cert.detail["verification"] = verify_certificate(cert, scaled).to_json_obj()
    return cert


# -- code-distance threshold (formula evaluator only) -------------------------------------

def css_epsilon_threshold(n: int, k: int, m_x: int, m_z: int,
                          c1: float, c2: float,
                          delta0: float = SYNTHESIS_DELTA_THRESHOLD) -> dict:
    """Energy threshold below which separated-support certificates would apply
    to a CSS-code ground space with distance k and m_x/m_z checks per basis.

    Formula evaluator only: the code constants c1 and c2 are inputs because
    no concrete code pins them down, so nothing here is verified beyond
    arithmetic.
    """
    if min(n, k, m_x, m_z) < 1 or min(c1, c2) <= 0:
        raise ValueError("need positive sizes and constants")
    value = (1.0 / (400.0 * c1)) * (min(m_x, m_z) / n) * min(
        ((k - 1) / (4.0 * n)) ** 2, delta0, c2 / 2.0)
    return {"epsilon_threshold": value, "verifiable": False,
            "note": "depends on uninstantiated code constants c1, c2"}


# -- fidelity / distance helpers -----------------------------------------------------------

def fidelity(a, b) -> float:
    """Root fidelity ||sqrt(rho) sqrt(sigma)||_1 (1 for identical states)."""
    a, b = _as_state(a), _as_state(b)
    if a.n != b.n:
        raise ValueError("states must have the same size")
    if a.is_pure and b.is_pure:
        return float(abs(np.vdot(a.vector, b.vector)))
    if a.is_pure or b.is_pure:
        pure, other = (a, b) if a.is_pure else (b, a)
        return float(math.sqrt(max(0.0, np.vdot(
            pure.vector, other.density() @ pure.vector).real)))
    ea, va = np.linalg.eigh(a.density())
    root_a = (va * np.sqrt(ea.clip(min=0.0))) @ va.conj().T
    prod = root_a @ b.density() @ root_a
    return float(np.sqrt(np.linalg.eigvalsh(prod).clip(min=0.0)).sum())


def trace_distance(a, b) -> float:
    """Unnormalized trace distance ||rho - sigma||_1, in [0, 2]."""
    a, b = _as_state(a), _as_state(b)
    if a.n != b.n:
        raise ValueError("states must have the same size")
    return float(np.abs(np.linalg.eigvalsh(a.density() - b.density())).sum())

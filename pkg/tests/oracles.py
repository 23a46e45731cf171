"""Independent oracles for the test suites.

Everything here recomputes quantities by a route different from the library's
own (naive kron products, brute-force LPs, SDPs), so agreement is evidence
rather than tautology.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from pauli_lens.circuit_ir import LLayer, MLayer, QacCircuit


def haar_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(rng: np.random.Generator, n_inputs: int, n_ancillae: int,
                   depth: int, p_gate: float = 0.7,
                   min_arity: int = 2, max_arity: int | None = None) -> QacCircuit:
    n = n_inputs + n_ancillae
    max_arity = n if max_arity is None else min(max_arity, n)
    layers = []
    for _ in range(depth):
        layers.append(LLayer({q: haar_unitary(rng) for q in range(n)
                              if rng.random() < p_gate}))
        pool = list(rng.permutation(n))
        supports = []
        while len(pool) >= min_arity:
            hi = min(len(pool), max_arity)
            s = int(rng.integers(min_arity, hi + 1))
            supports.append(tuple(sorted(int(q) for q in pool[:s])))
            pool = pool[s:]
            if rng.random() < 0.5:
                break
        layers.append(MLayer(tuple(supports)))
    layers.append(LLayer({q: haar_unitary(rng) for q in range(n)
                          if rng.random() < p_gate}))
    return QacCircuit(n_inputs, n_ancillae, layers)


def dense_cz(support, n: int) -> np.ndarray:
    """CZ on `support` within n qubits, built from the all-ones projector."""
    diag = np.ones(1 << n, dtype=complex)
    mask = 0
    for q in support:
        mask |= 1 << (n - 1 - q)
    idx = np.arange(1 << n)
    diag[(idx & mask) == mask] = -1.0
    return np.diag(diag)


def naive_unitary(circuit: QacCircuit) -> np.ndarray:
    """Layer product via explicit kron chains (no tensor-axis tricks)."""
    n = circuit.n_total
    u = np.eye(1 << n, dtype=complex)
    for layer in circuit.layers:
        if isinstance(layer, LLayer):
            step = np.eye(1, dtype=complex)
            for q in range(n):
                step = np.kron(step, layer.gates.get(q, np.eye(2)))
        else:
            step = np.eye(1 << n, dtype=complex)
            for g in layer.gates:
                step = dense_cz(g, n) @ step
        u = step @ u
    return u


def brute_force_best_predictor(table: np.ndarray, n: int, k: int) -> float:
    """Max agreement E_x[f h + (1-f)(1-h)] over degree-<=k predictors h in [0,1].

    Solved exactly as an LP over the h(x) values with degree constraints
    imposed through the Fourier side: h_hat(S) free for |S| <= k, zero above.
    """
    from scipy.optimize import linprog

    masks = [s for s in range(1 << n) if s.bit_count() <= k]
    xs = np.arange(1 << n, dtype=np.uint64)
    chi = 1.0 - 2.0 * (np.bitwise_count(
        xs[:, None] & np.array(masks, dtype=np.uint64)[None, :]) & 1)
    # agreement = E[(2f-1) h] + E[1-f]; maximize E[(2f-1) h] over h(x) in [0,1]
    weights = (2.0 * table - 1.0) / (1 << n)
    c = -(weights @ chi)                      # minimize negative agreement part
    a_ub = np.vstack([chi, -chi])
    b_ub = np.concatenate([np.ones(1 << n), np.zeros(1 << n)])
    res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * len(masks), method="highs")
    assert res.status == 0, res.message
    return float(-res.fun + np.mean(1.0 - table))


def schmidt_leading(psi: np.ndarray, n_front: int, n_back: int):
    """Leading Schmidt pair across the front/back cut (psi = sum s_i u_i (x) w_i)."""
    m = psi.reshape(1 << n_front, 1 << n_back)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return s[0], u[:, 0], vh[0]


def best_low_degree_approx_error(target: np.ndarray, n: int, max_degree: int) -> float:
    """Exact min over Hermitian R with Pauli degree <= max_degree of ||target - R||.

    Convex program: the spectral norm epigraph is the PSD constraint
    [[tI, M], [M^dag, tI]] >> 0, and the degree cap keeps only low-weight
    Pauli coefficients as (real) variables.
    """
    import cvxpy as cp

    paulis = [np.eye(2, dtype=complex),
              np.array([[0, 1], [1, 0]], dtype=complex),
              np.array([[0, -1j], [1j, 0]], dtype=complex),
              np.array([[1, 0], [0, -1]], dtype=complex)]
    basis = []
    for letters in itertools.product(range(4), repeat=n):
        if sum(1 for w in letters if w) > max_degree:
            continue
        mat = np.eye(1, dtype=complex)
        for w in letters:
            mat = np.kron(mat, paulis[w])
        basis.append(mat.reshape(-1))
    stack = np.array(basis).T                       # (4^n, m)
    c = cp.Variable(len(basis))
    r = cp.reshape(stack @ c, (1 << n, 1 << n), order="C")
    m = target - r
    t = cp.Variable()
    eye = np.eye(1 << n)
    prob = cp.Problem(cp.Minimize(t),
                      [cp.bmat([[t * eye, m], [m.H, t * eye]]) >> 0])
    prob.solve()
    assert prob.status == "optimal", prob.status
    return float(t.value)


def channel_pair(u: np.ndarray, n: int, k: int, anc: np.ndarray | None = None):
    """(apply, adjoint_apply) for rho -> Tr_{[k]^c}[U (rho (x) anc) U^dag]."""
    d_in, d_k = 1 << n, 1 << k
    if anc is None:
        v = u
    else:
        v = u @ np.kron(np.eye(d_in), anc.reshape(-1, 1))   # isometry 2^n -> 2^{n+a}
    d_rest = v.shape[0] // d_k

    def apply(rho):
        big = v @ rho @ v.conj().T
        return np.trace(big.reshape(d_k, d_rest, d_k, d_rest), axis1=1, axis2=3)

    def adjoint(a_mat):
        return v.conj().T @ np.kron(a_mat, np.eye(d_rest)) @ v

    return apply, adjoint


def choi_of_map(apply_fn, d_in: int, d_out: int) -> np.ndarray:
    """J = sum_{ab} Phi(E_ab) (x) E_ab on (out (x) in)."""
    j = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for a in range(d_in):
        for b in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[a, b] = 1.0
            j += np.kron(apply_fn(e), e)
    return j


def diamond_norm(j: np.ndarray, d_in: int, d_out: int) -> float:
    """Completely bounded trace norm from the Choi matrix on (out (x) in).

    Semidefinite program: maximize Re<J, X> over X with
    [[1 (x) rho0, X], [X^dag, 1 (x) rho1]] >> 0 and rho0, rho1 densities.
    """
    import cvxpy as cp

    x = cp.Variable((d_out * d_in, d_out * d_in), complex=True)
    rho0 = cp.Variable((d_in, d_in), hermitian=True)
    rho1 = cp.Variable((d_in, d_in), hermitian=True)
    eye = np.eye(d_out)
    block = cp.bmat([[cp.kron(eye, rho0), x],
                     [x.H, cp.kron(eye, rho1)]])
    prob = cp.Problem(
        cp.Maximize(cp.real(cp.trace(j.conj().T @ x))),
        [block >> 0, rho0 >> 0, rho1 >> 0,
         cp.trace(rho0) == 1, cp.trace(rho1) == 1])
    prob.solve()
    assert prob.status == "optimal", prob.status
    return float(prob.value)


def cb_spectral_distance(apply_a, adjoint_a, apply_b, adjoint_b,
                         d_in: int, d_out: int) -> float:
    """||A - B|| in completely bounded spectral norm, via the adjoint's
    completely bounded trace norm (the two norms are dual)."""
    j = choi_of_map(lambda m: adjoint_a(m) - adjoint_b(m), d_out, d_in)
    return diamond_norm(j, d_in=d_out, d_out=d_in)

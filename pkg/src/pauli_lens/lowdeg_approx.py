"""Low-degree spectral approximation engine.

Everything here produces certificates: an integer Pauli degree plus an exact
spectral-error ledger for a constructed approximant, alongside the looser
closed-form bounds the construction is guaranteed to beat when its parameter
preconditions hold.  The building block is a Chebyshev polynomial of the
Hamming-weight operator that isolates the top weight level; CZ gates, product
states, CZ layers, and whole alternating-layer circuits are approximated by
substituting it gate by gate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .circuit_ir import LLayer, MLayer, QacCircuit, _apply_1q
from .pauli_core import (ErrorLedger, PauliOperator, compose_error, dense_limit,
                         diagonal_operator, expand_from_dense, spectral_norm)

LOG2E = math.log2(math.e)


def default_r(n: int) -> float:
    """Sharpness parameter making per-layer error ~ 1/n (so whole-circuit O(d/n))."""
    if n < 2:
        return 256.0
    return 256.0 * (1.0 + 2.0 * math.log2(n))


# -- weight polynomials ---------------------------------------------------------------

def _cheb_eval(rho: int, x):
    """T_rho(x) by the three-term recurrence (stable for |x| >= 1 too)."""
    x = np.asarray(x, dtype=float)
    if rho == 0:
        return np.ones_like(x)
    prev, cur = np.ones_like(x), x.copy()
    for _ in range(rho - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


@dataclass(frozen=True)
class WeightPolynomial:
    """Univariate q over the integer weight grid {0..n} with q(n) = 1.

    kind "chebyshev": q(x) = T_rho(m(x)) / T_rho(m(n)) with m affine sending
    [0, n-1] to [-1, 1]; its grid error is exactly 1/T_rho(m(n)).
    kind "top_interpolation": q vanishes on {0..n-1} (degree n, error 0).
    """
    n: int
    rho: int
    kind: str = "chebyshev"

    def __post_init__(self):
        if self.kind not in ("chebyshev", "top_interpolation"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "top_interpolation" and self.rho != self.n:
            raise ValueError("interpolation kind has degree exactly n")
        if not 1 <= self.rho <= self.n:
            raise ValueError("need 1 <= rho <= n")

    def _m(self, x):
        return (2.0 * np.asarray(x, dtype=float) - (self.n - 1)) / (self.n - 1)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "chebyshev":
            if self.n == 1:
                return x.copy()  # m degenerates; q(x) = x on {0, 1}
            return _cheb_eval(self.rho, self._m(x)) / _cheb_eval(self.rho, self._m(self.n))
        out = np.ones_like(x)
        for j in range(self.n):
            out *= (x - j) / (self.n - j)
        return out

    def grid_values(self) -> np.ndarray:
        return self.evaluate(np.arange(self.n + 1))

    @property
    def error(self) -> float:
        """max_{0 <= j <= n-1} |q(j)|, the spectral error of the induced projector."""
        return float(np.max(np.abs(self.grid_values()[:-1])))

    @property
    def promised_error(self) -> float:
        return 2.0 ** (-self.rho ** 2 / (256.0 * self.n))

    def eval_exact(self, j: int) -> Fraction:
        """Exact rational q(j) (regression anchors; n <= 64 stays cheap)."""
        if self.kind == "top_interpolation":
            out = Fraction(1)
            for i in range(self.n):
                out *= Fraction(j - i, self.n - i)
            return out
        if self.n == 1:
            return Fraction(j)

        def cheb_frac(x: Fraction) -> Fraction:
            prev, cur = Fraction(1), x
            if self.rho == 0:
                return prev
            for _ in range(self.rho - 1):
                prev, cur = cur, 2 * x * cur - prev
            return cur

        m = lambda t: Fraction(2 * t - (self.n - 1), self.n - 1)
        return cheb_frac(m(j)) / cheb_frac(m(self.n))

    @property
    def coeffs(self) -> np.ndarray:
        """Monomial coefficients of q (serialization; evaluation uses the recurrence)."""
        if self.kind == "top_interpolation":
            c = np.polynomial.polynomial.polyfromroots(np.arange(self.n))
            return c / math.prod(self.n - j for j in range(self.n))
        if self.n == 1:
            return np.array([0.0, 1.0])
        t = np.polynomial.chebyshev.Chebyshev(
            [0.0] * self.rho + [1.0], domain=[0, self.n - 1], window=[-1, 1])
        series = t.convert(kind=np.polynomial.Polynomial)
        return series.coef / _cheb_eval(self.rho, self._m(self.n))

    def to_json_obj(self) -> dict:
        return {"n": self.n, "rho": self.rho, "kind": self.kind,
                "error": self.error, "coeffs": list(map(float, self.coeffs))}


def chebyshev_top_projector(n: int, rho: int) -> WeightPolynomial:
    """Degree-rho polynomial with q(n) = 1 and |q| small on {0..n-1}."""
    if not 1 <= rho <= n:
        raise ValueError(f"need 1 <= rho <= n, got rho={rho}, n={n}")
    return WeightPolynomial(n, rho)


def _top_interpolator(n: int) -> WeightPolynomial:
    return WeightPolynomial(n, n, kind="top_interpolation")


# -- certificates ---------------------------------------------------------------------

@dataclass
class ApproxCertificate:
    """Degree + exact-error record for one constructed approximant."""
    target: str
    degree: int
    ledger: ErrorLedger
    promised_degree: float | None = None
    promised_error: float | None = None
    in_guarantee_range: bool = True
    form: PauliOperator | None = None
    detail: dict = field(default_factory=dict)

    @property
    def epsilon(self) -> float:
        return self.ledger.epsilon

    def to_json_obj(self) -> dict:
        def scrub(v):
            if isinstance(v, WeightPolynomial):
                return v.to_json_obj()
            if isinstance(v, ApproxCertificate):
                return v.to_json_obj()
            if isinstance(v, ErrorLedger):
                return v.to_json_obj()
            if isinstance(v, PauliOperator):
                return v.to_json_obj()
            if isinstance(v, (list, tuple)):
                return [scrub(x) for x in v]
            if isinstance(v, dict):
                return {str(k): scrub(x) for k, x in v.items()}
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        obj = {"target": self.target, "degree": self.degree,
               "epsilon": self.ledger.epsilon,
               "ledger": self.ledger.to_json_obj(),
               "promised_degree": self.promised_degree,
               "promised_error": self.promised_error,
               "in_guarantee_range": self.in_guarantee_range,
               "detail": scrub(self.detail)}
        if self.form is not None:
            obj["form"] = self.form.to_json_obj()
        return obj


# -- product states -------------------------------------------------------------------

def approx_product_state(block_size: int, count: int, r: float,
                         state: np.ndarray | None = None,
                         block_supports: Sequence[Sequence[int]] | None = None,
                         n_total: int | None = None) -> ApproxCertificate:
    """Low-degree approximation of an n-fold product of block projectors.

    The target is P^(ox count) where P is a rank-1 projector on block_size
    qubits; the approximant is q(H) for H the sum of the block projectors and
    q a top-weight polynomial on {0..count}.  Passing `state` (the block's
    vector, any norm) additionally builds the explicit operator; EPR blocks
    and |0> blocks are the two uses upstream.
    """
    if block_size < 1 or count < 1:
        raise ValueError("need block_size >= 1 and count >= 1")
    if r <= 0:
        raise ValueError("need r > 0")
    rho = int(math.floor(r))
    if rho >= count:
        q = _top_interpolator(count) if count > 1 else WeightPolynomial(1, 1)
    else:
        q = chebyshev_top_projector(count, max(1, rho))
    degree = block_size * q.rho
    eps = q.error
    in_range = math.sqrt(count) < r < count
    ledger = ErrorLedger(eps, (f"product_state(blocks={count}, block_size={block_size}, "
                               f"r={r:g}, rho={q.rho})",))
    cert = ApproxCertificate(
        target=f"rank1_projector_power(block_size={block_size}, count={count})",
        degree=degree, ledger=ledger,
        promised_degree=block_size * r,
        promised_error=2.0 ** (-r * r / (256.0 * count)),
        in_guarantee_range=in_range,
        detail={"polynomial": q, "r": r, "rho": q.rho})

    if state is not None:
        state = np.asarray(state, dtype=complex)
        if state.shape != (1 << block_size,):
            raise ValueError("block state has wrong dimension")
        nrm = np.linalg.norm(state)
        if nrm < 1e-12:
            raise ValueError("block state is zero")
        state = state / nrm
        if block_supports is None:
            block_supports = [tuple(range(i * block_size, (i + 1) * block_size))
                              for i in range(count)]
        if n_total is None:
            n_total = max(q for b in block_supports for q in b) + 1
        if n_total > dense_limit():
            raise ValueError(f"explicit form needs n_total <= {dense_limit()}")
        h = np.zeros((1 << n_total, 1 << n_total), dtype=complex)
        proj = np.outer(state, state.conj())
        for support in block_supports:
            h += _embed_dense(proj, support, n_total)
        evals, vecs = np.linalg.eigh(h)
        qh = (vecs * q.evaluate(evals.clip(0, count))) @ vecs.conj().T
        cert.form = expand_from_dense(qh)
        cert.detail["block_supports"] = [tuple(b) for b in block_supports]
    return cert


def _embed_dense(mat: np.ndarray, support: Sequence[int], n: int) -> np.ndarray:
    """Embed an operator on `support` (in listed order) into n qubits."""
    k = len(support)
    t = np.asarray(mat, dtype=complex).reshape([2] * (2 * k))
    full = t
    for _ in range(n - k):
        full = np.tensordot(full, np.eye(2).reshape(2, 2), axes=0)
    # axes: [sup_rows..., sup_cols..., id pairs...] -> order rows/cols by qubit
    row_axes = list(range(k)) + [2 * k + 2 * i for i in range(n - k)]
    col_axes = list(range(k, 2 * k)) + [2 * k + 2 * i + 1 for i in range(n - k)]
    qubits = list(support) + [q for q in range(n) if q not in support]
    perm_rows = [row_axes[qubits.index(q)] for q in range(n)]
    perm_cols = [col_axes[qubits.index(q)] for q in range(n)]
    full = np.transpose(full, perm_rows + perm_cols)
    return full.reshape(1 << n, 1 << n)


# -- CZ gates -------------------------------------------------------------------------

def approx_cz(n: int, r: float | None = None, rho: int | None = None) -> ApproxCertificate:
    """Certificate for CZ_n ~ 1 - 2 q(W): degree rho, exact error 2 max_{j<n}|q(j)|."""
    if n < 2:
        raise ValueError("CZ needs arity >= 2")
    if rho is None:
        if r is None or not 1 < r < n:
            raise ValueError(f"need 1 < r < n (got r={r}, n={n}); or pass rho directly")
        rho = math.ceil(math.sqrt(n * r))
    else:
        if not 1 <= rho <= n:
            raise ValueError("need 1 <= rho <= n")
        if r is None:
            r = rho * rho / n
    q = chebyshev_top_projector(n, min(rho, n))
    eps = 2.0 * q.error
    ledger = ErrorLedger(eps, (f"cz_gate(n={n}, r={r:g}, rho={q.rho})",))
    cert = ApproxCertificate(
        target=f"cz(n={n})", degree=q.rho, ledger=ledger,
        promised_degree=math.ceil(math.sqrt(n * r)),
        promised_error=2.0 ** (1.0 - r / 256.0),
        in_guarantee_range=math.sqrt(n) < r < n,
        detail={"polynomial": q, "r": r, "rho": q.rho})
    if n <= dense_limit():
        wt = np.bitwise_count(np.arange(1 << n))
        cert.form = diagonal_operator(1.0 - 2.0 * q.evaluate(wt))
    return cert


def _cz_diag(support: Sequence[int], n: int, poly: WeightPolynomial | None) -> np.ndarray:
    """Diagonal of the (approximate) CZ on `support` within n qubits."""
    mask = 0
    for q in support:
        mask |= 1 << (n - 1 - q)
    wt = np.bitwise_count(np.arange(1 << n) & mask)
    if poly is None:
        vals = np.where(wt == len(support), -1.0, 1.0)
    else:
        vals = 1.0 - 2.0 * poly.evaluate(wt)
    return vals.astype(complex)


# -- layers ---------------------------------------------------------------------------

def approx_layer(supports, n: int, ell: int, r: float) -> ApproxCertificate:
    """Certificate for conjugating a degree-ell observable by one CZ layer.

    Gates of arity <= t = n^{2/3} ell^{-2/3} r^{1/3} stay exact; wider gates
    are replaced by approx_cz.  When r >= t the whole layer stays exact (the
    construction's fallback branch).  The certificate's epsilon is the full
    conjugation error (1 + prod_i(1 + e_i) - 1)^2 - 1 and its degree is the
    exact bookkept value min(n, ell * t_small + 2 sum_i rho_i).
    """
    if isinstance(supports, MLayer):
        supports = supports.gates
    supports = [tuple(sorted(g)) for g in supports]
    if ell < 1:
        raise ValueError("need ell >= 1")
    if r <= 1:
        raise ValueError("need r > 1")
    seen: set[int] = set()
    for g in supports:
        if len(g) < 2:
            raise ValueError("CZ gates need arity >= 2")
        for q in g:
            if not 0 <= q < n or q in seen:
                raise ValueError("bad or overlapping gate support")
            seen.add(q)

    t = n ** (2.0 / 3.0) * ell ** (-2.0 / 3.0) * r ** (1.0 / 3.0)
    arities = [len(g) for g in supports]
    if r >= t:
        degree = min(n, ell * max(arities, default=1))
        ledger = ErrorLedger(0.0, (f"layer(n={n}, ell={ell}, r={r:g}): exact branch",))
        return ApproxCertificate(
            target=f"cz_layer(n={n}, gates={len(supports)})", degree=degree,
            ledger=ledger, promised_degree=3.0 * n ** (2 / 3) * ell ** (1 / 3) * r ** (1 / 3),
            promised_error=n * 2.0 ** (1.0 - r / 256.0) * LOG2E,
            in_guarantee_range=False,
            detail={"t": t, "branch": "exact", "r": r, "ell": ell,
                    "plan": [{"support": g, "approx": None} for g in supports],
                    "operator_error": 0.0})

    plan, gate_certs = [], []
    op_err = 0.0
    small_max = 1
    rho_sum = 0
    for g in supports:
        if len(g) <= t:
            plan.append({"support": g, "approx": None})
            small_max = max(small_max, len(g))
        else:
            cert = approx_cz(len(g), r)
            gate_certs.append(cert)
            plan.append({"support": g, "approx": cert.detail["polynomial"]})
            rho_sum += cert.degree
            op_err = compose_error(op_err, cert.epsilon)
    conj_err = (1.0 + op_err) ** 2 - 1.0
    degree = min(n, ell * small_max + 2 * rho_sum)
    ledger = ErrorLedger(conj_err, (f"layer(n={n}, ell={ell}, r={r:g}): "
                                    f"{len(gate_certs)} gates approximated",))
    in_range = (1 < r < n) and all(c.in_guarantee_range for c in gate_certs)
    return ApproxCertificate(
        target=f"cz_layer(n={n}, gates={len(supports)})", degree=degree, ledger=ledger,
        promised_degree=3.0 * n ** (2 / 3) * ell ** (1 / 3) * r ** (1 / 3),
        promised_error=n * 2.0 ** (1.0 - r / 256.0) * LOG2E,
        in_guarantee_range=in_range,
        detail={"t": t, "branch": "approx", "r": r, "ell": ell, "t_small": small_max,
                "plan": plan, "gate_certs": gate_certs, "operator_error": op_err})


# -- whole circuits -------------------------------------------------------------------

def degree_recursion(n: float, ell: float, r: float, d: int) -> float:
    """Raw per-layer recursion ell_i = 3 n^{2/3} ell_{i-1}^{1/3} r^{1/3} (no caps)."""
    cur = float(ell)
    for _ in range(d):
        cur = 3.0 * n ** (2.0 / 3.0) * cur ** (1.0 / 3.0) * r ** (1.0 / 3.0)
    return cur


def closed_form_degree(n: float, ell: float, r: float, d: int) -> float:
    """3^{(3/2)(1-3^{-d})} n^{1-3^{-d}} ell^{3^{-d}} r^{(1-3^{-d})/2}."""
    p = 3.0 ** (-d)
    return (3.0 ** (1.5 * (1.0 - p)) * n ** (1.0 - p) * ell ** p * r ** ((1.0 - p) / 2.0))


@dataclass
class ShapeLedger:
    """Circuit-shape-only degree/error ledger (no concrete gates needed)."""
    n: int
    d: int
    ell: int
    r: float
    degree: int
    epsilon: float
    closed_form: float
    promised_error: float
    per_layer: list
    r_in_range: bool

    def to_json_obj(self) -> dict:
        return {"n": self.n, "d": self.d, "ell": self.ell, "r": self.r,
                "degree": self.degree, "epsilon": self.epsilon,
                "closed_form_degree": self.closed_form,
                "promised_error": self.promised_error,
                "per_layer_degrees": list(self.per_layer),
                "r_in_range": self.r_in_range}


def shape_ledger(n: int, d: int, ell: int = 1, r: float | None = None) -> ShapeLedger:
    """Worst-case conjugation ledger over any d CZ layers on n qubits.

    Applies min(n, .) per layer (a conjugated observable never exceeds full
    degree) and one final ceiling; the error chains the per-layer bound
    n 2^{1-r/256} log2(e) exactly as (1+x)^d - 1.
    """
    if n < 1 or d < 0 or ell < 1:
        raise ValueError("need n >= 1, d >= 0, ell >= 1")
    if r is None:
        r = default_r(n)
    cur = float(min(ell, n))
    per_layer = []
    layer_err = n * 2.0 ** (1.0 - r / 256.0) * LOG2E
    eps = 0.0
    for _ in range(d):
        cur = min(float(n), 3.0 * n ** (2 / 3) * cur ** (1 / 3) * r ** (1 / 3))
        per_layer.append(cur)
        eps = compose_error(eps, layer_err)
    return ShapeLedger(n=n, d=d, ell=ell, r=r,
                       degree=int(math.ceil(cur)), epsilon=eps,
                       closed_form=closed_form_degree(n, ell, r, d),
                       promised_error=d * n * 2.0 ** (1.0 - r / 256.0) * LOG2E ** 2,
                       per_layer=per_layer,
                       r_in_range=math.sqrt(n) < r < n)


def _chain_layers(circuit: QacCircuit, ell0: int, eps0: float, r: float):
    """Heisenberg-order (last M layer first) per-layer certificates and totals."""
    n = circuit.n_total
    m_layers = [(i, l) for i, l in enumerate(circuit.layers) if isinstance(l, MLayer)]
    deg, eps = max(1, ell0), eps0
    layer_certs = []
    unitary_err = 0.0
    for idx, layer in reversed(m_layers):
        cert = approx_layer(layer.gates, n, deg, r)
        cert.detail["layer_index"] = idx
        layer_certs.append(cert)
        deg = cert.degree
        eps = compose_error(eps, cert.epsilon)
        unitary_err = compose_error(unitary_err, cert.detail["operator_error"])
    return deg, eps, layer_certs, unitary_err


def approx_circuit(circuit: QacCircuit, ell: int, r: float | None = None) -> ApproxCertificate:
    """Shape certificate for conjugating a degree-ell observable through a circuit.

    Chains approx_layer over the M layers in Heisenberg order; the epsilon is
    the exact product ledger, reported next to the closed-form degree and the
    d n 2^{1-r/256} log2^2(e) error bound.
    """
    n = circuit.n_total
    if r is None:
        r = default_r(n)
    if r <= 1:
        raise ValueError("need r > 1")
    d = circuit.depth
    deg, eps, layer_certs, unitary_err = _chain_layers(circuit, ell, 0.0, r)
    ledger = ErrorLedger(eps, (f"circuit(n={n}, d={d}, ell={ell}, r={r:g})",))
    return ApproxCertificate(
        target=f"heisenberg_conjugation(n={n}, d={d})",
        degree=deg, ledger=ledger,
        promised_degree=closed_form_degree(n, ell, r, d),
        promised_error=d * n * 2.0 ** (1.0 - r / 256.0) * LOG2E ** 2,
        in_guarantee_range=all(c.in_guarantee_range for c in layer_certs),
        detail={"r": r, "depth": d, "ell": ell, "layers": layer_certs,
                "unitary_error": unitary_err})


def approx_unitary_dense(circuit: QacCircuit, cert: ApproxCertificate) -> np.ndarray:
    """Dense circuit unitary with each M layer replaced per the certificate's plan."""
    n = circuit.n_total
    if n > dense_limit():
        raise ValueError(f"needs n <= {dense_limit()}")
    plans = {c.detail["layer_index"]: c for c in cert.detail["layers"]}
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for i, layer in enumerate(circuit.layers):
        if isinstance(layer, LLayer):
            for q, m in layer.gates.items():
                u = _apply_1q(u, m, q)
        else:
            diag = np.ones(dim, dtype=complex)
            for entry in plans[i].detail["plan"]:
                diag *= _cz_diag(entry["support"], n, entry["approx"])
            u = (diag[:, None] * u.reshape(dim, dim)).reshape([2] * n + [dim])
    return u.reshape(dim, dim)


def heisenberg_degree_bound(circuit: QacCircuit, a_cert: ApproxCertificate,
                            r: float | None = None) -> ApproxCertificate:
    """Certificate for the conjugated observable U^dag A U given A's certificate.

    Also covers the ancilla-contracted form: tracing the ancillae against any
    state never increases degree or the ledger, so the same certificate holds
    after post-selection.  When A's explicit form is available at dense size,
    the explicit approximant is built alongside.
    """
    n = circuit.n_total
    if r is None:
        r = default_r(n)
    deg, eps, layer_certs, unitary_err = _chain_layers(
        circuit, a_cert.degree, a_cert.ledger.epsilon, r)
    d = circuit.depth
    promised_err = (1.0 + a_cert.ledger.epsilon) * (
        1.0 + d * n * 2.0 ** (1.0 - r / 256.0) * LOG2E ** 2) - 1.0
    tail = max(0.0, (1.0 + eps) / (1.0 + a_cert.ledger.epsilon) - 1.0)
    ledger = a_cert.ledger.compose(
        ErrorLedger(tail, (f"conjugation(n={n}, d={d}, r={r:g})",)),
        note=f"heisenberg chain over {d} layers")
    cert = ApproxCertificate(
        target=f"heisenberg(n={n}, d={d}, seed_degree={a_cert.degree})",
        degree=deg, ledger=ledger,
        promised_degree=closed_form_degree(n, a_cert.degree, r, d),
        promised_error=promised_err,
        in_guarantee_range=all(c.in_guarantee_range for c in layer_certs),
        detail={"r": r, "depth": d, "seed": a_cert, "layers": layer_certs,
                "unitary_error": unitary_err,
                "post_selection": "ancilla contraction preserves degree and ledger"})

    if a_cert.form is not None and n <= dense_limit():
        if a_cert.form.n != n:
            raise ValueError("observable form must act on all circuit qubits")
        plans = {c.detail["layer_index"]: c for c in layer_certs}
        cur = a_cert.form.to_dense()
        for i in range(len(circuit.layers) - 1, -1, -1):
            layer = circuit.layers[i]
            if isinstance(layer, LLayer):
                for q, m in layer.gates.items():
                    cur = _apply_1q(cur.reshape([2] * (2 * n)), m.conj().T, q)
                    cur = _apply_1q(cur, m.T, n + q).reshape(1 << n, 1 << n)
            else:
                diag = np.ones(1 << n, dtype=complex)
                for entry in plans[i].detail["plan"]:
                    diag *= _cz_diag(entry["support"], n, entry["approx"])
                cur = diag.conj()[:, None] * cur * diag[None, :]
        cert.form = expand_from_dense(cur)
    return cert


# -- verification ---------------------------------------------------------------------

@dataclass
class VerificationReport:
    measured_distance: float
    measured_degree: int
    distance_ok: bool
    degree_ok: bool

    @property
    def passed(self) -> bool:
        return self.distance_ok and self.degree_ok

    def to_json_obj(self) -> dict:
        return {"measured_distance": self.measured_distance,
                "measured_degree": self.measured_degree,
                "distance_ok": self.distance_ok, "degree_ok": self.degree_ok,
                "passed": self.passed}


def verify_certificate(cert: ApproxCertificate,
                       exact: PauliOperator | np.ndarray) -> VerificationReport:
    """Measure the explicit approximant against the exact object."""
    if cert.form is None:
        raise ValueError("certificate carries no explicit form at this size")
    if isinstance(exact, np.ndarray):
        exact = expand_from_dense(exact)
    dist = spectral_norm(exact.sub(cert.form))
    deg = cert.form.degree
    return VerificationReport(
        measured_distance=float(dist), measured_degree=deg,
        distance_ok=dist <= cert.ledger.epsilon + 1e-9,
        degree_ok=deg <= cert.degree)

"""Pauli-basis operator algebra with exact degree and error bookkeeping.

Operators on n qubits are stored as sparse maps from Pauli strings to complex
coefficients in the normalized basis <M, N> = Tr[M^dag N] / 2^n, so that
Parseval reads sum |coeff|^2 = Tr[A^dag A] / 2^n.  A Pauli string is a pair of
bit masks (x, z): bit (n-1-i) of a mask belongs to qubit i, which makes masks
line up with dense computational-basis indices (qubit 0 is the most
significant bit, matching tensor order).
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

ZERO_TOL = 1e-12       # coefficients below this are dropped
EIG_TOL = 1e-9         # dense eigensolver tolerance
_DENSE_LIMIT_DEFAULT = 12
_DIAG_LIMIT = 22       # 2^n value grid for general diagonal operators

_AXES = "IXYZ"
# axis code -> (x bit, z bit); Y = iXZ
_AXIS_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_limit() -> int:
    """Qubit cap for dense-matrix routes; override via PAULI_LENS_DENSE_LIMIT."""
    try:
        return int(os.environ["PAULI_LENS_DENSE_LIMIT"])
    except (KeyError, ValueError):
        return _DENSE_LIMIT_DEFAULT


def _check_dense(n: int) -> None:
    if n > dense_limit():
        raise ValueError(
            f"dense route needs n <= {dense_limit()} qubits, got {n} "
            "(set PAULI_LENS_DENSE_LIMIT to raise the cap)")


@dataclass(frozen=True)
class PauliString:
    """One tensor product of I/X/Y/Z factors, encoded as (x, z) bit masks."""
    n: int
    x: int
    z: int

    @classmethod
    def from_symbols(cls, symbols: str) -> "PauliString":
        n = len(symbols)
        x = z = 0
        for i, s in enumerate(symbols):
            if s not in _AXIS_BITS:
                raise ValueError(f"bad Pauli symbol {s!r}")
            bx, bz = _AXIS_BITS[s]
            bit = 1 << (n - 1 - i)
            x |= bx * bit
            z |= bz * bit
        return cls(n, x, z)

    @property
    def symbols(self) -> str:
        out = []
        for i in range(self.n):
            bit = 1 << (self.n - 1 - i)
            bx, bz = bool(self.x & bit), bool(self.z & bit)
            out.append("IXZY"[bx + 2 * bz] if not (bx and bz) else "Y")
        return "".join(out)

    @property
    def weight(self) -> int:
        return int(bin(self.x | self.z).count("1"))

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    @property
    def phase(self) -> complex:
        """Global phase i^|x&z| making X^x Z^z into the Hermitian string."""
        return 1j ** (bin(self.x & self.z).count("1") % 4)

    def to_dense(self) -> np.ndarray:
        _check_dense(self.n)
        dim = 1 << self.n
        cols = np.arange(dim)
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & self.z) & 1)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[cols ^ self.x, cols] = self.phase * signs
        return mat


class PauliOperator:
    """Sparse Pauli expansion; treat instances as immutable after construction."""

    def __init__(self, n: int, terms: dict[tuple[int, int], complex],
                 tol: float = ZERO_TOL):
        if n < 1:
            raise ValueError("need n >= 1")
        mask = (1 << n) - 1
        clean: dict[tuple[int, int], complex] = {}
        for (x, z), c in terms.items():
            if x & ~mask or z & ~mask:
                raise ValueError("mask exceeds qubit count")
            c = complex(c)
            if abs(c) > tol:
                clean[(x, z)] = c
        self.n = n
        self.terms = clean

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_symbol_map(cls, mapping: dict[str, complex]) -> "PauliOperator":
        n = len(next(iter(mapping)))
        terms = {}
        for sym, c in mapping.items():
            p = PauliString.from_symbols(sym)
            if p.n != n:
                raise ValueError("inconsistent string lengths")
            terms[(p.x, p.z)] = terms.get((p.x, p.z), 0) + c
        return cls(n, terms)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, {(0, 0): 1.0})

    # -- bookkeeping ----------------------------------------------------------

    def coeff(self, symbols: str) -> complex:
        p = PauliString.from_symbols(symbols)
        return self.terms.get((p.x, p.z), 0j)

    def strings(self):
        for (x, z), c in self.terms.items():
            yield PauliString(self.n, x, z), c

    @property
    def degree(self) -> int:
        """Largest weight of a contributing string (0 for scalars)."""
        if not self.terms:
            return 0
        return max(bin(x | z).count("1") for (x, z) in self.terms)

    def weight_at_level(self, k: int) -> float:
        """Squared-coefficient mass at exactly weight k."""
        return float(sum(abs(c) ** 2 for (x, z), c in self.terms.items()
                         if bin(x | z).count("1") == k))

    def weight_above(self, k: int) -> float:
        """Squared-coefficient mass strictly above weight k."""
        return float(sum(abs(c) ** 2 for (x, z), c in self.terms.items()
                         if bin(x | z).count("1") > k))

    @property
    def frobenius_sq(self) -> float:
        """Normalized Frobenius mass Tr[A^dag A] / 2^n = sum |coeff|^2."""
        return float(sum(abs(c) ** 2 for c in self.terms.values()))

    @property
    def trace(self) -> complex:
        return self.terms.get((0, 0), 0j) * (1 << self.n)

    @property
    def is_hermitian(self) -> bool:
        return all(abs(c.imag) <= ZERO_TOL for c in self.terms.values())

    @property
    def is_diagonal(self) -> bool:
        return all(x == 0 for (x, z) in self.terms)

    # -- algebra --------------------------------------------------------------

    def scaled(self, s: complex) -> "PauliOperator":
        return PauliOperator(self.n, {k: s * c for k, c in self.terms.items()})

    def add(self, other: "PauliOperator", sign: float = 1.0) -> "PauliOperator":
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + sign * c
        return PauliOperator(self.n, terms)

    def sub(self, other: "PauliOperator") -> "PauliOperator":
        return self.add(other, sign=-1.0)

    def diagonal_part(self) -> "PauliOperator":
        """Keep only I/Z strings; never increases degree or distances."""
        return PauliOperator(self.n, {(x, z): c for (x, z), c in self.terms.items()
                                      if x == 0})

    # -- dense interop ----------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        _check_dense(self.n)
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        cols = np.arange(dim)
        for (x, z), c in self.terms.items():
            signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
            phase = 1j ** (bin(x & z).count("1") % 4)
            out[cols ^ x, cols] += (c * phase) * signs
        return out

    def diagonal_values(self) -> np.ndarray:
        """Exact 2^n diagonal values of an I/Z-only operator."""
        if not self.is_diagonal:
            raise ValueError("operator has off-diagonal strings")
        if self.n > _DIAG_LIMIT:
            raise ValueError(f"diagonal grid needs n <= {_DIAG_LIMIT}")
        arr = np.zeros(1 << self.n, dtype=complex)
        for (x, z), c in self.terms.items():
            arr[z] += c
        return _fwht(arr)

    # -- serialization ----------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {"n": self.n,
                "terms": [{"pauli": PauliString(self.n, x, z).symbols,
                           "re": float(c.real), "im": float(c.imag)}
                          for (x, z), c in sorted(self.terms.items())]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PauliOperator":
        n = int(obj["n"])
        terms: dict[tuple[int, int], complex] = {}
        for t in obj["terms"]:
            p = PauliString.from_symbols(t["pauli"])
            if p.n != n:
                raise ValueError("term length mismatch")
            terms[(p.x, p.z)] = terms.get((p.x, p.z), 0) + complex(t["re"], t.get("im", 0.0))
        return cls(n, terms)

    @classmethod
    def from_json(cls, text: str) -> "PauliOperator":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self) -> str:
        return f"PauliOperator(n={self.n}, terms={len(self.terms)}, degree={self.degree})"


def _fwht(a: np.ndarray) -> np.ndarray:
    """In-place-style fast transform: out[i] = sum_z a[z] (-1)^{|i & z|}."""
    a = a.copy()
    h = 1
    while h < len(a):
        a = a.reshape(-1, 2 * h)
        x, y = a[:, :h].copy(), a[:, h:].copy()
        a[:, :h], a[:, h:] = x + y, x - y
        a = a.reshape(-1)
        h *= 2
    return a


def diagonal_operator(values: np.ndarray, tol: float = ZERO_TOL) -> PauliOperator:
    """I/Z-only operator with the given 2^n diagonal (inverse of diagonal_values)."""
    values = np.asarray(values, dtype=complex)
    n = int(round(math.log2(len(values))))
    if 1 << n != len(values):
        raise ValueError("diagonal length is not a power of two")
    coeffs = _fwht(values) / (1 << n)
    return PauliOperator(n, {(0, z): c for z, c in enumerate(coeffs) if abs(c) > tol})


# 4x2x2 tensor: row p gives conj(sigma_p)/2, so contracting both indices of a
# 2x2 block yields the four normalized coefficients at once.
_EXPAND_KERNEL = np.stack([PAULI_1Q[s].conj() / 2 for s in _AXES])


def expand_from_dense(mat: np.ndarray, tol: float = ZERO_TOL) -> PauliOperator:
    """Pauli expansion of a dense matrix: coeff(sigma) = Tr[sigma^dag A] / 2^n."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("need a square matrix")
    dim = mat.shape[0]
    n = int(round(math.log2(dim)))
    if 1 << n != dim:
        raise ValueError("dimension is not a power of two")
    _check_dense(n)

    t = mat.reshape([2] * (2 * n))
    for step in range(n):
        # axes: [4]*step + rows(n-step) + cols(n-step); qubit `step` sits at
        # row position `step` and col position `n`.
        t = np.tensordot(_EXPAND_KERNEL, np.moveaxis(t, (step, n), (0, 1)),
                         axes=([1, 2], [0, 1]))
        t = np.moveaxis(t, 0, step)
    flat = t.reshape(-1)
    idx = np.flatnonzero(np.abs(flat) > tol)
    coeffs = flat[idx]

    # base-4 digit d of qubit i sits at bit pair (2p+1, 2p), p = n-1-i;
    # digit -> axis: 0=I, 1=X, 2=Y, 3=Z; x bit = lo ^ hi, z bit = hi.
    x_masks = np.zeros_like(idx)
    z_masks = np.zeros_like(idx)
    for p in range(n):
        lo = (idx >> (2 * p)) & 1
        hi = (idx >> (2 * p + 1)) & 1
        x_masks |= (lo ^ hi) << p
        z_masks |= hi << p
    terms = {(int(x), int(z)): complex(c)
             for x, z, c in zip(x_masks, z_masks, coeffs)}
    return PauliOperator(n, terms, tol=tol)


def to_dense(op: PauliOperator) -> np.ndarray:
    return op.to_dense()


def degree(op: PauliOperator) -> int:
    return op.degree


def weight_at_level(op: PauliOperator, k: int) -> float:
    return op.weight_at_level(k)


# -- spectral norm ------------------------------------------------------------

def _symmetric_diag_profile(op: PauliOperator):
    """If op is diagonal and permutation-symmetric, return per-weight coeffs."""
    if not op.is_diagonal:
        return None
    by_w: dict[int, list[complex]] = {}
    for (x, z), c in op.terms.items():
        by_w.setdefault(bin(z).count("1"), []).append(c)
    prof = {}
    for w, cs in by_w.items():
        if max(abs(c - cs[0]) for c in cs) > 1e-11:
            return None
        if len(cs) != math.comb(op.n, w):
            return None
        prof[w] = cs[0]
    return prof


def _krawtchouk_row(n: int, j: int, weights) -> dict[int, int]:
    """K_w(j; n) = sum_i (-1)^i C(j,i) C(n-j, w-i) for each requested w."""
    out = {}
    for w in weights:
        out[w] = sum((-1) ** i * math.comb(j, i) * math.comb(n - j, w - i)
                     for i in range(0, min(j, w) + 1))
    return out


def symmetric_diagonal_values(op: PauliOperator) -> np.ndarray | None:
    """For a permutation-symmetric diagonal operator, its n+1 eigenvalues."""
    prof = _symmetric_diag_profile(op)
    if prof is None:
        return None
    n = op.n
    vals = np.zeros(n + 1, dtype=complex)
    for j in range(n + 1):
        kraw = _krawtchouk_row(n, j, prof.keys())
        vals[j] = sum(c * kraw[w] for w, c in prof.items())
    return vals


def spectral_norm(op: PauliOperator | np.ndarray) -> float:
    """Largest singular value; exact structured routes before the dense one.

    Diagonal operators use their value grid (2^n points, or n+1 points when
    permutation-symmetric, at any n); everything else goes through a dense
    Hermitian-dilation eigensolve under the qubit cap.
    """
    if isinstance(op, np.ndarray):
        return _dense_spectral_norm(op)
    if not op.terms:
        return 0.0
    if op.is_diagonal:
        sym = symmetric_diagonal_values(op)
        if sym is not None:
            return float(np.max(np.abs(sym)))
        if op.n <= _DIAG_LIMIT:
            return float(np.max(np.abs(op.diagonal_values())))
    _check_dense(op.n)
    return _dense_spectral_norm(op.to_dense())


def _dense_spectral_norm(mat: np.ndarray) -> float:
    mat = np.asarray(mat, dtype=complex)
    herm = np.allclose(mat, mat.conj().T, atol=EIG_TOL)
    if herm:
        return float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    dim = mat.shape[0]
    dil = np.zeros((2 * dim, 2 * dim), dtype=complex)
    dil[:dim, dim:] = mat
    dil[dim:, :dim] = mat.conj().T
    return float(np.max(np.abs(np.linalg.eigvalsh(dil))))


# -- error ledger -------------------------------------------------------------

def compose_error(eps0: float, eps1: float) -> float:
    """Spectral error of a product of approximations: (1+e0)(1+e1) - 1."""
    if eps0 < 0 or eps1 < 0:
        raise ValueError("error bounds must be nonnegative")
    return (1.0 + eps0) * (1.0 + eps1) - 1.0


@dataclass(frozen=True)
class ErrorLedger:
    """A certified spectral error with the trail of steps that produced it."""
    epsilon: float
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("error bounds must be nonnegative")

    def compose(self, other: "ErrorLedger | float", note: str = "") -> "ErrorLedger":
        if isinstance(other, ErrorLedger):
            eps, prov = other.epsilon, other.provenance
        else:
            eps, prov = float(other), ()
        new_eps = compose_error(self.epsilon, eps)
        step = note or f"compose({self.epsilon:.3g}, {eps:.3g})"
        return ErrorLedger(new_eps, self.provenance + prov + (step,))

    def widen(self, eps: float, note: str) -> "ErrorLedger":
        """Additive triangle-inequality step."""
        if eps < 0:
            raise ValueError("error bounds must be nonnegative")
        return ErrorLedger(self.epsilon + eps, self.provenance + (note,))

    def to_json_obj(self) -> dict:
        return {"epsilon": self.epsilon, "provenance": list(self.provenance)}


# -- partial contraction ------------------------------------------------------

def _validate_state(state: PauliOperator) -> None:
    tr = state.trace
    if abs(tr - 1.0) > 1e-9:
        raise ValueError(f"state trace is {tr}, expected 1")
    if state.n <= dense_limit():
        evals = np.linalg.eigvalsh(state.to_dense())
        if evals.min() < -1e-10:
            raise ValueError(f"state has negative eigenvalue {evals.min():.3e}")


def trace_against_state(op: PauliOperator, state: PauliOperator,
                        validate: bool = True) -> PauliOperator:
    """Contract the last k qubits against a density operator.

    M -> Tr_{last k}[(1 ox state) M]; coefficients combine as
    coeff'(s1) = sum_{s2} coeff(s1 s2) * Tr[state * s2], which never increases
    the degree or the spectral norm.
    """
    k = state.n
    if k >= op.n:
        raise ValueError("state must act on fewer qubits than the operator")
    if validate:
        _validate_state(state)
    low = (1 << k) - 1
    scale = 1 << k
    out: dict[tuple[int, int], complex] = {}
    for (x, z), c in op.terms.items():
        x2, z2 = x & low, z & low
        sc = state.terms.get((x2, z2))
        if sc is None:
            continue
        key = (x >> k, z >> k)
        # state coefficients of Hermitian states are real; Tr[phi s2] = coeff * 2^k
        out[key] = out.get(key, 0) + c * sc * scale
    return PauliOperator(op.n - k, out) if out else PauliOperator(op.n - k, {})

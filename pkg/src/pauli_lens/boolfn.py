"""Boolean functions on the hypercube: Fourier analysis, an exact
approximate-degree oracle (LP feasibility with binary search), and the
hardness-requirement evaluators that compare exact degrees against the
circuit-shape ledgers from lowdeg_approx.

Tables are 0/1 for decision functions, or [0,1] acceptance probabilities.
Input bit i of x sits at table-index bit (n-1-i), matching the dense basis
ordering used everywhere else in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .lowdeg_approx import ShapeLedger, shape_ledger
from .pauli_core import PauliOperator, _fwht

GENERAL_ROUTE_LIMIT = 12
SYMMETRIC_ROUTE_LIMIT = 64
_FEAS_TOL = 1e-9      # accept when optimum <= eps + this
_INFEAS_MARGIN = 1e-7  # declare infeasible only beyond this margin


class DegreeOracleError(RuntimeError):
    """LP optimum landed inside the ambiguity margin; answer would be unsafe."""


class BooleanFunction:
    """Real-valued function on {0,1}^n with its exact Fourier expansion."""

    def __init__(self, n: int, table):
        if n < 1:
            raise ValueError("need n >= 1")
        table = np.asarray(table, dtype=float)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have 2^{n} entries")
        if table.min() < -1e-9 or table.max() > 1 + 1e-9:
            raise ValueError("table values must lie in [0, 1]")
        self.n = n
        self.table = table
        self.fourier = _fwht(table.astype(complex)).real / (1 << n)

    @property
    def is_decision(self) -> bool:
        return bool(np.all(np.minimum(np.abs(self.table),
                                      np.abs(self.table - 1.0)) < 1e-12))

    def pm_fourier(self) -> np.ndarray:
        """Coefficients of g = 2f - 1."""
        out = 2.0 * self.fourier
        out[0] -= 1.0
        return out

    def _level_masses(self, form: str) -> np.ndarray:
        if form == "zero_one":
            coeffs = self.fourier
        elif form == "pm_one":
            coeffs = self.pm_fourier()
        else:
            raise ValueError(f"unknown form {form!r}")
        sizes = np.bitwise_count(np.arange(1 << self.n))
        return np.bincount(sizes, weights=coeffs ** 2, minlength=self.n + 1)

    def level_weight(self, k: int, form: str = "zero_one") -> float:
        return float(self._level_masses(form)[k])

    def weight_above(self, k: int, form: str = "zero_one") -> float:
        if not 0 <= k <= self.n:
            raise ValueError("k out of range")
        return float(self._level_masses(form)[k + 1:].sum())

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        w = np.bitwise_count(np.arange(1 << self.n))
        for j in range(self.n + 1):
            vals = self.table[w == j]
            if vals.max() - vals.min() > tol:
                return False
        return True

    def weight_class_values(self) -> np.ndarray:
        """Value on each weight class (symmetric functions only)."""
        if not self.is_symmetric():
            raise ValueError("function is not symmetric")
        w = np.bitwise_count(np.arange(1 << self.n))
        return np.array([self.table[w == j][0] for j in range(self.n + 1)])

    def to_json_obj(self) -> dict:
        return {"n": self.n, "table": [float(v) for v in self.table]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BooleanFunction":
        return cls(int(obj["n"]), obj["table"])

    def __repr__(self) -> str:
        return f"BooleanFunction(n={self.n}, decision={self.is_decision})"


def make_named(name: str, n: int, k: int | None = None) -> BooleanFunction:
    """PARITY, MAJ (odd n), or MOD_k (1 iff weight % k != 0)."""
    if n < 1:
        raise ValueError("need n >= 1")
    w = np.bitwise_count(np.arange(1 << n))
    name = name.upper()
    if name == "PARITY":
        table = (w % 2).astype(float)
    elif name == "MAJ":
        if n % 2 == 0:
            raise ValueError("MAJ needs odd n")
        table = (w >= n / 2).astype(float)
    elif name == "MOD":
        if k is None or not 2 <= k <= n:
            raise ValueError("MOD needs modulus k with 2 <= k <= n")
        table = (w % k != 0).astype(float)
    else:
        raise ValueError(f"unknown function {name!r}")
    return BooleanFunction(n, table)


# -- approximate degree -----------------------------------------------------------------

@dataclass
class DegreeQuery:
    """Answer of the approximate-degree oracle, with its achieving witness."""
    epsilon: float
    degree: int
    witness: dict
    witness_error: float
    route: str
    optimum_at_degree: float
    infeasible_optimum_below: float | None = None

    def to_json_obj(self) -> dict:
        wit = dict(self.witness)
        if "coeffs" in wit:
            wit["coeffs"] = [float(c) for c in wit["coeffs"]]
        if "masks" in wit:
            wit["masks"] = [int(m) for m in wit["masks"]]
        return {"epsilon": self.epsilon, "degree": self.degree,
                "witness": wit, "witness_error": self.witness_error,
                "route": self.route, "optimum_at_degree": self.optimum_at_degree,
                "infeasible_optimum_below": self.infeasible_optimum_below}


def _best_general(f: BooleanFunction, d: int):
    """min over degree-<=d multilinear g of max_x |f(x) - g(x)|, plus witness."""
    n = f.n
    masks = np.array([s for s in range(1 << n) if s.bit_count() <= d], dtype=np.uint64)
    xs = np.arange(1 << n, dtype=np.uint64)
    chi = 1.0 - 2.0 * (np.bitwise_count(xs[:, None] & masks[None, :]) & 1)
    ones = np.ones((len(xs), 1))
    a_ub = np.block([[chi, -ones], [-chi, -ones]])
    b_ub = np.concatenate([f.table, -f.table])
    c = np.zeros(len(masks) + 1)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * len(masks) + [(0, None)], method="highs")
    if res.status != 0:
        raise DegreeOracleError(f"LP solver failed at degree {d}: {res.message}")
    coeffs = res.x[:-1]
    vals = chi @ coeffs
    achieved = float(np.max(np.abs(f.table - vals)))
    return float(res.fun), {"form": "fourier", "masks": masks.tolist(),
                            "coeffs": coeffs.tolist()}, achieved


def _best_symmetric(f: BooleanFunction, d: int, weight_values: np.ndarray):
    """Univariate route: optimize a degree-d polynomial of the Hamming weight."""
    n = f.n
    pts = 2.0 * np.arange(n + 1) / n - 1.0
    vander = np.polynomial.chebyshev.chebvander(pts, d)
    ones = np.ones((n + 1, 1))
    a_ub = np.block([[vander, -ones], [-vander, -ones]])
    b_ub = np.concatenate([weight_values, -weight_values])
    c = np.zeros(d + 2)
    c[-1] = 1.0
    res = linprog(c, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(None, None)] * (d + 1) + [(0, None)], method="highs")
    if res.status != 0:
        raise DegreeOracleError(f"LP solver failed at degree {d}: {res.message}")
    coeffs = res.x[:-1]
    vals = vander @ coeffs
    achieved = float(np.max(np.abs(weight_values - vals)))
    return float(res.fun), {"form": "univariate_chebyshev", "n": n,
                            "coeffs": coeffs.tolist()}, achieved


def approx_degree(f: BooleanFunction, epsilon: float, route: str = "auto") -> DegreeQuery:
    """Smallest d such that some degree-d polynomial is within epsilon of f
    everywhere, decided by LP feasibility with a binary search over d.

    Feasibility at each d is certified by re-evaluating the witness; claimed
    infeasibility requires the LP optimum to clear epsilon by at least 1e-7,
    otherwise a DegreeOracleError is raised rather than guessing.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("need 0 <= epsilon < 1")
    if route == "auto":
        route = "symmetric" if f.is_symmetric() else "general"
    if route == "symmetric":
        if f.n > SYMMETRIC_ROUTE_LIMIT:
            raise ValueError(f"symmetric route capped at n = {SYMMETRIC_ROUTE_LIMIT}")
        weight_values = f.weight_class_values()
        solve = lambda d: _best_symmetric(f, d, weight_values)
    elif route == "general":
        if f.n > GENERAL_ROUTE_LIMIT:
            raise ValueError(f"general route capped at n = {GENERAL_ROUTE_LIMIT}")
        solve = lambda d: _best_general(f, d)
    else:
        raise ValueError(f"unknown route {route!r}")

    cache: dict[int, tuple] = {}

    def solve_full() -> tuple:
        # degree n interpolates exactly; no LP needed
        if route == "symmetric":
            pts = 2.0 * np.arange(f.n + 1) / f.n - 1.0
            coef = np.polynomial.chebyshev.chebfit(pts, weight_values, f.n)
            achieved = float(np.max(np.abs(
                weight_values - np.polynomial.chebyshev.chebval(pts, coef))))
            return 0.0, {"form": "univariate_chebyshev", "n": f.n,
                         "coeffs": coef.tolist()}, achieved
        achieved = float(np.max(np.abs(f.table - _fwht(f.fourier.astype(complex)).real)))
        return 0.0, {"form": "fourier", "masks": list(range(1 << f.n)),
                     "coeffs": f.fourier.tolist()}, achieved

    def feasible(d: int) -> bool:
        if d not in cache:
            cache[d] = solve_full() if d == f.n else solve(d)
        opt, _, achieved = cache[d]
        if opt <= epsilon + _FEAS_TOL:
            if achieved > epsilon + _INFEAS_MARGIN:
                raise DegreeOracleError(
                    f"witness re-evaluation ({achieved}) contradicts optimum ({opt})")
            return True
        if opt > epsilon + _INFEAS_MARGIN:
            return False
        raise DegreeOracleError(
            f"LP optimum {opt} within the ambiguity margin of epsilon={epsilon}")

    lo, hi = 0, f.n
    if feasible(0):
        hi = 0
    else:
        # invariant: lo infeasible, hi feasible (degree n always interpolates)
        if not feasible(f.n):
            raise DegreeOracleError("interpolation at full degree reported infeasible")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid
    opt, witness, achieved = cache[hi]
    below = cache[hi - 1][0] if hi - 1 in cache else None
    return DegreeQuery(epsilon=epsilon, degree=hi, witness=witness,
                       witness_error=achieved, route=route,
                       optimum_at_degree=opt, infeasible_optimum_below=below)


def witness_values(query: DegreeQuery, n: int) -> np.ndarray:
    """Re-evaluate the witness polynomial on all 2^n inputs (or weight classes)."""
    wit = query.witness
    if wit["form"] == "fourier":
        masks = np.array(wit["masks"], dtype=np.uint64)
        coeffs = np.array(wit["coeffs"])
        xs = np.arange(1 << n, dtype=np.uint64)
        chi = 1.0 - 2.0 * (np.bitwise_count(xs[:, None] & masks[None, :]) & 1)
        return chi @ coeffs
    pts = 2.0 * np.bitwise_count(np.arange(1 << n)) / n - 1.0
    return np.polynomial.chebyshev.chebval(pts, np.array(wit["coeffs"]))


def embed_as_operator(f: BooleanFunction) -> PauliOperator:
    """Diagonal operator sum_x f(x)|x><x|; Fourier coefficients become I/Z
    coefficients on the same masks, so degrees transfer verbatim."""
    terms = {(0, s): complex(c) for s, c in enumerate(f.fourier) if abs(c) > 1e-14}
    return PauliOperator(f.n, terms)


# -- hardness evaluators ------------------------------------------------------------------

@dataclass
class HardnessReport:
    kind: str
    params: dict
    ledger: ShapeLedger
    verdict: str
    exact: DegreeQuery | None = None
    eps_total: float | None = None
    value: float | None = None
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        obj = {"kind": self.kind, "params": self.params,
               "ledger": self.ledger.to_json_obj(), "verdict": self.verdict,
               "eps_total": self.eps_total, "value": self.value,
               "notes": list(self.notes)}
        if self.exact is not None:
            obj["exact_degree"] = self.exact.to_json_obj()
        if self.extra:
            obj["extra"] = {k: (v.to_json_obj() if hasattr(v, "to_json_obj") else v)
                            for k, v in self.extra.items()}
        return obj


def worst_case_requirement(f: BooleanFunction, n: int, a: int, d: int,
                           delta: float, r: float | None = None) -> HardnessReport:
    """Can any depth-d circuit with a ancillae compute f within worst-case
    error delta?  Compares the exact deg_{delta+slack}(f) against the shape
    ledger's conjugated-observable degree; "incompatible" rules the shape out.
    """
    if f.n != n:
        raise ValueError("function arity must match the input count")
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    ledger = shape_ledger(n + a, d, ell=1, r=r)
    eps_total = delta + ledger.epsilon
    notes = []
    query_eps = eps_total
    if query_eps >= 1.0:
        query_eps = 1.0 - 1e-9
        notes.append("slack reached 1; degree queried just below")
    exact = approx_degree(f, query_eps)
    at_delta = approx_degree(f, min(delta, 1.0 - 1e-9))
    if exact.degree > ledger.degree:
        verdict = "incompatible"
    elif delta >= 0.5:
        verdict = "vacuous"
        notes.append("delta >= 1/2: a coin flip meets the error budget")
    else:
        verdict = "compatible"
    return HardnessReport(kind="worst_case", verdict=verdict,
                          params={"n": n, "a": a, "d": d, "delta": delta},
                          ledger=ledger, exact=exact, eps_total=eps_total, notes=notes,
                          extra={"exact_at_delta": at_delta})


def average_case_bound(f: BooleanFunction, k: int, epsilon: float) -> float:
    """Upper bound 1/2 + (1/2) sqrt(1 - 4 W^{>k}[f]) + epsilon (capped at 1)
    on the agreement of any degree-<=k predictor with f under uniform inputs."""
    if not 0 <= k <= f.n:
        raise ValueError("k out of range")
    w = f.weight_above(k, form="zero_one")
    val = 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - 4.0 * w)) + epsilon
    return min(1.0, val)


def average_case_report(f: BooleanFunction, k: int, epsilon: float) -> dict:
    """The bound plus both weight conventions (tail of f, and of g = 2f - 1)."""
    w_f = f.weight_above(k, form="zero_one")
    w_g = f.weight_above(k, form="pm_one")
    val = average_case_bound(f, k, epsilon)
    return {"bound": val, "epsilon": epsilon, "k": k,
            "weight_above_zero_one": w_f, "weight_above_pm_one": w_g,
            "pm_chain_value": min(1.0, 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - w_g))
                                  + epsilon),
            "capped": val >= 1.0}


def postprocessing_degree_bound(n: int, a: int, d: int, ell: int, delta: float,
                                r: float | None = None,
                                mod_k: int = 3) -> HardnessReport:
    """Shape ledger for a degree-ell post-processed output observable, with
    incompatibility verdicts for the named symmetric families at this n."""
    if ell < 1:
        raise ValueError("need ell >= 1")
    ledger = shape_ledger(n + a, d, ell=ell, r=r)
    eps_total = delta + ledger.epsilon
    notes = []
    verdicts = {}
    query_eps = min(eps_total, 1.0 - 1e-9)
    candidates = {"PARITY": make_named("PARITY", n)}
    if n % 2 == 1:
        candidates["MAJ"] = make_named("MAJ", n)
    if 2 <= mod_k <= n:
        candidates[f"MOD_{mod_k}"] = make_named("MOD", n, k=mod_k)
    for name, fn in candidates.items():
        q = approx_degree(fn, query_eps, route="symmetric")
        verdicts[name] = {"exact_degree": q.degree,
                          "separated": q.degree > ledger.degree}
    overall = "incompatible" if any(v["separated"] for v in verdicts.values()) \
        else "compatible"
    return HardnessReport(kind="postprocessing", verdict=overall,
                          params={"n": n, "a": a, "d": d, "ell": ell, "delta": delta},
                          ledger=ledger, eps_total=eps_total, notes=notes,
                          extra={"verdicts": verdicts})


def agnostic_runtime(d: int, n: int, ell: int = 1, r: float | None = None) -> dict:
    """Degree ledger for depth-d shapes and the induced learning-runtime
    exponent: low-degree regression over parities up to the ledger degree runs
    in time 2^{O(degree * log2 n)}.  No learner is executed."""
    ledger = shape_ledger(n, d, ell=ell, r=r)
    log2n = math.log2(n) if n > 1 else 1.0
    return {"ledger": ledger.to_json_obj(),
            "degree": ledger.degree,
            "closed_form_degree": ledger.closed_form,
            "runtime_exponent_bits": ledger.degree * log2n,
            "runtime": f"2^O({ledger.degree} * log2({n})) = 2^O({ledger.degree * log2n:.1f})",
            "seed_degree_exponent": 3.0 ** (-d),
            "degree_exponent": 1.0 - 3.0 ** (-d)}

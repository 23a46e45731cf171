"""Composition plans that boost small parity circuits into larger ones.

A parity circuit is summarized by a CircuitSpec (depth, input size, ancilla
count, success margin delta, meaning worst-case success (1 + delta)/2).
Composing one top circuit with n_t parallel bottom copies plus a measurement
layer computes the combined parity with margin delta_b^{n_t} * delta_t, and the
planners chain that rule along a left spine:

  * step1_plan raises the input size n to n^c inside the ancilla budget n^{2c};
  * step2_plan runs the size-doubling ladder that pushes the ancilla exponent
    down to 1 + 2^{1-k};
  * full_plan glues the two, landing on depth K*D with D = 3c(d+1).

Every plan step records both the raw composed spec and the stated (relaxed)
bound it is filed under, and the audit re-checks the bookkeeping in exact
integer arithmetic.  build_composed_circuit realizes the composition on
concrete circuits so the success-probability formula can be checked by
exhaustive simulation.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit_ir import (NAMED_GATES, SIM_LIMIT, LLayer, MLayer, QacCircuit,
                         normalize_layers, output_probability, parallel_layers,
                         remap_layers, rotation_gate)


class AuditError(RuntimeError):
    """A plan step's bookkeeping disagrees with its stated bound."""


# -- margins -----------------------------------------------------------------------

@dataclass(frozen=True)
class Margin:
    """Success margin delta in [0, 1], kept in log space against underflow.

    When the margin is an exact power of a single base (every single-source
    plan), base/exponent hold that form so audits can compare exponents as
    integers; margins mixing several bases keep only log2.
    """
    base: float | None = None
    exponent: int | None = None
    log2_direct: float | None = None

    def __post_init__(self):
        if (self.base is None) != (self.exponent is None):
            raise ValueError("base and exponent come together")
        if self.base is None and self.log2_direct is None:
            raise ValueError("margin needs either a base form or a log2 value")
        if self.base is not None and not 0.0 <= self.base <= 1.0:
            raise ValueError("margin base must lie in [0, 1]")

    @staticmethod
    def of(delta: float) -> "Margin":
        return Margin(base=float(delta), exponent=1)

    @property
    def log2(self) -> float:
        if self.base is None:
            return self.log2_direct
        if self.base == 0.0:
            return 0.0 if self.exponent == 0 else -math.inf
        return self.exponent * math.log2(self.base)

    @property
    def value(self) -> float:
        return 2.0 ** self.log2

    def power(self, k: int) -> "Margin":
        if self.base is not None:
            return Margin(base=self.base, exponent=self.exponent * k)
        return Margin(log2_direct=self.log2_direct * k)

    def times(self, other: "Margin") -> "Margin":
        if self.log2 == 0.0:
            return other
        if other.log2 == 0.0:
            return self
        if self.base is not None and self.base == other.base:
            return Margin(base=self.base, exponent=self.exponent + other.exponent)
        return Margin(log2_direct=self.log2 + other.log2)

    def to_json_obj(self) -> dict:
        return {"base": self.base, "exponent": self.exponent, "log2": self.log2}


def default_negligible_margin(size: int) -> float:
    """1 - size^{-log2 size}: the default stand-in for a margin negligibly
    below one."""
    return 1.0 - 2.0 ** (-math.log2(size) ** 2)


# -- specs -------------------------------------------------------------------------

@dataclass(frozen=True)
class CircuitSpec:
    """Bookkeeping quadruple: depth, input size, ancilla count, margin.

    margin None means the margin is tracked only qualitatively (negligibly
    below one) rather than as a number.
    """
    depth: int
    inputs: int
    ancillae: int
    margin: Margin | None = None

    def __post_init__(self):
        if self.depth < 1 or self.inputs < 1 or self.ancillae < 0:
            raise ValueError("need depth >= 1, inputs >= 1, ancillae >= 0")

    @property
    def delta(self) -> float | None:
        return None if self.margin is None else self.margin.value

    @property
    def success_probability(self) -> float | None:
        d = self.delta
        return None if d is None else (1.0 + d) / 2.0

    def header(self) -> str:
        s = f"C(depth={self.depth}, inputs={self.inputs}, ancillae={self.ancillae})"
        if self.margin is not None and self.margin.base is not None:
            s += f" margin {self.margin.base:g}^{self.margin.exponent}"
        elif self.margin is not None:
            s += f" margin 2^{self.margin.log2:.3g}"
        return s

    def to_json_obj(self) -> dict:
        return {"depth": self.depth, "inputs": self.inputs,
                "ancillae": self.ancillae,
                "margin": None if self.margin is None else self.margin.to_json_obj()}


def compose_specs(top: CircuitSpec, bottom: CircuitSpec) -> CircuitSpec:
    """One composition step: n_t bottom copies feed one top copy through a
    measurement layer.  Margins multiply as delta_b^{n_t} * delta_t."""
    margin = None
    if top.margin is not None and bottom.margin is not None:
        margin = bottom.margin.power(top.inputs).times(top.margin)
    return CircuitSpec(depth=top.depth + bottom.depth + 1,
                       inputs=top.inputs * bottom.inputs,
                       ancillae=top.inputs * (bottom.ancillae + 1) + top.ancillae,
                       margin=margin)


# -- plans -------------------------------------------------------------------------

@dataclass
class PlanStep:
    index: int
    rule: str
    top: CircuitSpec
    bottom: CircuitSpec
    raw: CircuitSpec
    stated: CircuitSpec
    audit: dict
    note: str = ""

    def to_json_obj(self) -> dict:
        return {"index": self.index, "rule": self.rule,
                "top": self.top.to_json_obj(), "bottom": self.bottom.to_json_obj(),
                "raw": self.raw.to_json_obj(), "stated": self.stated.to_json_obj(),
                "audit": self.audit, "note": self.note}


@dataclass
class BoostPlan:
    kind: str
    params: dict
    steps: list[PlanStep]
    final: CircuitSpec
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    children: list["BoostPlan"] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {"kind": self.kind, "params": self.params,
                "steps": [s.to_json_obj() for s in self.steps],
                "final": self.final.to_json_obj(),
                "notes": self.notes, "extra": self.extra,
                "children": [c.to_json_obj() for c in self.children]}


def _audit_step(raw: CircuitSpec, stated: CircuitSpec) -> dict:
    """Exact-integer check that the raw composed spec fits its stated bound
    (equality on inputs; <= on depth/ancillae; margin exponent <= when both
    margins share a base, since a larger exponent means a smaller margin)."""
    audit = {
        "depth": {"raw": raw.depth, "stated": stated.depth,
                  "ok": raw.depth <= stated.depth},
        "inputs": {"raw": raw.inputs, "stated": stated.inputs,
                   "ok": raw.inputs == stated.inputs},
        "ancillae": {"raw": raw.ancillae, "stated": stated.ancillae,
                     "ok": raw.ancillae <= stated.ancillae},
    }
    if (raw.margin is not None and stated.margin is not None
            and raw.margin.base is not None
            and raw.margin.base == stated.margin.base):
        audit["margin_exponent"] = {"raw": raw.margin.exponent,
                                    "stated": stated.margin.exponent,
                                    "ok": raw.margin.exponent <= stated.margin.exponent}
    bad = {k: v for k, v in audit.items() if not v["ok"]}
    if bad:
        raise AuditError(f"stated bound violated: {bad}")
    return audit


def step1_plan(d: int, n: int, c: int, delta: float) -> BoostPlan:
    """Left-spine plan raising the input size n to n^c within ancilla budget
    n^{2c}.

    The base circuit is depth d on n inputs with n^c ancillae and margin
    delta.  Step i files the composed circuit under the stated bound
    (i(d+1), n^i, n^{i+c}) with margin delta^{i n^{c-1}}; the audit checks the
    raw numbers fit (the ancilla slack 3 n^{i-1+c} <= n^{i+c} needs n >= 3).
    """
    if n < 3:
        raise ValueError("need n >= 3 for the ancilla slack")
    if c < 1 or d < 1:
        raise ValueError("need integers c >= 1 and d >= 1")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    base = CircuitSpec(d, n, n ** c, Margin.of(delta))
    params = {"d": d, "n": n, "c": c, "delta": delta}
    if c == 1:
        return BoostPlan(kind="power_compose", params=params, steps=[],
                         final=base, notes=["c = 1: the base circuit itself"],
                         extra={"levels": [{"level": 1, "instances": 1,
                                            "spec": base.to_json_obj()}]})
    steps: list[PlanStep] = []
    stated_prev = base
    exact_prev = base
    for i in range(2, c + 1):
        raw = compose_specs(stated_prev, base)
        stated = CircuitSpec(i * (d + 1), n ** i, n ** (i + c),
                             Margin(base=delta, exponent=i * n ** (c - 1)))
        steps.append(PlanStep(index=i - 1, rule="compose", top=stated_prev,
                              bottom=base, raw=raw, stated=stated,
                              audit=_audit_step(raw, stated)))
        stated_prev = stated
        exact_prev = compose_specs(exact_prev, base)
    levels = [{"level": j, "instances": n ** (j - 1), "spec": base.to_json_obj()}
              for j in range(1, c + 1)]
    # the unrelaxed chain: depth cd + c - 1, (n^c - 1)/(n - 1) instances total
    extra = {"levels": levels,
             "exact_chain": exact_prev.to_json_obj(),
             "total_instances": (n ** c - 1) // (n - 1)}
    return BoostPlan(kind="power_compose", params=params, steps=steps,
                     final=stated_prev, extra=extra)


def step2_plan(d: int, n: int, k: int,
               margins: list[Margin] | None = None) -> BoostPlan:
    """Doubling-ladder plan computing parity on n^{2^k - 1} bits from a family
    of circuits of shape (depth d, inputs n^{2^i}, ancillae n^{2^{i+1}}),
    i = 0..k-1.

    Needs k >= 2.  Every tree level holds exactly n^{2^k} ancillae (instances
    times per-instance count), and the final total is 2k n^{2^k}; when
    n >= 4k^2 that is at most inputs^{1 + 2^{1-k}}, reported through the
    exponent_simplified flag (the plan is still emitted below the threshold).
    """
    if k < 2:
        raise ValueError("need k >= 2")
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    if margins is not None and len(margins) != k:
        raise ValueError("need one margin per ladder level")
    ladder = [CircuitSpec(d, n ** (2 ** i), n ** (2 ** (i + 1)),
                          None if margins is None else margins[i])
              for i in range(k)]
    steps: list[PlanStep] = []
    stated_prev = ladder[0]
    for i in range(2, k + 1):
        top = ladder[i - 1]
        raw = compose_specs(top, stated_prev)
        stated = CircuitSpec(i * (d + 1), n ** (2 ** i - 1), 2 * i * n ** (2 ** i),
                             raw.margin)
        steps.append(PlanStep(index=i - 1, rule="compose", top=top,
                              bottom=stated_prev, raw=raw, stated=stated,
                              audit=_audit_step(raw, stated)))
        stated_prev = stated
    top_anc = n ** (2 ** k)
    per_level = []
    for j in range(1, k + 1):
        inst = n ** (2 ** k - 2 ** (k - j + 1))
        each = n ** (2 ** (k - j + 1))
        per_level.append({"level": j, "instances": inst, "ancillae_each": each,
                          "ok": inst * each == top_anc})
    if not all(lv["ok"] for lv in per_level):
        raise AuditError("per-level ancilla product is off")
    simplified = n >= 4 * k * k
    anc_exponent = 2 ** k + math.log(2 * k, n)   # 2k n^{2^k} = n^{this}
    exponent_ratio = anc_exponent / (2 ** k - 1)
    exponent_bound = 1.0 + 2.0 ** (-k + 1)
    extra = {"per_level": per_level,
             "exponent_simplified": simplified,
             "ancilla_exponent": anc_exponent,
             "exponent_ratio": exponent_ratio,
             "exponent_bound": exponent_bound,
             "exponent_ok": (not simplified) or exponent_ratio <= exponent_bound + 1e-12,
             "levels": [{"level": j,
                         "instances": per_level[j - 1]["instances"],
                         "spec": ladder[k - j].to_json_obj()}
                        for j in range(1, k + 1)]}
    notes = [] if simplified else \
        [f"n = {n} is below 4k^2 = {4 * k * k}: ancilla exponent not simplified"]
    return BoostPlan(kind="doubling_ladder",
                     params={"d": d, "n": n, "k": k}, steps=steps,
                     final=stated_prev, notes=notes, extra=extra)


def full_plan(d: int, c: int, K: int, N0: int, ceiling: int | None = None,
              delta_fn=None) -> BoostPlan:
    """Glue plan: square-budget composition at each size m^{2^i} feeds the
    doubling ladder with k = K + 1, landing on inputs n = m^{(2^{K+1}-1) c}
    with ancillae 2(K+1)(m^c)^{2^{K+1}} and construction depth
    (K+1)(c(d+1)+1) <= K*D for D = 3c(d+1).

    m is the smallest integer with m >= max(N0, 3) and m^c >= 4K^2; a ceiling
    bounds the admissible n and raises if none fits.  delta_fn maps a base
    size to its margin (default: negligibly below one).
    """
    if d < 1 or c < 1 or K < 1 or N0 < 1:
        raise ValueError("need d, c, K, N0 >= 1")
    if delta_fn is None:
        delta_fn = default_negligible_margin
    m = max(N0, 3)
    while m ** c < 4 * K * K:
        m += 1
    n = m ** ((2 ** (K + 1) - 1) * c)
    if ceiling is not None and n > ceiling:
        raise ValueError(f"no admissible input size at or below {ceiling} "
                         f"(smallest is {n})")
    children: list[BoostPlan] = []
    margins: list[Margin] = []
    for i in range(K + 1):
        base_n = m ** (2 ** i)
        sub = step1_plan(d, base_n, c, delta_fn(base_n))
        children.append(sub)
        margins.append(sub.final.margin)
    ladder = step2_plan(c * (d + 1), m ** c, K + 1, margins=margins)
    children.append(ladder)
    ladder_ok = all(
        children[i].final.depth == ladder.extra["levels"][K - i]["spec"]["depth"]
        and children[i].final.inputs == ladder.extra["levels"][K - i]["spec"]["inputs"]
        and children[i].final.ancillae == ladder.extra["levels"][K - i]["spec"]["ancillae"]
        for i in range(K + 1))
    if not ladder_ok:
        raise AuditError("squared-budget outputs do not match the ladder shapes")
    D = 3 * c * (d + 1)
    depth_exact = (K + 1) * (c * (d + 1) + 1)
    depth_ok = depth_exact <= K * D
    if not depth_ok:
        raise AuditError(f"depth budget violated: {depth_exact} > {K * D}")
    # ancillae <= n^{1 + 2^-K}  iff  (2(K+1))^{2^K} <= m^{c (2^K - 1)}
    anc_exp_ok = (2 * (K + 1)) ** (2 ** K) <= m ** (c * (2 ** K - 1))
    extra = {"D": D, "m": m, "n": n,
             "construction_depth": depth_exact, "stated_depth": K * D,
             "depth_ok": depth_ok,
             "ancilla_exponent_target": 1.0 + 2.0 ** (-K),
             "ancilla_exponent_ok": anc_exp_ok,
             "ladder_match_ok": ladder_ok}
    notes = []
    if not anc_exp_ok:
        notes.append("final ancillae exceed inputs^(1+2^-K) at this m; "
                     "larger m restores the exponent")
    return BoostPlan(kind="full_boost",
                     params={"d": d, "c": c, "K": K, "N0": N0},
                     steps=[], final=ladder.final, notes=notes, extra=extra,
                     children=children)


def threshold_report(delta_fn, D: int, k_limit: int = 2 ** 50) -> dict:
    """Search the smallest K (doubling + bisection; exact when delta is
    eventually monotone) with D / delta(K*D) <= 1/2, then report the exponent
    comparison exp(-K/2) >= 2^{-K} that pits an n^{1+exp(-depth/delta(depth))}
    ancilla threshold against the K-ladder construction."""
    if D < 1:
        raise ValueError("need D >= 1")

    def crossed(k: int) -> bool:
        v = delta_fn(k * D)
        return v > 0 and D / v <= 0.5

    k_hi = 1
    while k_hi <= k_limit and not crossed(k_hi):
        k_hi *= 2
    if k_hi > k_limit:
        return {"crossed": False, "D": D, "searched_up_to": k_limit,
                "note": "threshold not crossed"}
    lo, hi = k_hi // 2 + 1, k_hi
    if k_hi == 1:
        lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if crossed(mid):
            hi = mid
        else:
            lo = mid + 1
    K = lo
    # log2 exp(-K/2) = -K/(2 ln 2) >= -K, i.e. exp(-K/2) >= 2^-K, since ln 2 > 1/2
    avail_log2 = -K / (2.0 * math.log(2.0))
    return {"crossed": True, "K": K, "D": D, "depth": K * D,
            "ratio": D / delta_fn(K * D),
            "exponent_available_log2": avail_log2,
            "exponent_needed_log2": -float(K),
            "exponent_ok": avail_log2 >= -float(K),
            "note": "exp(-K/2) >= 2^-K since ln 2 > 1/2"}


# -- rendering ----------------------------------------------------------------------

def ascii_tree(plan: BoostPlan) -> str:
    """Left-spine tree rendering: one line per level with instance counts."""
    lines: list[str] = []

    def emit(p: BoostPlan, indent: str) -> None:
        args = ", ".join(f"{k}={v}" for k, v in p.params.items())
        lines.append(f"{indent}{p.kind}({args}): final {p.final.header()}")
        for note in p.notes:
            lines.append(f"{indent}  note: {note}")
        levels = p.extra.get("levels", [])
        pad = indent
        for lv in levels:
            spec = lv["spec"]
            head = (f"C(depth={spec['depth']}, inputs={spec['inputs']}, "
                    f"ancillae={spec['ancillae']})")
            lines.append(f"{pad}└─ level {lv['level']}: {lv['instances']} x {head}")
            pad += "   "
        for i, child in enumerate(p.children):
            last = i == len(p.children) - 1
            lines.append(f"{indent}{'└─' if last else '├─'} part {i + 1}:")
            emit(child, indent + ("   " if last else "│  "))

    emit(plan, "")
    return "\n".join(lines)


# -- concrete circuits ---------------------------------------------------------------

def exact_parity_gadget(n_bits: int) -> QacCircuit:
    """Parity of n_bits collected onto qubit 0 by a CNOT chain; no ancillae."""
    if n_bits < 1:
        raise ValueError("need n_bits >= 1")
    h = NAMED_GATES["H"]
    layers: list = []
    for j in range(1, n_bits):
        layers += [LLayer({0: h}), MLayer(((0, j),)), LLayer({0: h})]
    return QacCircuit(n_bits, 0, layers)


def designed_bias_gadget(n_bits: int, delta: float) -> QacCircuit:
    """Exact parity followed by a rotation of the output qubit, making the
    success probability exactly (1 + delta)/2 on every input."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    theta = 2.0 * math.acos(math.sqrt((1.0 + delta) / 2.0))
    base = exact_parity_gadget(n_bits)
    return QacCircuit(n_bits, 0,
                      list(base.layers) + [LLayer({0: rotation_gate("y", theta)})])


def build_composed_circuit(top: QacCircuit, bottom: QacCircuit,
                           n_t: int | None = None,
                           n_b: int | None = None) -> QacCircuit:
    """Wire n_t copies of the bottom parity circuit into the top one.

    Stage 1 runs the copies in parallel on disjoint input rows; stage 2 copies
    each row's output onto a fresh all-zero ancilla (the measurement); stage 3
    runs the top circuit on the row outputs.  The combined parity lands on
    qubit 0, and the ancilla count matches compose_specs exactly.
    """
    n_t = top.n_inputs if n_t is None else n_t
    n_b = bottom.n_inputs if n_b is None else n_b
    if top.n_inputs != n_t or bottom.n_inputs != n_b:
        raise ValueError("circuit input sizes disagree with n_t / n_b")
    if top.ancilla_state is not None or bottom.ancilla_state is not None:
        raise ValueError("composition requires default all-zero ancillae")
    n = n_t * n_b
    a_b, a_t = bottom.n_ancillae, top.n_ancillae
    n_anc = n_t * (a_b + 1) + a_t
    if n + n_anc > SIM_LIMIT:
        raise ValueError(f"composed circuit needs {n + n_anc} qubits; "
                         f"the simulation cap is {SIM_LIMIT}")

    parts = []
    for i in range(n_t):
        qmap = {j: i * n_b + j for j in range(n_b)}
        for j in range(a_b):
            qmap[n_b + j] = n + i * a_b + j
        parts.append(remap_layers(bottom.layers, qmap))
    layers = parallel_layers(parts)

    h = NAMED_GATES["H"]
    meas = {i: n + n_t * a_b + i for i in range(n_t)}
    layers.append(LLayer({t: h for t in meas.values()}))
    layers.append(MLayer(tuple((i * n_b, meas[i]) for i in range(n_t))))
    layers.append(LLayer({t: h for t in meas.values()}))

    qmap_top = {j: j * n_b for j in range(n_t)}
    for j in range(a_t):
        qmap_top[n_t + j] = n + n_t * a_b + n_t + j
    layers.extend(remap_layers(top.layers, qmap_top))
    return QacCircuit(n, n_anc, layers)


def _success_at(args) -> float:
    circuit, x = args
    p1 = output_probability(circuit, x)
    return p1 if bin(x).count("1") % 2 == 1 else 1.0 - p1


def measure_parity_success(circuit: QacCircuit, workers: int = 1) -> dict:
    """Exhaustive per-input success probabilities P[output = parity(x)]."""
    n = circuit.n_inputs
    jobs = [(circuit, x) for x in range(1 << n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            probs = list(pool.map(_success_at, jobs,
                                  chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        probs = [_success_at(j) for j in jobs]
    arr = np.array(probs)
    return {"n_inputs": n, "min": float(arr.min()), "max": float(arr.max()),
            "mean": float(arr.mean()), "per_input": probs}

import json
import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from pauli_lens.circuit_ir import heisenberg, parse, unitary
from pauli_lens.lowdeg_approx import (ApproxCertificate, WeightPolynomial,
                                      approx_circuit, approx_cz, approx_layer,
                                      approx_product_state, approx_unitary_dense,
                                      chebyshev_top_projector, closed_form_degree,
                                      default_r, degree_recursion,
                                      heisenberg_degree_bound, shape_ledger,
                                      verify_certificate)
from pauli_lens.pauli_core import (ErrorLedger, PauliOperator, expand_from_dense,
                                   spectral_norm)


# -- weight polynomials ----------------------------------------------------------

def test_chebyshev_frozen_anchor_n4_rho2():
    # T_2 at the top point (n+1)/(n-1) = 5/3 equals 41/9, so the off-top
    # maximum is exactly 9/41
    q = chebyshev_top_projector(4, 2)
    assert q.eval_exact(0) == Fraction(9, 41)
    assert q.error == pytest.approx(9 / 41, abs=1e-14)
    assert q.grid_values()[-1] == 1.0


def test_chebyshev_error_is_reciprocal_of_top_value():
    for n, rho in [(4, 2), (6, 3), (9, 4), (16, 7)]:
        q = chebyshev_top_projector(n, rho)
        m_top = (2 * n - (n - 1)) / (n - 1)
        t_top = np.polynomial.chebyshev.chebval(m_top, [0] * rho + [1])
        assert q.error == pytest.approx(1 / t_top, rel=1e-12)


def test_chebyshev_stored_error_matches_reevaluation():
    q = chebyshev_top_projector(9, 4)
    fresh = max(abs(float(q.eval_exact(j))) for j in range(9))
    assert q.error == pytest.approx(fresh, rel=1e-12)


def test_chebyshev_error_strictly_decreasing_in_rho():
    errs = [chebyshev_top_projector(8, rho).error for rho in range(1, 9)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_chebyshev_monomial_coeffs_agree_with_recurrence():
    q = chebyshev_top_projector(7, 3)
    grid = np.arange(8.0)
    via_coeffs = np.polynomial.polynomial.polyval(grid, q.coeffs)
    assert np.abs(via_coeffs - q.evaluate(grid)).max() < 1e-10


def test_chebyshev_rejects_bad_rho():
    with pytest.raises(ValueError):
        chebyshev_top_projector(4, 0)
    with pytest.raises(ValueError):
        chebyshev_top_projector(4, 5)


def test_interpolation_kind_is_exact():
    q = WeightPolynomial(5, 5, kind="top_interpolation")
    assert q.error == 0.0
    assert q.grid_values()[-1] == pytest.approx(1.0, abs=1e-12)
    assert q.eval_exact(3) == 0


# -- CZ gates ---------------------------------------------------------------------

def test_approx_cz_frozen_gap_18_41():
    cert = approx_cz(4, rho=2)
    assert cert.epsilon == pytest.approx(18 / 41, abs=1e-14)
    assert cert.degree == 2
    assert cert.form.degree == 2


def test_approx_cz_default_rho_and_bounds():
    cert = approx_cz(4, r=2)
    assert cert.degree == math.ceil(math.sqrt(8)) == 3
    assert cert.promised_degree == 3
    rep = verify_certificate(cert, oracles.dense_cz((0, 1, 2, 3), 4))
    assert rep.passed
    assert rep.measured_distance == pytest.approx(cert.epsilon, abs=1e-12)


def test_approx_cz_rejects_out_of_range_r():
    with pytest.raises(ValueError):
        approx_cz(4, r=1.0)
    with pytest.raises(ValueError):
        approx_cz(4, r=4.0)
    with pytest.raises(ValueError):
        approx_cz(1, r=0.5)


def test_approx_cz_promised_bound_dominance_sweep():
    # the acceptance comparison in miniature: exact error below the closed form
    # whenever sqrt(n) < r < n
    for n in (16, 64, 256):
        for r in (4, 16, 64):
            if not math.sqrt(n) < r < n:
                continue
            cert = approx_cz(n, r=r)
            assert cert.in_guarantee_range
            assert cert.epsilon <= 2.0 ** (1 - r / 256) + 1e-12
            assert cert.degree <= math.ceil(math.sqrt(n * r))


def test_approx_cz_certificate_json_serializes():
    cert = approx_cz(6, r=3)
    blob = json.dumps(cert.to_json_obj())
    assert "cz(n=6)" in blob


def test_corrupted_certificate_fails_verification():
    cert = approx_cz(4, r=2)
    cert.ledger = ErrorLedger(cert.epsilon / 2, ("corrupted",))
    rep = verify_certificate(cert, oracles.dense_cz((0, 1, 2, 3), 4))
    assert not rep.passed and not rep.distance_ok


# -- product states ------------------------------------------------------------------

def test_product_state_single_blocks():
    cert = approx_product_state(1, 9, 4.0)
    assert cert.degree <= 4
    assert cert.in_guarantee_range  # 3 < 4 < 9
    q = cert.detail["polynomial"]
    assert cert.epsilon == pytest.approx(q.error, abs=1e-15)
    low = approx_product_state(1, 9, 2.0)
    assert not low.in_guarantee_range  # below sqrt(n): promised bound not applicable


def test_product_state_exact_interpolation_at_r_equals_n():
    zero = np.array([1.0, 0.0])
    cert = approx_product_state(1, 3, 3.0, state=zero)
    assert cert.epsilon == 0.0
    target = np.zeros((8, 8), dtype=complex)
    target[0, 0] = 1.0
    assert np.abs(cert.form.to_dense() - target).max() < 1e-10


def test_product_state_epr_blocks_dense_check():
    epr = np.array([1, 0, 0, 1]) / np.sqrt(2)
    cert = approx_product_state(2, 3, 2.5, state=epr)
    assert cert.degree == 2 * cert.detail["rho"] <= 2 * 2.5
    p1 = np.outer(epr, epr)
    exact = np.kron(np.kron(p1, p1), p1)
    dist = np.linalg.norm(cert.form.to_dense() - exact, 2)
    assert dist <= cert.epsilon + 1e-10
    assert cert.form.degree <= cert.degree


def test_product_state_custom_block_layout():
    # interleaved EPR pairs (i, k+i): same certificate, permuted form
    epr = np.array([1, 0, 0, 1]) / np.sqrt(2)
    cert = approx_product_state(2, 2, 1.5, state=epr,
                                block_supports=[(0, 2), (1, 3)], n_total=4)
    p1 = np.outer(epr, epr)
    exact_adjacent = np.kron(p1, p1)  # pairs (0,1), (2,3)
    perm = np.zeros((16, 16))
    for x in range(16):
        b = [(x >> (3 - i)) & 1 for i in range(4)]  # bits of (0,1,2,3)
        y = (b[0] << 3) | (b[2] << 2) | (b[1] << 1) | b[3]  # swap qubits 1 and 2
        perm[y, x] = 1.0
    exact = perm @ exact_adjacent @ perm.T
    dist = np.linalg.norm(cert.form.to_dense() - exact, 2)
    assert dist <= cert.epsilon + 1e-10


# -- layers ----------------------------------------------------------------------------

def test_layer_all_small_gates_exact():
    cert = approx_layer([(0, 1), (2, 3), (4, 5)], 8, ell=1, r=2.0)
    assert cert.epsilon == 0.0
    assert cert.degree <= 8


def test_layer_single_gate_reduces_to_cz_certificate():
    gate = approx_cz(8, 3.0)
    cert = approx_layer([tuple(range(8))], 8, ell=1, r=3.0)
    assert cert.detail["operator_error"] == pytest.approx(gate.epsilon, abs=1e-15)
    assert cert.detail["gate_certs"][0].degree == gate.degree
    assert cert.epsilon == pytest.approx((1 + gate.epsilon) ** 2 - 1, abs=1e-14)


def test_layer_trivial_branch_when_r_exceeds_threshold():
    cert = approx_layer([(0, 1, 2, 3)], 4, ell=4, r=3.9)
    assert cert.detail["branch"] == "exact"
    assert cert.epsilon == 0.0
    assert cert.degree == 4


def test_layer_mixed_arities_dense_verification():
    # n=12, one gate wide enough to be approximated; check both the layer
    # unitary error and the conjugated-observable error densely
    n, r = 12, 2.0
    supports = [(0, 1, 2, 3, 4, 5, 6), (7, 8, 9, 10, 11)]
    cert = approx_layer(supports, n, ell=1, r=r)
    assert cert.detail["branch"] == "approx"
    assert cert.degree <= n

    m_exact = np.eye(1 << n, dtype=complex)
    m_tilde = np.ones(1 << n, dtype=complex)
    from pauli_lens.lowdeg_approx import _cz_diag
    for entry, sup in zip(cert.detail["plan"], supports):
        m_exact = oracles.dense_cz(sup, n) @ m_exact
        m_tilde *= _cz_diag(entry["support"], n, entry["approx"])
    gate_gap = np.abs(np.diag(m_exact) - m_tilde).max()
    assert gate_gap <= cert.detail["operator_error"] + 1e-12

    a = np.zeros(1 << n)
    a[0] = 1.0  # |0..0><0..0| restricted? use Z on qubit 0 instead: degree 1, norm 1
    z0 = np.ones(1 << n)
    z0[(np.arange(1 << n) >> (n - 1)) & 1 == 1] = -1.0
    conj_gap = np.abs(np.diag(m_exact).conj() * z0 * np.diag(m_exact)
                      - m_tilde.conj() * z0 * m_tilde).max()
    assert conj_gap <= cert.epsilon + 1e-12


def test_layer_promised_bound_dominance_when_in_range():
    for n, r, supports in [(12, 4.0, [(0, 1, 2, 3, 4, 5, 6, 7, 8, 9)]),
                           (9, 3.5, [tuple(range(9))]),
                           (16, 5.0, [tuple(range(12)), (12, 13)])]:
        cert = approx_layer(supports, n, ell=1, r=r)
        if cert.in_guarantee_range:
            assert cert.degree <= cert.promised_degree + 1e-9
            assert cert.epsilon <= cert.promised_error + 1e-9


def test_layer_rejects_bad_input():
    with pytest.raises(ValueError):
        approx_layer([(0, 1), (1, 2)], 4, ell=1, r=2.0)
    with pytest.raises(ValueError):
        approx_layer([(0,)], 4, ell=1, r=2.0)
    with pytest.raises(ValueError):
        approx_layer([(0, 1)], 4, ell=1, r=0.5)
    with pytest.raises(ValueError):
        approx_layer([(0, 1)], 4, ell=0, r=2.0)


# -- recursion arithmetic ----------------------------------------------------------------

def test_recursion_matches_closed_form_on_random_tuples():
    rng = np.random.default_rng(101)
    for _ in range(100):
        n = float(rng.uniform(2, 1e6))
        ell = float(rng.uniform(1, 100))
        r = float(rng.uniform(1, 1000))
        d = int(rng.integers(0, 7))
        raw = degree_recursion(n, ell, r, d)
        closed = closed_form_degree(n, ell, r, d)
        assert abs(raw - closed) <= 1e-9 * max(1.0, abs(closed))


def test_shape_ledger_basics():
    lg = shape_ledger(16, 0, ell=3)
    assert lg.degree == 3 and lg.epsilon == 0.0
    lg1 = shape_ledger(16, 1, ell=1, r=4.0)
    assert lg1.degree == min(16, math.ceil(3 * 16 ** (2 / 3) * 4 ** (1 / 3)))
    # epsilon chains multiplicatively
    per = 16 * 2 ** (1 - 4 / 256) * math.log2(math.e)
    lg3 = shape_ledger(16, 3, ell=1, r=4.0)
    assert lg3.epsilon == pytest.approx((1 + per) ** 3 - 1, rel=1e-12)


def test_shape_ledger_monotone():
    degs_d = [shape_ledger(64, d, ell=1).degree for d in range(5)]
    assert all(a <= b for a, b in zip(degs_d, degs_d[1:]))
    degs_l = [shape_ledger(64, 2, ell=l).degree for l in range(1, 6)]
    assert all(a <= b for a, b in zip(degs_l, degs_l[1:]))


def test_default_r_tracks_two_log_n():
    assert default_r(2) == pytest.approx(256 * 3)
    assert default_r(1024) == pytest.approx(256 * 21)


# -- whole circuits ----------------------------------------------------------------------

def test_approx_circuit_depth_zero_and_one():
    c0 = parse("qubits 4 0\nlayer L: H@0\n")
    cert0 = approx_circuit(c0, ell=2, r=2.0)
    assert cert0.degree == 2 and cert0.epsilon == 0.0

    c1 = parse("qubits 8 0\nlayer M: CZ@0,1,2,3,4,5,6,7\n")
    cert1 = approx_circuit(c1, ell=1, r=3.0)
    layer = approx_layer([tuple(range(8))], 8, ell=1, r=3.0)
    assert cert1.degree == layer.degree
    assert cert1.epsilon == pytest.approx(layer.epsilon, abs=1e-14)


def test_approx_circuit_dense_unitary_check():
    text = """
    qubits 10 0
    layer L: H@0 H@3 T@7
    layer M: CZ@0,1,2,3,4,5,6
    layer L: H@2
    layer M: CZ@3,4,5,6,7,8,9
    layer L: T@9
    """
    c = parse(text)
    cert = approx_circuit(c, ell=1, r=2.0)
    u_exact = unitary(c)
    u_tilde = approx_unitary_dense(c, cert)
    gap = np.linalg.norm(u_exact - u_tilde, 2)
    assert gap <= cert.detail["unitary_error"] + 1e-10
    assert cert.epsilon <= cert.promised_error + 1e-9 or not cert.in_guarantee_range


def test_heisenberg_bound_identity_circuit():
    c = parse("qubits 3 0\nlayer L: H@0\n")
    seed = ApproxCertificate(target="obs", degree=2, ledger=ErrorLedger(0.05, ("a",)))
    cert = heisenberg_degree_bound(c, seed, r=2.0)
    assert cert.degree == 2
    assert cert.epsilon == pytest.approx(0.05, abs=1e-12)


def test_heisenberg_bound_eight_qubit_single_wide_gate():
    c = parse("qubits 8 0\nlayer L: H@0 H@4\nlayer M: CZ@0,1,2,3,4,5\nlayer L: T@2\n")
    proj1 = PauliOperator.from_symbol_map({"I" * 8: 0.5, "Z" + "I" * 7: -0.5})
    seed = ApproxCertificate(target="|1><1| on output", degree=1,
                             ledger=ErrorLedger(0.0, ("exact",)), form=proj1)
    cert = heisenberg_degree_bound(c, seed, r=2.0)
    exact = heisenberg(c, proj1)
    rep = verify_certificate(cert, exact)
    assert rep.passed
    assert rep.measured_distance <= cert.epsilon
    assert cert.form.degree <= cert.degree


def test_heisenberg_bound_random_circuits_sound():
    rng = np.random.default_rng(55)
    for _ in range(8):
        n_in = int(rng.integers(2, 5))
        n_anc = int(rng.integers(0, 3))
        c = oracles.random_circuit(rng, n_in, n_anc, depth=int(rng.integers(1, 4)))
        n = c.n_total
        proj1 = PauliOperator.from_symbol_map(
            {"I" * n: 0.5, "Z" + "I" * (n - 1): -0.5})
        seed = ApproxCertificate(target="out", degree=1,
                                 ledger=ErrorLedger(0.0, ()), form=proj1)
        r = float(rng.choice([2.0, default_r(n)]))
        if r <= 1 or n < 3:
            continue
        cert = heisenberg_degree_bound(c, seed, r=r)
        exact = heisenberg(c, proj1)
        rep = verify_certificate(cert, exact)
        assert rep.passed, (n, r, rep)


def test_heisenberg_bound_post_selection_note_and_ledger():
    c = parse("qubits 2 1\nlayer M: CZ@0,1,2\n")
    seed = ApproxCertificate(target="out", degree=1, ledger=ErrorLedger(0.0, ()))
    cert = heisenberg_degree_bound(c, seed, r=2.0)
    assert "post_selection" in cert.detail
    assert cert.ledger.epsilon == pytest.approx(cert.epsilon)


def test_certificate_json_roundtrip_shapes():
    c = parse("qubits 6 0\nlayer M: CZ@0,1,2,3,4\nlayer M: CZ@1,2\n")
    cert = approx_circuit(c, ell=1, r=2.0)
    blob = json.dumps(cert.to_json_obj())
    obj = json.loads(blob)
    assert obj["degree"] == cert.degree
    assert obj["epsilon"] == pytest.approx(cert.epsilon)

"""End-to-end tests for the command-line front end.

Everything runs in-process through main(argv) so exit codes and stdout can be
asserted directly; one subprocess test pins the installed entry point and the
dense-limit environment override.
"""
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from pauli_lens.cli import main
from pauli_lens.circuit_ir import QacCircuit, parse, unitary
from pauli_lens.pauli_core import PauliOperator, expand_from_dense

CIRCUIT_TEXT = "qubits 2 1\nlayer L: H@0\nlayer M: CZ@0,1,2\nlayer L: H@1\n"


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    old_out, old_err = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        code = main(argv)
    finally:
        sys.stdout, sys.stderr = old_out, old_err
    return code, out.getvalue(), err.getvalue()


def run_json(argv):
    code, out, err = run(argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def circuit_file(tmp_path):
    p = tmp_path / "c.qac"
    p.write_text(CIRCUIT_TEXT)
    return str(p)


# -- frozen command examples ------------------------------------------------------------

def test_boost_step1_frozen_plan():
    rep = run_json(["boost", "step1", "--d", "3", "--n", "10", "--c", "2"])
    assert rep["final"]["depth"] == 8
    assert rep["final"]["inputs"] == 100
    assert rep["final"]["ancillae"] == 10000


def test_degree_parity_three():
    rep = run_json(["degree", "--named", "parity", "--n", "3", "--eps", "0.3333"])
    assert rep["degree"] == 3


def test_boost_step2_frozen_plan():
    rep = run_json(["boost", "step2", "--d", "3", "--n", "4", "--k", "2"])
    assert (rep["final"]["depth"], rep["final"]["inputs"],
            rep["final"]["ancillae"]) == (8, 64, 1024)


def test_verify_intact_certificate_exits_zero(tmp_path):
    rep = run_json(["approx", "cz", "--n", "16", "--r", "8"])
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(json.dumps(rep["certificate"]))
    code, out, _ = run(["verify", "--certificate", str(cert_path)])
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_verify_tampered_epsilon_exits_one(tmp_path):
    rep = run_json(["approx", "cz", "--n", "16", "--r", "8"])
    cert = rep["certificate"]
    cert["epsilon"] /= 8.0
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(json.dumps(cert))
    code, out, _ = run(["verify", "--certificate", str(cert_path)])
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_verify_tampered_degree_exits_one(tmp_path):
    rep = run_json(["approx", "cz", "--n", "16", "--r", "8"])
    cert = rep["certificate"]
    cert["degree"] -= 1
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(json.dumps(cert))
    code, _, _ = run(["verify", "--certificate", str(cert_path)])
    assert code == 1


# -- exit code 2 on malformed input -----------------------------------------------------

def test_missing_certificate_file_exits_two(tmp_path):
    code, _, err = run(["verify", "--certificate", str(tmp_path / "nope.json")])
    assert code == 2
    assert "error" in err


def test_unknown_subcommand_exits_two():
    code, _, _ = run(["frobnicate"])
    assert code == 2


def test_non_integer_arity_exits_two():
    code, _, _ = run(["approx", "cz", "--n", "abc"])
    assert code == 2


def test_out_of_range_r_exits_two():
    code, _, err = run(["approx", "cz", "--n", "8", "--r", "8"])
    assert code == 2
    assert "r" in err


def test_degree_without_function_exits_two():
    code, _, _ = run(["degree", "--eps", "0.1"])
    assert code == 2


def test_malformed_json_certificate_exits_two(tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    code, _, _ = run(["verify", "--certificate", str(p)])
    assert code == 2


# -- report hygiene ----------------------------------------------------------------------

def test_reports_record_seed_and_workers():
    rep = run_json(["degree", "--named", "parity", "--n", "3", "--eps", "0.4",
                    "--seed", "123", "--workers", "3"])
    assert rep["config"]["seed"] == 123
    assert rep["config"]["workers"] == 3
    rep = run_json(["boost", "step1", "--d", "1", "--n", "3", "--c", "1"])
    assert rep["config"]["seed"] == 7  # default, still present


def test_out_writes_report_and_csv(tmp_path):
    out_path = tmp_path / "report.json"
    rep = run_json(["approx", "cz", "--n", "16", "--r", "8",
                    "--out", str(out_path)])
    on_disk = json.loads(out_path.read_text())
    assert on_disk == rep
    csv_text = (tmp_path / "report.csv").read_text().splitlines()
    assert csv_text[0].startswith("n,r,rho,degree,epsilon")
    row = csv_text[1].split(",")
    assert int(row[0]) == 16
    assert float(row[4]) == pytest.approx(rep["epsilon"])


def test_explicit_csv_path(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    run_json(["approx", "cz", "--n", "8,16,32", "--r", "4",
              "--csv", str(csv_path)])
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 4  # header + three arities
    assert [r.split(",")[0] for r in lines[1:]] == ["8", "16", "32"]


# -- sweeps ------------------------------------------------------------------------------

def test_cz_sweep_parallel_matches_serial():
    serial = run_json(["approx", "cz", "--n", "8,16,32", "--r", "4"])
    parallel = run_json(["approx", "cz", "--n", "8,16,32", "--r", "4",
                         "--workers", "2"])
    assert serial["sweep"] == parallel["sweep"]
    for row in serial["sweep"]:
        assert row["degree"] <= row["n"]
        assert 0.0 < row["epsilon"] < 1.0


def test_cz_sweep_invalid_member_exits_two():
    code, _, _ = run(["approx", "cz", "--n", "8,16", "--r", "8"])
    assert code == 2


# -- round-trips -------------------------------------------------------------------------

def test_expand_report_reingests(circuit_file):
    rep = run_json(["expand", "--circuit", circuit_file])
    op = PauliOperator.from_json_obj(rep["expansion"])
    assert op.degree == rep["degree"]
    circ = parse(CIRCUIT_TEXT)
    exact = expand_from_dense(unitary(circ))
    assert op.sub(exact).terms == {}


def test_expand_matrix_route(tmp_path):
    rng = np.random.default_rng(5)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    p = tmp_path / "m.json"
    p.write_text(json.dumps([[[e.real, e.imag] for e in row] for row in m]))
    rep = run_json(["expand", "--matrix", str(p)])
    op = PauliOperator.from_json_obj(rep["expansion"])
    assert np.allclose(op.to_dense(), m)


def test_circuit_certificate_reingests(circuit_file):
    rep = run_json(["approx", "circuit", "--circuit", circuit_file,
                    "--ell", "1", "--r", "64"])
    cert = rep["certificate"]
    assert cert["degree"] == rep["degree"]
    assert cert["detail"]["depth"] == 1  # M layers only
    assert cert["detail"]["unitary_error"] == 0.0  # exact at this size
    json.dumps(cert)  # fully serializable, no numpy leftovers


def test_circuit_json_ingests(tmp_path):
    circ = parse(CIRCUIT_TEXT)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(circ.to_json_obj()))
    text_rep = run_json(["expand", "--circuit", str(tmp_path / "c.json")])
    assert text_rep["source"]["n"] == 3


# -- approx subcommands ------------------------------------------------------------------

def test_approx_circuit_verify_passes(circuit_file):
    rep = run_json(["approx", "circuit", "--circuit", circuit_file,
                    "--ell", "1", "--r", "64", "--verify"])
    ver = rep["verification"]
    assert ver["passed"] is True
    assert ver["measured_unitary_distance"] <= ver["bound"] + 1e-9


def test_approx_state_interpolator_is_exact():
    rep = run_json(["approx", "state", "--count", "3", "--r", "9"])
    assert rep["epsilon"] == 0.0
    assert rep["degree"] == 3


def test_approx_choi_embedded_verification(circuit_file):
    rep = run_json(["approx", "choi", "--circuit", circuit_file, "--k", "1"])
    det = rep["certificate"]["detail"]
    assert det["verification"]["passed"] is True
    assert det["choi_spectral_norm"] <= 2.0 + 1e-9


def test_approx_choi_ancilla_override(circuit_file, tmp_path):
    anc = tmp_path / "anc.json"
    anc.write_text(json.dumps([[0.0, 0.0], [1.0, 0.0]]))
    rep = run_json(["approx", "choi", "--circuit", circuit_file, "--k", "1",
                    "--ancilla", str(anc)])
    assert rep["certificate"]["detail"]["verification"]["passed"] is True


def test_mixed_ancilla_override_rejected(circuit_file, tmp_path):
    anc = tmp_path / "anc.json"
    rows = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]
    anc.write_text(json.dumps({"kind": "density", "n": 1, "rows": rows}))
    code, _, err = run(["approx", "choi", "--circuit", circuit_file,
                        "--k", "1", "--ancilla", str(anc)])
    assert code == 2
    assert "pure" in err


# -- degree / hardness -------------------------------------------------------------------

def test_degree_from_table_file(tmp_path):
    p = tmp_path / "xor.json"
    p.write_text(json.dumps([0.0, 1.0, 1.0, 0.0]))
    rep = run_json(["degree", "--fn", str(p), "--eps", "0.1"])
    assert rep["degree"] == 2
    assert rep["query"]["witness_error"] <= 0.1 + 1e-7


def test_hardness_worst_report():
    rep = run_json(["hardness", "worst", "--named", "parity", "--n", "6",
                    "--depth", "2", "--delta", "0.1", "--r", "4"])
    assert rep["verdict"] in ("compatible", "incompatible", "vacuous")
    assert rep["report"]["ledger"]["degree"] >= 1


def test_hardness_average_parity_is_coin_flip():
    rep = run_json(["hardness", "average", "--named", "parity", "--n", "6",
                    "--k", "3"])
    assert rep["report"]["bound"] == pytest.approx(0.5)
    assert rep["report"]["weight_above_zero_one"] == pytest.approx(0.25)


def test_hardness_synthesis_cat_blocked_at_tight_budget():
    rep = run_json(["hardness", "synthesis", "--cat", "8", "--ancillae", "8",
                    "--depth", "1", "--delta", "1e-9", "--r", "4096"])
    assert rep["report"]["lower_bound"] == 8
    assert rep["verdict"].startswith("no obstruction")


def test_hardness_channel_bound_fields(circuit_file):
    rep = run_json(["hardness", "channel", "--circuit", circuit_file,
                    "--k", "1"])
    assert rep["cb_error_bound"] == pytest.approx(2.0 * rep["epsilon"])
    assert rep["degree"] >= 1


# -- boost -------------------------------------------------------------------------------

def test_boost_compose_margins_multiply():
    rep = run_json(["boost", "compose", "--top", "2:3:4:0.9",
                    "--bottom", "1:2:2:0.8"])
    spec = rep["composed"]
    assert spec["depth"] == 4
    assert spec["inputs"] == 6
    assert spec["ancillae"] == 3 * 3 + 4
    assert 2.0 ** spec["margin"]["log2"] == pytest.approx(0.8 ** 3 * 0.9)


def test_boost_bad_spec_string_exits_two():
    code, _, _ = run(["boost", "compose", "--top", "2:3", "--bottom", "1:2:2"])
    assert code == 2


def test_boost_tree_in_report_and_stderr():
    code, out, err = run(["boost", "step1", "--d", "3", "--n", "10", "--c", "2"])
    assert code == 0
    rep = json.loads(out)  # tree on stderr keeps stdout pure JSON
    assert rep["tree"] in err
    assert "level 1" in rep["tree"]


def test_boost_full_plan_audits():
    rep = run_json(["boost", "full", "--d", "2", "--c", "2", "--K", "2",
                    "--n0", "3"])
    extra = rep["plan"]["extra"]
    assert extra["depth_ok"] is True
    assert extra["ladder_match_ok"] is True
    assert len(rep["plan"]["children"]) == 4  # K+1 squarings + the ladder


def test_boost_full_ceiling_exits_two():
    code, _, _ = run(["boost", "full", "--d", "2", "--c", "2", "--K", "2",
                      "--n0", "3", "--ceiling", "100"])
    assert code == 2


def test_boost_threshold_power_margin():
    rep = run_json(["boost", "threshold", "--depth-unit", "10",
                    "--margin-power", "2.0"])
    r = rep["report"]
    assert r["crossed"] is True
    assert r["ratio"] <= 0.5
    assert r["exponent_ok"] is True


def test_boost_threshold_constant_margin_never_crosses():
    rep = run_json(["boost", "threshold", "--depth-unit", "10",
                    "--margin-const", "1.0"])
    assert rep["report"]["crossed"] is False


# -- verify with an explicit exact object -------------------------------------------------

def _dense_cz_json(n):
    d = np.ones(1 << n)
    d[-1] = -1.0
    return [[[float(d[i]) if i == j else 0.0, 0.0] for j in range(1 << n)]
            for i in range(1 << n)]


def test_verify_against_exact_matrix(tmp_path):
    rep = run_json(["approx", "cz", "--n", "4", "--rho", "3"])
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(json.dumps(rep["certificate"]))
    mat_path = tmp_path / "cz4.json"
    mat_path.write_text(json.dumps(_dense_cz_json(4)))
    code, out, _ = run(["verify", "--certificate", str(cert_path),
                        "--exact", str(mat_path)])
    assert code == 0
    assert json.loads(out)["verification"]["route"] == "explicit_form"


def test_verify_against_wrong_exact_matrix(tmp_path):
    rep = run_json(["approx", "cz", "--n", "4", "--rho", "3"])
    cert_path = tmp_path / "cert.json"
    cert_path.write_text(json.dumps(rep["certificate"]))
    wrong = _dense_cz_json(4)
    wrong[-1][-1] = [1.0, 0.0]  # identity, not cz
    mat_path = tmp_path / "id4.json"
    mat_path.write_text(json.dumps(wrong))
    code, _, _ = run(["verify", "--certificate", str(cert_path),
                      "--exact", str(mat_path)])
    assert code == 1


# -- entry point and environment ----------------------------------------------------------

def test_console_entry_and_dense_limit_env(tmp_path):
    env = dict(os.environ, PAULI_LENS_DENSE_LIMIT="2")
    proc = subprocess.run(
        [sys.executable, "-m", "pauli_lens.cli", "approx", "cz",
         "--n", "4", "--rho", "3"],
        capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    rep = json.loads(proc.stdout)
    assert "form" not in rep["certificate"]  # dense form suppressed at limit 2
    proc = subprocess.run(
        [sys.executable, "-m", "pauli_lens.cli", "approx", "cz",
         "--n", "4", "--rho", "3"],
        capture_output=True, text=True)
    assert "form" in json.loads(proc.stdout)["certificate"]

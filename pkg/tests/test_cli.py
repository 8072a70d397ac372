import json
import subprocess
import sys

import numpy as np
import pytest

from qinv import chancore as cc
from qinv import io
from qinv.cli import main
from qinv.qinvert import quasi_inverse_lp


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def t1_csv(tmp_path):
    path = tmp_path / "t1.csv"
    path.write_text("0.25,0.75,0.25\n0.5,0.125,0.125\n0.25,0.125,0.625\n")
    return path


def test_qi_classical_t1(capsys, t1_csv):
    res = run_json(capsys, "qi", t1_csv)
    assert np.array_equal(res["qi"]["mat"], [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert abs(res["fidelity_before"] - 1 / 3) < 1e-12
    assert abs(res["fidelity_after"] - 15 / 24) < 1e-12


def test_qi_analytic_depolarizing(capsys, tmp_path):
    path = tmp_path / "dep.json"
    assert run(capsys, "construct", "depolarizing", "--dim", 3, "--q", 0.5, "-o", path)[0] == 0
    res = run_json(capsys, "qi", path, "--analytic")
    qi = io.channel_from_json(res["qi"])
    assert np.allclose(qi.superop(), np.eye(9))
    assert abs(res["fidelity_after"] - res["fidelity_before"]) < 1e-12


def test_qi_werner_holevo_gain(capsys, tmp_path):
    path = tmp_path / "wh.json"
    run(capsys, "construct", "transverse-depolarizing", "--dim", 3, "--w", 1.5, "-o", path)
    for extra in (["--analytic"], []):
        res = run_json(capsys, "qi", path, *extra)
        assert abs(res["fidelity_after"] - res["fidelity_before"] - 0.25) < 1e-6
        assert res["bounds"]["lower"] - 1e-6 <= res["fidelity_after"] <= res["bounds"]["upper"] + 1e-6


def test_qi_not_converged_exit_code(capsys, tmp_path):
    path = tmp_path / "pauli.json"
    run(capsys, "construct", "pauli", "--p", 0.1, 0.5, 0.3, 0.1, "-o", path)
    code, out, err = run(capsys, "qi", path, "--lp-mode", "random", "--n-random", 5)
    assert code == 2
    assert "warning" in err
    json.loads(out)


def test_fidelity_command(capsys, tmp_path):
    ls = tmp_path / "ls.json"
    run(capsys, "construct", "landau-streater", "--j", 1, "-o", ls)
    rep = run_json(capsys, "fidelity", ls)
    assert abs(rep["avg_fidelity"] - 0.25) < 1e-12
    rep = run_json(capsys, "fidelity", ls, "--with", ls)
    assert abs(rep["corrected_fidelity"] - 0.5) < 1e-12
    ident = tmp_path / "id.json"
    run(capsys, "construct", "depolarizing", "--dim", 2, "--q", 0, "-o", ident)
    rep = run_json(capsys, "fidelity", ident)
    assert np.isclose(rep["avg_fidelity"], 1) and np.isclose(rep["ent_fidelity"], 1)
    code, _, err = run(capsys, "fidelity", ls, "--with", ident)
    assert code == 1 and "dimension mismatch" in err


def test_fidelity_of_lp_qi_within_bounds(capsys, tmp_path, rng):
    from conftest import random_superop

    phi = random_superop(2, rng)
    ch_path, qi_path = tmp_path / "ch.json", tmp_path / "qi.json"
    io.write_channel(cc.Channel.from_superop(phi), ch_path)
    assert run(capsys, "qi", ch_path, "-o", qi_path)[0] == 0
    res = json.loads(qi_path.read_text())
    io.write_channel(io.channel_from_json(res["qi"]), tmp_path / "corr.json")
    rep = run_json(capsys, "fidelity", ch_path, "--with", tmp_path / "corr.json")
    assert res["bounds"]["lower"] - 1e-6 <= rep["corrected_fidelity"] <= res["bounds"]["upper"] + 1e-6


def test_construct_errors(capsys):
    code, out, err = run(capsys, "construct", "transverse-depolarizing", "--dim", 3, "--w", 2)
    assert code == 1 and "complete positivity" in err and out == ""
    code, _, err = run(capsys, "construct", "landau-streater")
    assert code == 1 and "--j" in err
    code, _, err = run(capsys, "construct", "nonsense")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["landau-streater", "--j", "1"],
    ["stretch", "--d1", "1", "--d2", "3", "--m1", "2", "--m2", "2"],
    ["werner-holevo", "--dim", "4", "--form", "kraus"],
    ["spin1-dephasing", "--taus", "0", "1.2", "--probs", "0.6", "0.4", "--form", "choi"],
])
def test_construct_round_trip(capsys, tmp_path, argv):
    path = tmp_path / "ch.json"
    assert run(capsys, "construct", *argv, "-o", path)[0] == 0
    ch = io.read_channel(path)
    again = tmp_path / "again.json"
    io.write_channel(ch, again)
    back = io.read_channel(again)
    assert back.form == ch.form and back.tag == ch.tag
    assert np.max(np.abs(np.asarray(back.data) - np.asarray(ch.data))) <= 1e-15
    rep = run_json(capsys, "validate", path)
    assert rep["valid"]


def test_malformed_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 2,\n "form": "superop",\n "data": [1, 2,, 3]}')
    code, out, err = run(capsys, "qi", bad)
    assert code == 1 and "line 3" in err and out == ""
    missing = tmp_path / "missing.json"
    missing.write_text('{"dim": 2, "form": "superop"}')
    code, _, err = run(capsys, "qi", missing)
    assert code == 1 and "data" in err
    notcp = tmp_path / "notcp.json"
    io.dump_json(io.channel_to_json(cc.Channel(2, "superop", 1.5 * np.eye(4), None)), notcp)
    code, _, err = run(capsys, "qi", notcp)
    assert code == 1
    code, _, _ = run(capsys, "qi", tmp_path / "nowhere.json")
    assert code == 1
    nonstoch = tmp_path / "ns.csv"
    nonstoch.write_text("0.5,0.5\n0.4,0.5\n")
    code, _, err = run(capsys, "qi", nonstoch)
    assert code == 1 and "column" in err


def test_superdecohere(capsys, tmp_path, rng):
    from conftest import random_unitary

    u = random_unitary(3, rng)
    path = tmp_path / "u.json"
    io.write_channel(cc.Channel.from_kraus([u]), path)
    res = run_json(capsys, "superdecohere", path)
    assert np.allclose(res["mat"], np.abs(u) ** 2, atol=1e-12)
    out = tmp_path / "t.json"
    assert run(capsys, "superdecohere", path, "-o", out)[0] == 0
    assert np.allclose(io.read_stochastic(out), np.abs(u) ** 2, atol=1e-15)
    ls = tmp_path / "ls.json"
    run(capsys, "construct", "landau-streater", "--j", 1, "-o", ls)
    mat = np.array(run_json(capsys, "superdecohere", ls)["mat"])
    assert np.allclose(mat.sum(axis=1), 1, atol=1e-10)


def test_superdecohere_then_qi(capsys, tmp_path):
    c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
    ch = cc.mixed_unitary([0.9, 0.1], [np.array([[c, -s], [s, c]]), np.eye(2)])
    path = tmp_path / "ry.json"
    io.write_channel(ch, path)
    res = run_json(capsys, "superdecohere", path, "--then-qi")
    assert res["commute"] is False


def test_ensemble_classical_byte_identical(capsys, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, _, err = run(capsys, "ensemble", "--mode", "classical", "--sweep", "2..4", "--n", 3000,
                           "--seed", 42, "--fit", "-o", d)
        assert code == 0, err
        outs.append(d)
    for name in ("classical_d2.csv", "classical_d4.csv", "classical_summary.csv", "classical_summary.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    summary = json.loads((outs[0] / "classical_summary.json").read_text())
    assert "fit" in summary and summary["fit"]["exponent"] < 0
    header = (outs[0] / "classical_d2.csv").read_text().splitlines()[0]
    assert header == "index,d,f_before,f_after"


def test_ensemble_quantum_with_plot(capsys, tmp_path):
    code, _, err = run(capsys, "ensemble", "--dim", 2, "--n", 4, "--seed", 3, "--restarts", 3,
                       "--plot", "-o", tmp_path)
    assert code == 0, err
    rows = (tmp_path / "quantum_d2.csv").read_text().splitlines()
    assert rows[0] == "index,d,f_before,f_unitary,f_qi,jam_purity,unitality,lp_iters,converged"
    assert len(rows) == 5
    assert (tmp_path / "quantum_fidelity.png").stat().st_size > 0


def test_ensemble_requires_seed_and_dim(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["ensemble", "--dim", "2", "-o", str(tmp_path)])
    assert exc.value.code == 1
    code, _, err = run(capsys, "ensemble", "--seed", 1, "-o", tmp_path)
    assert code == 1 and "--dim" in err
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "ensemble", "--dim", 2, "--seed", 1, "-o", blocker / "sub")
    assert code == 1 and "cannot write" in err


def test_spin1_command(capsys, tmp_path):
    out = tmp_path / "spin1.csv"
    code, _, _ = run(capsys, "spin1", "--p-grid", "0:1:3", "--tau0-grid", "0:pi:3", "--plot", "-o", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,tau0,f_before,f_after,delta,tau_m"
    assert len(lines) == 10
    assert out.with_suffix(".png").exists()


def test_validate_stochastic(capsys, t1_csv):
    rep = run_json(capsys, "validate", t1_csv)
    assert rep["kind"] == "classical" and not rep["bistochastic"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qinv", "construct", "werner-holevo", "--dim", "3"],
                          capture_output=True, text=True, check=True)
    ch = io.channel_from_json(json.loads(proc.stdout))
    res = quasi_inverse_lp(ch.superop())
    assert res.converged

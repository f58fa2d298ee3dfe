import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from oqec import cli
from oqec import examples as ex
from oqec.errors import SynthesisError
from oqec.fileio import (
    channel_doc,
    decomposition_doc,
    read_decomposition,
    read_kraus,
    read_unitary,
    unitary_doc,
    write_document,
)
from oqec.random_ops import correctable_instance, random_channel, random_unitary


def run(argv, capsys):
    code = cli.main(["--format", "json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture
def files(tmp_path, capsys):
    for name in ex.NAMES:
        assert cli.main(["example", name, "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    return tmp_path


def test_example_files(files):
    names = sorted(p.name for p in files.iterdir())
    assert "example2.B1.dec.json" in names and "example2.B2.dec.json" in names
    assert "oqec.reference.recovery.json" in names
    assert "example1.AB.dec.json" in names
    assert "uns.U.unitary.json" in names


def test_example_param(tmp_path, capsys):
    code, rep = run(["example", "example2", "--param", "q=0.25", "--out", str(tmp_path)], capsys)
    assert code == 0 and len(rep["files"]) == 3
    assert rep["parameters"] == {"q": 0.25}
    code, rep = run(["example", "example2", "--param", "q=0.9", "--out", str(tmp_path)], capsys)
    assert code == 2
    code, rep = run(["example", "example2", "--param", "q", "--out", str(tmp_path)], capsys)
    assert code == 2
    code, rep = run(["example", "nope"], capsys)
    assert code == 2 and "unknown example" in rep["error"]


def test_round_trip_is_exact(tmp_path, rng):
    ch = random_channel(3, 2, rng)
    write_document(tmp_path / "c.json", channel_doc(ch.kraus))
    assert np.array_equal(read_kraus(tmp_path / "c.json"), ch.kraus)
    _, dec = correctable_instance(2, 2, 1, 2, rng)
    write_document(tmp_path / "d.json", decomposition_doc(dec))
    back = read_decomposition(tmp_path / "d.json")
    assert np.max(np.abs(back.isometry - dec.isometry)) < 1e-15
    assert (back.m, back.n) == (2, 2)
    u = random_unitary(3, rng)
    write_document(tmp_path / "u.json", unitary_doc(u))
    assert np.array_equal(read_unitary(tmp_path / "u.json"), u)
    text = (tmp_path / "d.json").read_text()
    assert '"convention"' in text and "E-" not in text


def test_validate(files, tmp_path, capsys):
    code, rep = run(["validate", str(files / "example2.channel.json")], capsys)
    assert code == 0 and rep["trace_preserving"] and not rep["unital"]
    bad = {"schema": 1, "kind": "channel", "dim": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]] * 2}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    code, rep = run(["validate", str(tmp_path / "bad.json")], capsys)
    assert code == 1 and rep["tp_residual"] > 1


@pytest.mark.parametrize("text, needle", [
    ('{"schema": 1,\n "kind": "channel",\n "dim": 2\n "kraus": []}', "line 4"),
    ('{"schema": 2, "kind": "channel"}', "schema"),
    ('{"schema": 1, "kind": "unitary", "dim": 2}', "kind"),
    ('{"schema": 1, "kind": "channel", "dim": 2, "kraus": [[[[1, 0]], [[0, 0]]]]}', "kraus[0]"),
    ('{"schema": 1, "kind": "channel", "dim": 1, "kraus": [[["x", 0]]]}', "kraus[0][0]"),
    ('{"schema": 1, "kind": "channel", "kraus": []}', "dim"),
])
def test_malformed_inputs(tmp_path, capsys, text, needle):
    (tmp_path / "m.json").write_text(text)
    code, rep = run(["validate", str(tmp_path / "m.json")], capsys)
    assert code == 2
    assert needle in rep["error"]


def test_missing_file(tmp_path, capsys):
    code, rep = run(["validate", str(tmp_path / "none.json")], capsys)
    assert code == 2


def test_analyze(files, capsys):
    code, rep = run(["analyze", str(files / "example2.channel.json")], capsys)
    assert code == 0 and not rep["unital"] and "check-ns" in rep["note"]
    code, rep = run(["analyze", str(files / "uns.channel.json"), "--seed", "4"], capsys)
    assert code == 0 and rep["seed"] == 4
    assert rep["commutant_dim"] == rep["fixed_point_dim"] == 4
    assert rep["commutant_blocks"] == [[1, 1]] * 4


def test_analyze_unital_emits_decompositions(tmp_path, capsys, rng):
    w = random_unitary(4, rng)
    f = [np.sqrt(0.5) * random_unitary(2, rng) for _ in range(2)]
    kraus = [w @ np.kron(fa, np.eye(2)) @ w.conj().T for fa in f]
    write_document(tmp_path / "col.json", channel_doc(kraus))
    out = tmp_path / "out"
    code, rep = run(["analyze", str(tmp_path / "col.json"), "--out", str(out)], capsys)
    assert code == 0 and rep["noiseless_subsystems"] == [[2, 2]]
    assert rep["commutant_dim"] == rep["fixed_point_dim"] == 4
    dec_path = rep["decomposition_files"][0]
    code, rep = run(["check-ns", str(tmp_path / "col.json"), dec_path], capsys)
    assert code == 0


def test_analyze_batch(files, tmp_path, capsys):
    batch = tmp_path / "batch"
    batch.mkdir()
    for name in ("example1", "uns"):
        (batch / f"{name}.json").write_text((files / f"{name}.channel.json").read_text())
    (batch / "broken.json").write_text("{")
    code, rep = run(["analyze", "--batch", str(batch)], capsys)
    assert code == 2
    assert len(rep["files"]) == 3
    for name in ("example1", "uns", "broken"):
        doc = json.loads((batch / f"{name}.report.json").read_text())
        assert doc["schema"] == 1


def test_check_ns_and_oqec(files, capsys):
    ch = str(files / "example2.channel.json")
    assert run(["check-ns", ch, str(files / "example2.B2.dec.json")], capsys)[0] == 0
    assert run(["check-ns", ch, str(files / "example2.B1.dec.json")], capsys)[0] == 0
    code, rep = run(["check-oqec", ch, str(files / "example2.B1.dec.json")], capsys)
    assert code == 0 and rep["m"] == 1
    code, rep = run(["check-ns", str(files / "oqec.channel.json"), str(files / "oqec.A.dec.json")], capsys)
    assert code == 1
    code, rep = run(["check-oqec", str(files / "oqec.channel.json"), str(files / "oqec.A.dec.json")], capsys)
    assert code == 0 and np.asarray(rep["lambda"]).shape == (2, 2, 2, 2, 2)
    code, rep = run(["check-ns", ch, str(files / "example1.AB.dec.json")], capsys)
    assert code == 1


def test_dimension_mismatch_is_input_error(files, tmp_path, capsys):
    from oqec.noiseless import SubsystemDecomposition
    write_document(tmp_path / "d5.json", decomposition_doc(SubsystemDecomposition.product(2, 2, 1)))
    code, rep = run(["check-ns", str(files / "example2.channel.json"), str(tmp_path / "d5.json")], capsys)
    assert code == 2 and "dim 5" in rep["error"]


def test_random_decomposition_fails_against_dephasing(files, tmp_path, capsys, rng):
    from oqec.random_ops import random_decomposition
    write_document(tmp_path / "r.json", decomposition_doc(random_decomposition(4, 1, 2, rng)))
    code, rep = run(["check-oqec", str(files / "uns.channel.json"), str(tmp_path / "r.json")], capsys)
    assert code == 1 and rep["residual"] > 1e-3


def test_recover(files, tmp_path, capsys):
    out = tmp_path / "rec.json"
    code, rep = run(["recover", str(files / "oqec.channel.json"), str(files / "oqec.A.dec.json"),
                     "--out", str(out)], capsys)
    assert code == 0 and out.exists()
    assert rep["triple_deviation"] < 1e-9
    # the B sector is noiseless for R o E
    from oqec.channel import QuantumChannel, compose
    from oqec.noiseless import verify_ns
    e = QuantumChannel(read_kraus(files / "oqec.channel.json"))
    r = QuantumChannel(read_kraus(out))
    assert verify_ns(compose(r, e), read_decomposition(files / "oqec.A.dec.json")).noiseless


def test_recover_uncorrectable_writes_nothing(files, tmp_path, capsys, rng):
    from oqec.random_ops import random_decomposition
    write_document(tmp_path / "r.json", decomposition_doc(random_decomposition(4, 2, 2, rng)))
    out = tmp_path / "rec.json"
    code, rep = run(["recover", str(files / "oqec.channel.json"), str(tmp_path / "r.json"),
                     "--out", str(out)], capsys)
    assert code == 1 and not out.exists()


def test_recover_synthesis_failure(files, tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise SynthesisError("forced")
    monkeypatch.setattr(cli, "synthesize_oqec_recovery", boom)
    out = tmp_path / "rec.json"
    code, rep = run(["recover", str(files / "oqec.channel.json"), str(files / "oqec.A.dec.json"),
                     "--out", str(out)], capsys)
    assert code == 3 and not out.exists()


def test_uns(files, tmp_path, capsys):
    ch = str(files / "uns.channel.json")
    code, rep = run(["uns", ch, str(files / "uns.U.unitary.json"), "--out", str(tmp_path / "s")], capsys)
    assert code == 0 and rep["algebra_dim"] == 6
    assert sorted(map(tuple, rep["blocks"])) == [(1, 1), (1, 1), (2, 1)]
    assert len(rep["decomposition_files"]) == 3
    code, rep = run(["uns", ch, "--candidate", "identity"], capsys)
    assert code == 0 and rep["algebra_dim"] == 4
    code, rep = run(["uns", str(files / "example2.channel.json"), "--candidate", "identity"], capsys)
    assert code == 1 and "unital" in rep["error"]
    code, rep = run(["uns", ch, "--candidate", "bogus"], capsys)
    assert code == 2


def test_uns_random_unitary(files, tmp_path, capsys, rng):
    write_document(tmp_path / "u.json", unitary_doc(random_unitary(4, rng)))
    code, rep = run(["uns", str(files / "uns.channel.json"), str(tmp_path / "u.json")], capsys)
    assert code == 0 and rep["algebra_dim"] == 1


def test_atol_env(files, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("OQEC_ATOL", "not-a-number")
    code, _ = run(["validate", str(files / "example2.channel.json")], capsys)
    assert code == 2
    k = read_kraus(files / "example2.channel.json") * (1 + 1e-7)
    write_document(tmp_path / "loose.json", channel_doc(k))
    monkeypatch.delenv("OQEC_ATOL")
    assert run(["validate", str(tmp_path / "loose.json")], capsys)[0] == 1
    monkeypatch.setenv("OQEC_ATOL", "1e-5")
    assert run(["validate", str(tmp_path / "loose.json")], capsys)[0] == 0


def test_bad_arguments(capsys):
    assert cli.main(["no-such-command"]) == 2
    assert cli.main(["analyze"]) == 2


def test_text_output(files, capsys):
    assert cli.main(["check-oqec", str(files / "oqec.channel.json"), str(files / "oqec.A.dec.json")]) == 0
    out = capsys.readouterr().out
    assert "correctable: True" in out and "lambda (shape [2, 2, 2, 2])" in out


def test_module_entry_point(files):
    env = dict(os.environ)
    src = Path(__file__).resolve().parents[1] / "src"
    env["PYTHONPATH"] = os.pathsep.join(filter(None, [str(src), env.get("PYTHONPATH", "")]))
    done = subprocess.run([sys.executable, "-m", "oqec", "--format", "json", "validate",
                           str(files / "example1.channel.json")], capture_output=True, text=True, env=env)
    assert done.returncode == 0
    assert json.loads(done.stdout)["trace_preserving"] is True

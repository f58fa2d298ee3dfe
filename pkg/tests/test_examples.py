import numpy as np
import pytest

from oqec import examples as ex
from oqec.channel import QuantumChannel
from oqec.correction import oqec_check, verify_correctable_triple
from oqec.noiseless import extract_tau, verify_ns


def test_example1_formulas():
    e = ex.example1(0.0)
    f0, _ = e.extras["F"]
    assert np.allclose(f0, np.diag([0, 1]))
    assert e.channel.report().trace_preserving
    with pytest.raises(ValueError):
        ex.example1(1.5)


def test_example1_unitality_at_half():
    # sum_i F_i F_i^dag = diag(2 gamma, 2 (1 - gamma)), so unital exactly at 1/2
    assert ex.example1(0.5).channel.is_unital()
    assert not ex.example1(0.3).channel.is_unital()
    rep = ex.example1(0.3).channel.report()
    assert rep.unital_residual == pytest.approx(np.linalg.norm(np.diag([0.6, 1.4]) - np.eye(2)) * np.sqrt(2))


@pytest.mark.parametrize("q", [0.1, 0.25, 0.4])
def test_example2_subsystems(q):
    e = ex.example2(q)
    assert not e.channel.is_unital()
    b1, b2 = e.decompositions["B1"], e.decompositions["B2"]
    assert verify_ns(e.channel, b1).noiseless
    assert verify_ns(e.channel, b2).noiseless
    assert oqec_check(e.channel, b1).correctable
    tau = extract_tau(e.channel, b2, np.eye(2))
    assert np.allclose(tau, [[1 - q, q], [q, 1 + q]], atol=1e-10)


def test_example2_outside_commutant():
    e = ex.example2(0.25)
    e0, e1 = e.channel.kraus
    s = np.zeros((4, 4))
    s[1, 1] = 1  # |01><01|
    assert np.allclose(e1 @ s, 0)
    assert not np.allclose(s @ e1, 0)


def test_example2_lambda_entries():
    q = 0.25
    e = ex.example2(q)
    lam = verify_ns(e.channel, e.decompositions["B2"]).lam
    a, b = e.extras["alpha"], e.extras["beta"]
    assert np.isclose(lam[0, 0, 0], a) and np.isclose(lam[0, 1, 1], 1)
    assert np.isclose(lam[1, 0, 0], b) and np.isclose(lam[1, 1, 1], 0)
    assert np.isclose(lam[0, 0, 1], 0) and np.isclose(lam[0, 1, 0], 0) and np.isclose(lam[1, 0, 1], 0)
    # the entry coupling P_22 E_1 P_11 is beta; trace preservation needs it
    assert np.isclose(lam[1, 1, 0], b)
    assert np.allclose(np.sum(np.abs(lam) ** 2, axis=(0, 1)), 1)
    with pytest.raises(ValueError):
        ex.example2(0.5)


def test_oqec_example_custom_basis():
    e = ex.example_oqec(second_basis=np.eye(4)[:, [1, 3, 0, 2]])
    dec = e.decompositions["A"]
    assert oqec_check(e.channel, dec).correctable
    assert verify_correctable_triple(e.recoveries["reference"].channel, e.channel, dec)
    q1, q2 = e.extras["Q1"], e.extras["Q2"]
    assert np.allclose(q1 + q2, np.eye(4))


def test_oqec_example_is_seeded():
    a, b = ex.example_oqec(seed=3), ex.example_oqec(seed=3)
    assert np.array_equal(a.channel.kraus, b.channel.kraus)
    assert not np.allclose(a.channel.kraus, ex.example_oqec(seed=4).channel.kraus)


def test_uns_example_normalization():
    e = ex.example_uns()
    assert isinstance(e.channel, QuantumChannel)
    assert e.channel.is_unital()


def test_build_dispatch():
    assert ex.build("example2", q="0.1").parameters == {"q": 0.1}
    for name in ex.NAMES:
        assert ex.build(name).name == name
    with pytest.raises(KeyError):
        ex.build("nope")

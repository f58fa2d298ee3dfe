import numpy as np
import pytest

from oqec import examples as ex
from oqec.channel import QuantumChannel, channel_distance, compose, identity_channel, remix, unitary_channel
from oqec.correction import (
    a0_deviation,
    correctable_triple_deviation,
    kl_check,
    oqec_check,
    proportionality_factor,
    reduce_to_standard,
    standard_triple_deviation,
    synthesize_oqec_recovery,
    synthesize_standard_recovery,
    verify_correctable_triple,
    verify_standard_triple,
)
from oqec.errors import DimensionError, NotCorrectableError, NotProjectorError
from oqec.noiseless import SubsystemDecomposition, verify_ns
from oqec.random_ops import (
    correctable_instance,
    noiseless_instance,
    random_channel,
    random_decomposition,
    random_isometry,
    random_unitary,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2)


def oqec_lambda_law(lam, u, w):
    """lambda'_abkl = sum conj(w_aa') w_bb' conj(u_kk') u_ll' lambda_a'b'k'l'."""
    return np.einsum("ac,bd,ke,lf,cdef->abkl", w.conj(), w, u.conj(), u, lam)


def bit_flip_channel(p):
    ops = [np.kron(np.kron(X, I2), I2), np.kron(np.kron(I2, X), I2), np.kron(np.kron(I2, I2), X)]
    return QuantumChannel([np.sqrt(1 - 3 * p) * np.eye(8)] + [np.sqrt(p) * o for o in ops])


def bit_flip_code():
    p = np.zeros((8, 8))
    p[0, 0] = p[7, 7] = 1
    return p


def test_kl_identity_channel(rng):
    v = random_isometry(4, 2, rng)
    rep = kl_check(identity_channel(4), v @ v.conj().T)
    assert rep.satisfied and np.allclose(rep.lam, [[1]])
    with pytest.raises(NotProjectorError):
        kl_check(identity_channel(4), 2 * np.eye(4))
    with pytest.raises(DimensionError):
        kl_check(identity_channel(4), np.eye(3))


def test_bit_flip_code_round_trip():
    ch, p = bit_flip_channel(0.1), bit_flip_code()
    rep = kl_check(ch, p)
    assert rep.satisfied
    assert rep.lambda_psd_mineig >= -1e-12
    r = synthesize_standard_recovery(ch, p)
    # brute force over the four code-basis operators
    code = [np.eye(8)[:, 0], np.eye(8)[:, 7]]
    re = compose(r.channel, ch)
    for a in code:
        for b in code:
            s = np.outer(a, b)
            assert np.linalg.norm(re(s) - s) < 1e-9
    assert verify_standard_triple(r.channel, ch, p)
    # a single flip mixed with a double flip is not correctable: X1 X2 X3 is logical
    x1 = np.kron(np.kron(X, I2), I2)
    x23 = np.kron(np.kron(I2, X), X)
    bad = QuantumChannel([np.sqrt(0.5) * x1, np.sqrt(0.5) * x23])
    assert not kl_check(bad, p).satisfied
    with pytest.raises(NotCorrectableError):
        synthesize_standard_recovery(bad, p)


def test_single_unitary_error(rng):
    u = random_unitary(4, rng)
    ch = unitary_channel(u)
    v = random_isometry(4, 2, rng)
    p = v @ v.conj().T
    r = synthesize_standard_recovery(ch, p)
    assert verify_standard_triple(r.channel, ch, p)
    # on the image of the code the recovery acts as U^dag
    x = u @ v @ np.array([[0.2, 0.1j], [-0.1j, 0.8]]) @ v.conj().T @ u.conj().T
    assert np.allclose(r.channel(x), u.conj().T @ x @ u)
    rr = unitary_channel(u.conj().T)
    assert verify_standard_triple(rr, ch, np.eye(4))


def test_identity_pair_standard_triple():
    assert verify_standard_triple(identity_channel(3), identity_channel(3), np.eye(3))


def test_oqec_example_lambda_table():
    e = ex.example_oqec()
    rep = oqec_check(e.channel, e.decompositions["A"])
    assert rep.correctable
    want = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for k in range(2):
            want[a, a, k, k] = 0.5
    want[0, 0, 0, 1] = want[0, 0, 1, 0] = 0.5
    want[1, 1, 0, 1] = want[1, 1, 1, 0] = -0.5
    assert np.allclose(rep.lam, want, atol=1e-12)
    assert not verify_ns(e.channel, e.decompositions["A"]).noiseless


def test_oqec_example_recoveries():
    e = ex.example_oqec()
    dec = e.decompositions["A"]
    ref = e.recoveries["reference"].channel
    assert correctable_triple_deviation(ref, e.channel, dec) < 1e-9
    assert a0_deviation(ref, e.channel, dec) < 1e-9
    synth = synthesize_oqec_recovery(e.channel, dec)
    assert correctable_triple_deviation(synth.channel, e.channel, dec) < 1e-9
    assert a0_deviation(synth.channel, e.channel, dec) < 1e-9


def test_oqec_example_standard_code():
    e = ex.example_oqec()
    p1 = e.extras["P1"]
    rep = kl_check(e.channel, p1)
    assert rep.satisfied and np.allclose(rep.lam, 0.5 * np.eye(2))
    synth = synthesize_standard_recovery(e.channel, p1)
    red = reduce_to_standard(e.recoveries["reference"].channel, e.channel, e.decompositions["A"], 1)
    assert np.allclose(red.code_projector, p1)
    # both recoveries act as the identity on the code after the noise
    c = [np.eye(4)[:, 0], np.eye(4)[:, 1]]
    a, b = compose(synth.channel, e.channel), compose(red.recovery, e.channel)
    for i in c:
        for j in c:
            s = np.outer(i, j)
            assert np.linalg.norm(a(s) - b(s)) < 1e-9


def test_kl_matches_diagonal_slice(rng):
    for _ in range(5):
        ch, dec = correctable_instance(2, 2, 2, 3, rng)
        rep = oqec_check(ch, dec)
        assert rep.lambda_psd_mineig >= -1e-12
        for k in range(2):
            kl = kl_check(ch, dec.matrix_units[k, k])
            assert kl.satisfied
            assert np.allclose(kl.lam, rep.lam[:, :, k, k])


def test_generic_decomposition_fails():
    e = ex.example_uns()
    rng = np.random.default_rng(5)
    dec = random_decomposition(4, 1, 2, rng)
    rep = oqec_check(e.channel, dec)
    assert not rep.correctable and rep.residual > 1e-3


def test_noiseless_implies_correctable(rng):
    for _ in range(5):
        ch, dec = noiseless_instance(2, 2, 1, 2, rng)
        assert oqec_check(ch, dec).correctable
        assert verify_correctable_triple(identity_channel(dec.dim), ch, dec)


def test_damage_on_a_sector_only(rng):
    # replace H^A by a fixed state, leave H^B and K alone
    m, n, extra = 2, 2, 1
    dec = random_decomposition(m * n + extra, m, n, rng)
    p0 = np.array([0.7, 0.3])
    fs = []
    for i in range(m):
        for j in range(m):
            f = np.zeros((m, m))
            f[i, j] = np.sqrt(p0[i])
            fs.append(f)
    pk = np.eye(dec.dim) - dec.projection
    kraus = [dec.embed(np.kron(f, np.eye(n))) for f in fs]
    kraus[0] = kraus[0] + pk
    ch = QuantumChannel(kraus)
    assert verify_correctable_triple(identity_channel(dec.dim), ch, dec)
    assert a0_deviation(identity_channel(dec.dim), ch, dec) > 0.1


def test_triple_matches_ns_of_composition(rng):
    for i in range(20):
        ch, dec = correctable_instance(2, 2, 2, 2, rng)
        if i % 2:
            r = synthesize_oqec_recovery(ch, dec).channel
        else:
            r = random_channel(dec.dim, 2, rng)
        a = verify_correctable_triple(r, ch, dec)
        b = verify_ns(compose(r, ch), dec).noiseless
        assert a == b == bool(i % 2)


def test_m1_matches_standard_path(rng):
    for _ in range(5):
        ch, dec = correctable_instance(1, 3, 2, 3, rng)
        r1 = synthesize_oqec_recovery(ch, dec)
        r2 = synthesize_standard_recovery(ch, dec.projection)
        assert channel_distance(r1.channel, r2.channel) < 1e-9


def test_representation_invariance(rng):
    for i in range(10):
        if i % 2:
            ch, dec = correctable_instance(2, 2, 1, 3, rng)
        else:
            ch, dec = random_channel(5, 3, rng), random_decomposition(5, 2, 2, rng)
        u, w = random_unitary(2, rng), random_unitary(3, rng)
        before = oqec_check(ch, dec)
        after = oqec_check(remix(ch, w), dec.rebase(u))
        assert before.correctable == after.correctable == bool(i % 2)
        if before.correctable:
            assert np.allclose(after.lam, oqec_lambda_law(before.lam, u, w), atol=1e-10)


def test_reduce_to_standard_examples():
    e = ex.example_oqec()
    r = synthesize_oqec_recovery(e.channel, e.decompositions["A"]).channel
    for k in (1, 2):
        red = reduce_to_standard(r, e.channel, e.decompositions["A"], k)
        assert abs(red.factor - 1) < 1e-9
        assert standard_triple_deviation(red.recovery, e.channel, red.code_projector) < 1e-9
        assert abs(proportionality_factor(red.recovery, e.channel, red.code_projector) - 1) < 1e-9
    e2 = ex.example2(0.25)
    b2 = e2.decompositions["B2"]
    red = reduce_to_standard(identity_channel(4), e2.channel, b2, 1)
    assert kl_check(e2.channel, red.code_projector).satisfied
    assert verify_standard_triple(red.recovery, e2.channel, red.code_projector)
    with pytest.raises(ValueError):
        reduce_to_standard(identity_channel(4), e2.channel, b2, 3)
    with pytest.raises(NotCorrectableError):
        reduce_to_standard(identity_channel(4), e.channel, e.decompositions["A"], 1)


def test_reduce_m1_is_compression(rng):
    ch, dec = correctable_instance(1, 2, 2, 2, rng)
    r = synthesize_oqec_recovery(ch, dec).channel
    red = reduce_to_standard(r, ch, dec, 1)
    assert np.allclose(red.code_projector, dec.projection)
    assert verify_standard_triple(red.recovery, ch, dec.projection)


def test_dimension_mismatch(rng):
    with pytest.raises(DimensionError):
        oqec_check(random_channel(3, 2, rng), SubsystemDecomposition.product(2, 2))

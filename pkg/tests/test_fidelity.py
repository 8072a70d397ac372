import math

import numpy as np
import pytest

from qinv import chancore as cc
from qinv import fidelity as fd
from qinv.ensembles import random_pure_state
from conftest import random_superop, random_unitary


def kraus_avg_fidelity(kraus):
    d = kraus[0].shape[0]
    return (d + sum(abs(np.trace(k)) ** 2 for k in kraus)) / (d * (d + 1))


def test_avg_fidelity_examples():
    assert np.isclose(fd.avg_fidelity(np.eye(9)), 1)
    assert np.isclose(fd.avg_fidelity(cc.depolarizing(3, 1).superop()), 1 / 3)
    assert np.isclose(fd.avg_fidelity(cc.landau_streater(1).superop()), 1 / 4)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_fidelity_identities(d, rng):
    phi = random_superop(d, rng)
    kraus = cc.choi_to_kraus(cc.superop_to_choi(phi))
    avg, ent = fd.avg_fidelity(phi), fd.entanglement_fidelity(phi)
    assert abs(avg - kraus_avg_fidelity(kraus)) < 1e-10
    assert abs(ent - sum(abs(np.trace(k)) ** 2 for k in kraus) / d**2) < 1e-10
    assert abs(avg - (1 + d * ent) / (d + 1)) < 1e-10
    rep = fd.fidelity_report(phi)
    assert abs(rep.avg_fidelity - (d + rep.trace_phi) / (d * (d + 1))) < 1e-10


def test_entanglement_fidelity_examples():
    assert np.isclose(fd.entanglement_fidelity(np.eye(4)), 1)
    assert abs(fd.entanglement_fidelity(cc.landau_streater(1).superop())) < 1e-12
    for d, q in [(2, 0.3), (3, 0.7)]:
        assert np.isclose(fd.entanglement_fidelity(cc.depolarizing(d, q).superop()), (1 - q) + q / d**2)


def test_monte_carlo_average_fidelity():
    rng = np.random.default_rng(5)
    for d in (2, 3, 4):
        phi = random_superop(d, rng)
        vals = np.empty(100_000)
        for i in range(vals.size):
            psi = random_pure_state(d, rng)
            out = (phi @ np.outer(psi, psi.conj()).ravel()).reshape(d, d)
            vals[i] = np.real(psi.conj() @ out @ psi)
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - fd.avg_fidelity(phi)) < 3 * se


def test_corrected_fidelity_examples(rng):
    phi = random_superop(3, rng)
    assert np.isclose(fd.corrected_fidelity(np.eye(9), phi), fd.avg_fidelity(phi))
    ls = cc.landau_streater(1).superop()
    assert np.isclose(fd.corrected_fidelity(ls, ls), 0.5)
    d = 3
    wh = cc.werner_holevo(d).superop()
    for w in np.linspace(1, d / (d - 1), 5):
        phi = cc.transverse_depolarizing(d, w).superop()
        assert np.isclose(fd.corrected_fidelity(wh, phi), fd.avg_fidelity(phi) + 2 * (w - 1) / (d + 1))


def test_corrected_fidelity_symmetry(rng):
    for d in (2, 3, 4, 5):
        a, b = random_superop(d, rng), random_superop(d, rng)
        assert fd.corrected_fidelity(a, b) == fd.corrected_fidelity(b, a)
    with pytest.raises(cc.DimensionError):
        fd.corrected_fidelity(np.eye(4), np.eye(9))


def test_bounds_for_orthogonal_mixed_unitary():
    q = [0.1, 0.6, 0.2, 0.1]
    b = fd.fidelity_bounds(cc.pauli(q).choi())
    expected = (2 * 0.6 + 1) / 3
    assert np.isclose(b.lower, expected, atol=1e-9) and np.isclose(b.upper, expected, atol=1e-9)
    assert np.isclose(b.fef, 2 * 0.6, atol=1e-9)
    b = fd.fidelity_bounds(cc.superop_to_choi(np.eye(9)))
    assert np.isclose(b.p_max, 3) and np.isclose(b.lower, 1) and np.isclose(b.upper, 1)


def test_bound_certificate_invariants(rng):
    for d in (2, 3, 4):
        choi = cc.superop_to_choi(random_superop(d, rng))
        b = fd.fidelity_bounds(choi, restarts=5)
        assert b.lower <= b.upper + 1e-9
        assert b.fef >= 1 / d - 1e-9
        assert np.isclose(b.lower, (b.fef + 1) / (d + 1))
        w = b.fef_witness
        assert np.allclose(w @ w.conj().T, np.eye(d), atol=1e-10)
        assert np.isclose(fd.corrected_fidelity(cc.unitary_superop(w), cc.choi_to_superop(choi)), b.lower)


def test_fef_of_unitary_channel(rng):
    v = random_unitary(3, rng)
    f, w = fd.fully_entangled_fraction(cc.superop_to_choi(cc.unitary_superop(v)))
    assert np.isclose(f, 3)
    # The witness undoes V up to a global phase.
    prod = w @ v
    assert np.allclose(prod / prod[0, 0], np.eye(3), atol=1e-8)


def test_fef_of_completely_depolarizing():
    choi = cc.depolarizing(2, 1).choi()
    f, _ = fd.fully_entangled_fraction(choi)
    assert np.isclose(f, 1 / 2)
    # Brute force over a grid of qubit unitaries exp(i a n.sigma).
    vals = []
    for a in np.linspace(0, np.pi, 7):
        for th in np.linspace(0, np.pi, 5):
            n = np.array([np.sin(th), 0, np.cos(th)])
            u = np.cos(a) * np.eye(2) + 1j * np.sin(a) * sum(ni * s for ni, s in zip(n, cc.PAULI[1:]))
            beta = cc.vec(u) / np.sqrt(2)
            vals.append(np.real(beta.conj() @ choi @ beta))
    assert np.allclose(vals, 0.5)


def test_fef_monotone_in_restarts(rng):
    choi = cc.superop_to_choi(random_superop(4, rng))
    vals = [fd.fully_entangled_fraction(choi, restarts=r, seed=3)[0] for r in (0, 1, 3, 8)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_min_entropy():
    assert np.isclose(fd.min_entropy_of_channel(1.0, 4), -2)
    assert np.isclose(fd.min_entropy_of_channel(0.5, 2), 0)
    with pytest.raises(ValueError):
        fd.min_entropy_of_channel(0.0, 2)


def test_purity_and_unitality(rng):
    u = random_unitary(3, rng)
    phi = cc.unitary_superop(u)
    assert np.isclose(fd.jamiolkowski_purity(cc.superop_to_choi(phi)), 1)
    assert np.isclose(fd.unitality_of_superop(phi), 1)
    dep = cc.depolarizing(3, 1)
    assert np.isclose(fd.jamiolkowski_purity(dep.choi()), 1 / 9)
    assert np.isclose(fd.unitality(dep.affine()), 1)
    assert fd.jamiolkowski_purity(cc.superop_to_choi(random_superop(3, rng))) < 1 - 1e-3


def test_n_copy_inequality(rng):
    for d in (2, 3):
        for _ in range(5):
            phi = random_superop(d, rng)
            if not 1 <= np.real(np.trace(phi)) <= d * d:
                continue
            f1 = fd.avg_fidelity(phi)
            f2 = fd.avg_fidelity(cc.tensor(phi, phi))
            assert f2 <= f1**2 + 1e-12
            x = np.real(np.trace(phi))
            for n in (2, 3):
                assert (d**n + x**n) / (d**n * (d**n + 1)) <= f1**n + 1e-12
            assert np.isclose(f2, (d**2 + x**2) / (d**2 * (d**2 + 1)))


def test_weight_matrix_reproduces_trace(rng):
    for d in (2, 3):
        phi, phi2 = random_superop(d, rng), random_superop(d, rng)
        a = fd.correction_choi_weight(cc.superop_to_choi(phi))
        assert np.isclose(np.trace(a @ cc.superop_to_choi(phi2)), np.trace(phi2 @ phi), atol=1e-9)
        assert np.allclose(a, a.conj().T)


def test_imaginary_residue_rejected():
    with pytest.raises(ValueError):
        fd.avg_fidelity(np.eye(4) * (1 + 1e-3j))

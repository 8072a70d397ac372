"""Closed-form quasi-inverses for channel families with known structure."""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import minimize

from ..chancore import (
    Channel,
    check_orthogonal_conjugations,
    commuting_unitary_mixture,
    depolarizing,
    identity_superop,
    kraus_to_superop,
    mixed_unitary,
    orthogonal_conjugations,
    phase_coherences,
    superop_to_choi,
    tensor,
    transverse_depolarizing,
    unitary_superop,
)
from ..fidelity import BoundCertificate, avg_fidelity, corrected_fidelity
from .result import QiResult

TIE_TOL = 1e-12


def _result(phi, qi_superop, tag, solver, bound=None) -> QiResult:
    return QiResult(
        qi=Channel.from_choi(superop_to_choi(qi_superop), tag),
        fidelity_before=avg_fidelity(phi),
        fidelity_after=corrected_fidelity(qi_superop, phi),
        bound=bound,
        solver={"method": "analytic", "converged": True, **solver},
    )


def _argmax_with_ties(values) -> tuple[int, list[int]]:
    values = np.asarray(values, dtype=float)
    top = values.max()
    ties = np.where(values >= top - TIE_TOL * max(1.0, abs(top)))[0]
    return int(ties[0]), ties.tolist()


def qi_orthogonal_mixed_unitary(weights, unitaries) -> QiResult:
    """Mixture of unitaries with ``Tr(V_a^dag V_b) = d delta_ab``: undo the likeliest one."""
    us = [np.asarray(u, dtype=complex) for u in unitaries]
    d = us[0].shape[0]
    gram = np.array([[np.trace(a.conj().T @ b) for b in us] for a in us])
    if np.max(np.abs(gram - d * np.eye(len(us)))) > 1e-8:
        raise ValueError("unitaries are not Hilbert-Schmidt orthogonal; use quasi_inverse_lp instead")
    phi = mixed_unitary(weights, us).superop()
    w = np.asarray(weights, dtype=float)
    m, ties = _argmax_with_ties(w)
    vm_dag = us[m].conj().T
    p_max = d * w[m]
    bound = BoundCertificate((p_max + 1) / (d + 1), (p_max + 1) / (d + 1), p_max, p_max, vm_dag)
    return _result(phi, unitary_superop(vm_dag), {"family": "unitary", "unitary": vm_dag},
                   {"degenerate": len(ties) > 1, "ties": ties}, bound)


def qi_orthogonal_conjugations(x_ops) -> QiResult:
    """The dual channel ``rho -> sum X^dag rho X`` is the quasi-inverse."""
    check_orthogonal_conjugations(x_ops)
    xs = [np.asarray(x, dtype=complex) for x in x_ops]
    phi = orthogonal_conjugations(xs).superop()
    dual = kraus_to_superop([x.conj().T for x in xs])
    d, q = xs[0].shape[0], len(xs)
    expected = (d + q) / (q * (d + 1))
    return _result(phi, dual, {"family": "dual"}, {"expected": expected})


def qi_depolarizing(d: int, q: float) -> QiResult:
    """Depolarizing noise cannot be corrected: the quasi-inverse is the identity."""
    phi = depolarizing(d, q).superop()
    return _result(phi, identity_superop(d), {"family": "identity"}, {"degenerate": q == 1})


def qi_transverse_depolarizing(d: int, w: float) -> QiResult:
    """``E_-`` (Werner-Holevo) for ``w >= 1``, ``E_+`` for ``w <= 1``; both at ``w = 1``."""
    phi = transverse_depolarizing(d, w).superop()
    if w >= 1:
        wq, name = d / (d - 1), "E-"
    else:
        wq, name = d / (d + 1), "E+"
    qi = transverse_depolarizing(d, wq)
    return _result(phi, qi.superop(), {"family": "transverse_depolarizing", "params": {"d": d, "w": wq}},
                   {"branch": name, "degenerate": bool(np.isclose(w, 1.0, atol=1e-12)),
                    "expected_gain": max(0.0, 2 * (w - 1) / (d + 1))})


def _phase_objective(theta, wmat):
    phi = np.concatenate([[1.0], np.exp(1j * theta)])
    wphi = wmat @ phi
    val = np.real(np.vdot(phi, wphi))
    grad = 2 * np.real(-1j * np.conj(phi[1:]) * wphi[1:])
    return -val, -grad


def maximize_phase_form(wmat: np.ndarray, grid: int = 64, starts: int = 64,
                        seed: int | None = 0) -> tuple[float, np.ndarray]:
    """Maximize ``phi^dag W phi`` over vectors of unit-modulus entries with ``phi_0 = 1``.

    For ``d <= 3`` every point of a ``grid``-per-phase lattice is scored and the best
    ones polished by BFGS; larger ``d`` uses ``starts`` random phase vectors instead.
    """
    d = wmat.shape[0]
    if d == 1:
        return float(np.real(wmat[0, 0])), np.ones(1, dtype=complex)
    if d <= 3:
        axis = 2 * np.pi * np.arange(grid) / grid
        pts = np.array(list(itertools.product(axis, repeat=d - 1)))
        vecs = np.hstack([np.ones((len(pts), 1)), np.exp(1j * pts)])
        vals = np.real(np.einsum("ki,ij,kj->k", vecs.conj(), wmat, vecs))
        cands = pts[np.argsort(vals)[::-1][:8]]
    else:
        rng = np.random.default_rng(seed)
        cands = rng.uniform(0, 2 * np.pi, size=(starts, d - 1))
    best_val, best_theta = -np.inf, None
    for t0 in cands:
        res = minimize(_phase_objective, t0, args=(wmat,), jac=True, method="BFGS",
                       options={"gtol": 1e-12})
        if -res.fun > best_val:
            best_val, best_theta = -res.fun, res.x
    return float(best_val), np.concatenate([[1.0], np.exp(1j * best_theta)])


def qi_commuting_unitary(weights, phases, grid: int = 64) -> QiResult:
    """Mixture of commuting (diagonal) unitaries: the best diagonal unitary correction.

    Exact for ``d <= 3``; for larger ``d`` the result is flagged heuristic since the
    quasi-inverse need not be unitary there.
    """
    w = np.asarray(weights, dtype=float)
    th = np.atleast_2d(np.asarray(phases, dtype=float))
    d = th.shape[1]
    wmat = phase_coherences(w, th)
    best, phi_vec = maximize_phase_form(wmat, grid)
    u = np.diag(phi_vec.conj())
    phi = commuting_unitary_mixture(w, th).superop()
    res = _result(phi, unitary_superop(u), {"family": "unitary", "unitary": u},
                  {"heuristic": d > 3, "phase_form_max": best})
    return res


def qi_tensor(qi1: QiResult, qi2: QiResult) -> Channel:
    """Quasi-inverse of ``E1 (x) E2`` as the tensor product of the factors' quasi-inverses."""
    if not (qi1.converged and qi2.converged):
        raise ValueError("both quasi-inverses must come from converged solves")
    return Channel.from_superop(tensor(qi1.superop(), qi2.superop()))

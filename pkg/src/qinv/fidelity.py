"""Fidelity measures, the corrected-fidelity objective and its spectral bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _ascent
from .chancore import DimensionError, dim_of, superop_to_affine, swap

IMAG_TOL = 1e-9


def _real(z: complex, what: str) -> float:
    if abs(np.imag(z)) > IMAG_TOL * max(1.0, abs(z)):
        raise ValueError(f"{what} has imaginary part {np.imag(z):.3g}; the channel is malformed")
    return float(np.real(z))


@dataclass(frozen=True)
class FidelityReport:
    avg_fidelity: float
    ent_fidelity: float
    trace_phi: float


@dataclass(frozen=True)
class BoundCertificate:
    lower: float
    upper: float
    p_max: float
    fef: float
    fef_witness: np.ndarray


def trace_phi(phi: np.ndarray) -> float:
    return _real(np.trace(phi), "Tr Phi")


def avg_fidelity(phi: np.ndarray) -> float:
    """Average fidelity over Haar-random pure inputs, ``(d + Tr Phi) / (d (d + 1))``."""
    d = dim_of(phi)
    return (d + trace_phi(phi)) / (d * (d + 1))


def entanglement_fidelity(phi: np.ndarray) -> float:
    d = dim_of(phi)
    return trace_phi(phi) / d**2


def fidelity_report(phi: np.ndarray) -> FidelityReport:
    return FidelityReport(avg_fidelity(phi), entanglement_fidelity(phi), trace_phi(phi))


def _trace_product(a: np.ndarray, b: np.ndarray) -> float:
    # Re Tr(A B) summed with fsum so that swapping A and B gives the same bits.
    return math.fsum(np.real(a * b.T).ravel())


def corrected_fidelity(phi_prime: np.ndarray, phi: np.ndarray) -> float:
    """Average fidelity of ``E' o E``: ``(1 + Re Tr(Phi' Phi) / d) / (d + 1)``."""
    if phi_prime.shape != phi.shape:
        raise DimensionError(f"dimension mismatch: {phi_prime.shape} vs {phi.shape}")
    d = dim_of(phi)
    return (1 + _trace_product(phi_prime, phi) / d) / (d + 1)


def fully_entangled_fraction(choi: np.ndarray, restarts: int = 20, iters: int = 500,
                             seed: int | None = 0) -> tuple[float, np.ndarray]:
    """Lower estimate of ``max <beta|C|beta>`` over maximally entangled ``|beta>``.

    ``|beta> = (U (x) I)|phi+>`` is optimized over unitaries from the identity plus
    ``restarts`` random ``exp(iH)`` starts.  The returned witness is the correcting
    unitary ``W = U^dag``: conjugation by ``W`` after the channel attains the lower
    bound ``(f + 1) / (d + 1)``.
    """
    d = dim_of(choi)
    val, u = _ascent.best_unitary(choi, restarts, iters, seed)
    return val / d, u.conj().T


def fidelity_bounds(choi: np.ndarray, restarts: int = 20, iters: int = 500,
                    seed: int | None = 0) -> BoundCertificate:
    d = dim_of(choi)
    p_max = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[-1])
    f, w = fully_entangled_fraction(choi, restarts, iters, seed)
    return BoundCertificate((f + 1) / (d + 1), (p_max + 1) / (d + 1), p_max, f, w)


def min_entropy_of_channel(fe_corrected: float, d: int) -> float:
    """Conditional min-entropy ``-log2(d F_E)`` of the optimally corrected channel."""
    if not fe_corrected > 0:
        raise ValueError(f"entanglement fidelity must be positive, got {fe_corrected}")
    return -math.log2(d * fe_corrected)


def jamiolkowski_purity(choi: np.ndarray) -> float:
    d = dim_of(choi)
    j = choi / d
    return _real(np.vdot(j.conj().T, j), "purity")


def unitality(affine) -> float:
    t = np.asarray(affine.t if hasattr(affine, "t") else affine[1])
    return float(1 - t @ t)


def unitality_of_superop(phi: np.ndarray) -> float:
    return unitality(superop_to_affine(phi))


def correction_choi_weight(choi: np.ndarray) -> np.ndarray:
    """Matrix ``A`` with ``Tr(Phi' Phi) = Tr(A C')`` for every candidate Choi ``C'``.

    ``A = (S C S)^T`` with ``S`` the swap; it is Hermitian and positive whenever ``C`` is.
    """
    d = dim_of(choi)
    s = swap(d)
    return (s @ choi @ s).T

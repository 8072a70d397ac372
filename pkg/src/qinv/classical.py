"""Classical channels: column-stochastic matrices and their quasi-inverses.

Column ``j`` of ``T`` is the output distribution for input letter ``j``.  The
quasi-inverse maximizes ``Tr(T' T)`` over stochastic ``T'``; it is found row by row:
keep the largest entry of each row of ``T``, set it to one, zero the rest, transpose.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chancore import Channel, dim_of, gell_mann_basis, superop_to_choi

STOCH_TOL = 1e-10
RENORM_TOL = 1e-8
TIE_RTOL = 1e-12
BRUTE_MAX_DIM = 6


class NotStochasticError(ValueError):
    pass


def check_stochastic(t: np.ndarray, tol: float = STOCH_TOL) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise NotStochasticError(f"stochastic matrix must be square, got shape {t.shape}")
    if np.min(t) < -1e-12:
        raise NotStochasticError(f"negative entry {np.min(t):.3g}")
    dev = np.max(np.abs(t.sum(axis=0) - 1))
    if dev > tol:
        raise NotStochasticError(f"column sums deviate from 1 by {dev:.3g}")
    return t


def renormalize(t: np.ndarray, tol: float = RENORM_TOL) -> np.ndarray:
    """Rescale columns to sum to one if they are already within ``tol``; else reject."""
    t = np.asarray(t, dtype=float)
    sums = t.sum(axis=0)
    if np.max(np.abs(sums - 1)) > tol:
        raise NotStochasticError(f"column sums deviate from 1 by {np.max(np.abs(sums - 1)):.3g}")
    return check_stochastic(np.clip(t, 0, None) / sums)


@dataclass
class ClassicalQiResult:
    """Canonical deterministic quasi-inverse plus the full tie structure.

    ``ties[i]`` lists every column index attaining the maximum of row ``i``; any
    assignment of row ``i`` to one of them (or convex mixture) is equally optimal.
    """

    qi: np.ndarray
    ties: list[list[int]]
    fidelity_before: float
    fidelity_after: float

    @property
    def has_ties(self) -> bool:
        return any(len(t) > 1 for t in self.ties)


def classical_avg_fidelity(t: np.ndarray) -> float:
    t = check_stochastic(t)
    return float(np.trace(t)) / t.shape[0]


def row_ties(t: np.ndarray, rtol: float = TIE_RTOL) -> list[list[int]]:
    top = t.max(axis=1, keepdims=True)
    hits = t >= top - rtol * np.maximum(np.abs(top), 1e-300)
    return [np.flatnonzero(row).tolist() for row in hits]


def classical_quasi_inverse(t: np.ndarray) -> ClassicalQiResult:
    t = check_stochastic(t)
    d = t.shape[0]
    ties = row_ties(t)
    qi = np.zeros((d, d))
    for i, cols in enumerate(ties):
        qi[cols[0], i] = 1.0
    after = math.fsum(t.max(axis=1)) / d
    return ClassicalQiResult(qi, ties, float(np.trace(t)) / d, after)


def deterministic_maps(d: int):
    """All ``d**d`` deterministic column-stochastic matrices."""
    eye = np.eye(d)
    for image in itertools.product(range(d), repeat=d):
        yield eye[:, list(image)]


def classical_qi_brute(t: np.ndarray) -> tuple[np.ndarray, float]:
    """Exhaustive maximum of ``Tr(T' T) / d`` over deterministic ``T'`` (``d <= 6``)."""
    t = check_stochastic(t)
    d = t.shape[0]
    if d > BRUTE_MAX_DIM:
        raise ValueError(f"exhaustive search is limited to d <= {BRUTE_MAX_DIM}, got d={d}")
    # T' sends output letter i to image[i], so Tr(T' T) = sum_i T[i, image[i]].
    best_val, best_img = -np.inf, None
    for image in itertools.product(range(d), repeat=d):
        val = math.fsum(t[i, image[i]] for i in range(d))
        if val > best_val:
            best_val, best_img = val, image
    qi = np.zeros((d, d))
    qi[list(best_img), np.arange(d)] = 1.0
    return qi, best_val / d


def superdecohere(channel) -> np.ndarray:
    """Stochastic matrix ``T_ij = <i|E(|j><j|)|i>`` read off the Choi diagonal."""
    if isinstance(channel, Channel):
        choi = channel.choi()
    else:
        choi = superop_to_choi(np.asarray(channel))
    d = dim_of(choi)
    # Choi index (a, j): output a, input j.
    return np.real(np.diag(choi)).reshape(d, d).copy()


def classical_affine(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Affine action on the diagonal Bloch coordinates (the diagonal generators).

    With ``h_k`` the diagonals of the diagonal generators, ``M_kl = h_k . T h_l / (d (d - 1))``
    and ``t_k = h_k . T 1 / (d (d - 1))``.
    """
    t = check_stochastic(t)
    d = t.shape[0]
    h = np.real(np.array([np.diag(g) for g in gell_mann_basis(d)[: d - 1]]))
    norm = d * (d - 1)
    return h @ t @ h.T / norm, h @ t @ np.ones(d) / norm


@dataclass(frozen=True)
class EnsembleTheory:
    mean_before: Fraction
    var_before: Fraction
    mean_after: Fraction


def classical_ensemble_theory(d: int) -> EnsembleTheory:
    """Exact moments for stochastic matrices with uniform (Dirichlet) columns.

    The alternating sum for the mean row maximum is evaluated in rationals because it
    cancels catastrophically in floating point for ``d`` above about 20.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"d must be an integer >= 2, got {d}")
    d = int(d)
    s = sum(Fraction((-1) ** k * (d - 1) * k, (d - 1) * k + 1) * math.comb(d, k) for k in range(d + 1))
    return EnsembleTheory(Fraction(1, d), Fraction(d - 1, d**3 * (d + 1)), 1 + s)


def power_law_fit(ds, values) -> tuple[float, float]:
    """Least-squares fit of ``log v = log c + x log d``; returns ``(c, x)``."""
    x, logc = np.polyfit(np.log(np.asarray(ds, float)), np.log(np.asarray(values, float)), 1)
    return float(np.exp(logc)), float(x)


def permutation_matrix(perm) -> np.ndarray:
    """Matrix sending basis letter ``j`` to ``perm[j]``."""
    perm = list(perm)
    p = np.zeros((len(perm), len(perm)))
    p[perm, np.arange(len(perm))] = 1.0
    return p


def permutation_mixture(weights, perms) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
        raise ValueError("weights must be a probability vector")
    return sum(wi * permutation_matrix(p) for wi, p in zip(w, perms))

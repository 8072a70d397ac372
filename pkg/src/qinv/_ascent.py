"""Minorize-maximize ascent of a convex quadratic over co-isometries.

Maximizes ``f(M) = sum_b vec(M_b)^dag C vec(M_b)`` over ``M = [M_1 ... M_r]`` (a
``d x r d`` matrix with ``M M^dag = I``), where ``C`` is a positive semidefinite
``d**2 x d**2`` matrix.  Since ``f`` is convex, linearizing at the current point and
maximizing the linear model over the co-isometries (a polar decomposition) never
decreases ``f``.

With ``C`` the Choi matrix of a channel ``E`` and ``L_b = M_b^dag``, the maps
``rho -> sum_b L_b rho L_b^dag`` range over all channels with at most ``r`` Kraus
operators and ``f = Tr(Phi_corr Phi_E)``.  ``r = 1`` is the unitary correction problem
(equivalently the fully entangled fraction); ``r = d**2`` is the full quasi-inverse.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm


def polar_coisometry(g: np.ndarray) -> np.ndarray:
    """Closest co-isometry ``U V^dag`` to a ``d x k`` matrix (``k >= d``)."""
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def blocks_to_wide(blocks: np.ndarray) -> np.ndarray:
    """``(r, d, d)`` stack -> ``d x r d`` matrix ``[M_1 ... M_r]``."""
    r, d, _ = blocks.shape
    return blocks.transpose(1, 0, 2).reshape(d, r * d)


def wide_to_blocks(m: np.ndarray, r: int) -> np.ndarray:
    d = m.shape[0]
    return m.reshape(d, r, d).transpose(1, 0, 2)


def objective(choi: np.ndarray, blocks: np.ndarray) -> float:
    v = blocks.reshape(blocks.shape[0], -1)
    return float(np.real(np.einsum("bi,ij,bj->", v.conj(), choi, v)))


def random_unitary_exp(d: int, rng: np.random.Generator, scale: float = np.pi) -> np.ndarray:
    """``exp(i H)`` for a random Hermitian ``H`` (Gaussian entries times ``scale``)."""
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = (a + a.conj().T) / 2
    return expm(1j * scale * h / np.sqrt(d))


def random_coisometry(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, r * d)) + 1j * rng.standard_normal((d, r * d))
    return wide_to_blocks(polar_coisometry(g), r)


def ascend(choi: np.ndarray, blocks: np.ndarray, iters: int = 500, tol: float = 1e-13):
    """Run the ascent from ``blocks``; returns ``(value, blocks, iterations)``.

    Stops once a step moves the blocks by less than ``tol`` in Frobenius norm.  The
    objective converges quadratically faster than the iterate, so stopping on the
    value alone leaves the point (and any dual certificate built from it) loose.
    """
    r, d, _ = blocks.shape
    it = 0
    for it in range(1, iters + 1):
        grad = (blocks.reshape(r, -1) @ choi.T).reshape(r, d, d)
        new = wide_to_blocks(polar_coisometry(blocks_to_wide(grad)), r)
        step = np.linalg.norm(new - blocks)
        blocks = new
        if step <= tol:
            break
    return objective(choi, blocks), blocks, it


def blocks_to_choi(blocks: np.ndarray) -> np.ndarray:
    """Choi matrix of the channel with Kraus operators ``L_b = M_b^dag``."""
    kraus = blocks.conj().transpose(0, 2, 1)
    v = kraus.reshape(kraus.shape[0], -1)
    return v.T @ v.conj()


def best_unitary(choi: np.ndarray, restarts: int, iters: int, seed: int | None, tol: float = 1e-13):
    """Best value of ``vec(U)^dag C vec(U)`` over unitaries, with deterministic restarts.

    Start 0 is the identity; start ``k`` draws ``exp(iH)`` from its own substream of
    ``seed``, so adding restarts never lowers the result.  Returns ``(value, U)``.
    """
    d = int(round(np.sqrt(choi.shape[0])))
    best_val, best_u = -np.inf, None
    ss = np.random.SeedSequence(seed if seed is not None else 0)
    children = ss.spawn(max(restarts, 0))
    starts = [np.eye(d, dtype=complex)]
    starts += [random_unitary_exp(d, np.random.default_rng(c)) for c in children]
    for u0 in starts:
        val, blocks, _ = ascend(choi, u0[None], iters, tol)
        if val > best_val:
            best_val, best_u = val, blocks[0]
    return best_val, best_u

"""Quasi-inversion as a linear program with positive-semidefinite cutting planes.

The candidate Choi matrix ``C'`` of the correcting channel is folded into ``n**2``
real variables (``n = d**2``): the diagonal, then real and imaginary parts of the
strict upper triangle.  Trace preservation is a set of linear equalities and
positivity is relaxed to finitely many cuts ``<v|C'|v> >= 0``.  Each LP optimum is
checked against the exact cone: its most negative eigenvector becomes a new cut.

Cut generation starts from a strong pool.  A minorize-maximize ascent over Kraus
isometries produces a feasible channel first; its dual slack matrix and near-null
directions are added to the random and product-vector seeds.  The relaxation is then
usually tight from the first solve, and the loop also stops once the LP upper bound
and the best feasible value agree to ``gap_tol``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .. import _ascent
from ..chancore import Channel, choi_to_kraus, choi_to_superop, dim_of, partial_trace_out, superop_to_choi
from ..fidelity import avg_fidelity, correction_choi_weight, corrected_fidelity, fidelity_bounds
from .result import QiResult

_HIGHS = dict(primal_feasibility_tolerance=1e-10, dual_feasibility_tolerance=1e-10)


class LpInfeasibleError(RuntimeError):
    pass


@dataclass
class LpOptions:
    tol_psd: float = 1e-8
    max_cuts: int = 500
    seed: int | None = 0
    mode: str = "cutting"
    n_random: int | None = None
    warm_start: bool = True
    gap_tol: float = 1e-10
    restarts: int = 20
    iters: int = 500
    ascent_iters: int = 3000
    bounds: bool = True


class HermitianParam:
    """Folded real coordinates ``x = [diag, Re(upper), Im(upper)]`` of an ``n x n`` Hermitian."""

    def __init__(self, n: int):
        self.n = n
        self.iu = np.triu_indices(n, 1)
        self.size = n * n

    def coeffs(self, a: np.ndarray) -> np.ndarray:
        """Vector ``c`` with ``Re Tr(A X) = c . x``."""
        i, j = self.iu
        s = a[j, i] + a[i, j]
        t = a[j, i] - a[i, j]
        return np.concatenate([np.real(np.diag(a)), np.real(s), -np.imag(t)])

    def cut(self, v: np.ndarray) -> np.ndarray:
        """Coefficients of ``<v|X|v>``."""
        i, j = self.iu
        p = np.conj(v[i]) * v[j]
        return np.concatenate([np.abs(v) ** 2, 2 * np.real(p), -2 * np.imag(p)])

    def build(self, x: np.ndarray) -> np.ndarray:
        n = self.n
        i, j = self.iu
        m = len(i)
        out = np.diag(x[:n]).astype(complex)
        out[i, j] = x[n:n + m] + 1j * x[n + m:]
        out[j, i] = np.conj(out[i, j])
        return out

    def flatten(self, a: np.ndarray) -> np.ndarray:
        i, j = self.iu
        return np.concatenate([np.real(np.diag(a)), np.real(a[i, j]), np.imag(a[i, j])])

    def box(self) -> list[tuple[float, float]]:
        # A TP Choi has diagonal entries in [0, 1] and off-diagonal moduli below 1.
        m = len(self.iu[0])
        return [(0.0, 1.0)] * self.n + [(-1.0, 1.0)] * (2 * m)


def tp_equalities(d: int, param: HermitianParam) -> tuple[np.ndarray, np.ndarray]:
    """Rows and right-hand sides of ``Tr_out C' = I`` (``d**2`` real equations)."""
    n = d * d
    rows, rhs = [], []
    for j in range(d):
        for l in range(j, d):
            a = np.zeros((n, n), dtype=complex)
            a[np.arange(d) * d + l, np.arange(d) * d + j] = 1.0
            rows.append(param.coeffs(a))
            rhs.append(1.0 if j == l else 0.0)
            if l > j:
                rows.append(param.coeffs(-1j * a))
                rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def _unit_vectors(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def dual_slack(weight: np.ndarray, choi_qi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``Y = Tr_out(A C')`` (Hermitian part) and ``Z = I (x) Y - A``."""
    d = dim_of(weight)
    y = partial_trace_out(weight @ choi_qi)
    y = (y + y.conj().T) / 2
    return y, np.kron(np.eye(d), y) - weight


def dual_upper_bound(weight: np.ndarray, choi_qi: np.ndarray) -> float:
    """Rigorous upper bound on ``max Tr(A C')`` built from any trial ``C'``."""
    d = dim_of(weight)
    y, z = dual_slack(weight, choi_qi)
    lo = np.linalg.eigvalsh(z)[0]
    return float(np.real(np.trace(y)) + d * max(0.0, -lo))


def _face_has_kernel(basis: np.ndarray, d: int, tol: float = 1e-8) -> bool:
    """True if ``X -> Tr_out(N X N^dag)`` has a nontrivial kernel on Hermitian ``X``."""
    k = basis.shape[1]
    if k == 0:
        return False
    cols = []
    for a in range(k):
        for b in range(a, k):
            for phase in ((1.0,) if a == b else (1.0, 1j)):
                e = np.zeros((k, k), dtype=complex)
                e[a, b] = phase
                e[b, a] = np.conj(phase)
                img = partial_trace_out(basis @ e @ basis.conj().T)
                cols.append(np.concatenate([img.real.ravel(), img.imag.ravel()]))
    mat = np.array(cols).T
    if mat.shape[1] > mat.shape[0]:
        return True
    s = np.linalg.svd(mat, compute_uv=False)
    return bool(s[-1] < tol * max(1.0, s[0]))


def is_degenerate(weight: np.ndarray, choi_qi: np.ndarray, null_tol: float = 1e-6) -> bool:
    """Detect a non-unique optimum from the optimal face of the dual slack.

    Every optimum lives in the null space ``N`` of ``Z``.  If some nonzero Hermitian
    ``X`` on that face has ``Tr_out(N X N^dag) = 0``, moving along it keeps trace
    preservation, so the optimum is generically not unique.
    """
    d = dim_of(weight)
    _, z = dual_slack(weight, choi_qi)
    w, v = np.linalg.eigh(z)
    scale = max(1.0, float(np.max(np.abs(w))))
    face = v[:, w <= null_tol * scale]
    return _face_has_kernel(face, d)


def project_feasible(cand: np.ndarray) -> np.ndarray:
    """Nearby channel: clip negative eigenvalues, then restore ``Tr_out = I``."""
    d = dim_of(cand)
    w, v = np.linalg.eigh((cand + cand.conj().T) / 2)
    psd = (v * np.clip(w, 0, None)) @ v.conj().T
    y = partial_trace_out(psd)
    wy, vy = np.linalg.eigh((y + y.conj().T) / 2)
    if wy[0] <= 1e-12:
        s = 1e-6
        psd = (1 - s) * psd + s * np.eye(d * d) / d
        wy, vy = np.linalg.eigh(partial_trace_out(psd))
    k = np.kron(np.eye(d), (vy / np.sqrt(wy)) @ vy.conj().T)
    return k @ psd @ k


def choi_to_blocks(choi_qi: np.ndarray) -> np.ndarray:
    """Ascent variables ``M_b = L_b^dag`` for the Kraus operators of ``choi_qi``, padded to ``d**2``."""
    d = dim_of(choi_qi)
    kraus = choi_to_kraus(choi_qi, tol=np.inf)
    blocks = np.zeros((d * d, d, d), dtype=complex)
    for b, k in enumerate(kraus[: d * d]):
        blocks[b] = k.conj().T
    return blocks


def warm_start(choi: np.ndarray, unitary: np.ndarray | None, seed: int | None,
               iters: int = 3000) -> tuple[float, np.ndarray, bool]:
    """Best of a few isometry ascents; returns ``(value, blocks, settled)``.

    ``settled`` is False when the best ascent ran out of iterations before its step
    norm fell below tolerance, so it is worth continuing.

    An exact unitary start with zero extra Kraus blocks is a fixed point of the
    ascent, so the unitary starts are perturbed.
    """
    d = dim_of(choi)
    r = d * d
    rng = np.random.default_rng(np.random.SeedSequence([0 if seed is None else seed, 7]))
    starts = []
    for u in (np.eye(d), unitary):
        if u is None:
            continue
        g = 1e-3 * (rng.standard_normal((r, d, d)) + 1j * rng.standard_normal((r, d, d)))
        g[0] += u
        starts.append(_ascent.wide_to_blocks(_ascent.polar_coisometry(_ascent.blocks_to_wide(g)), r))
    starts.append(_ascent.random_coisometry(d, r, rng))
    best = (-np.inf, None, True)
    for b0 in starts:
        val, blocks, it = _ascent.ascend(choi, b0, iters)
        if val > best[0]:
            best = (val, blocks, it < iters)
    return best


def _solve(c, cuts, a_eq, b_eq, box):
    # HiGHS occasionally stops with an unset status on these dense problems; retrying
    # without presolve, then with the interior-point method, has always recovered.
    attempts = [("highs", _HIGHS), ("highs", {**_HIGHS, "presolve": False}), ("highs-ipm", {})]
    for method, options in attempts:
        res = linprog(c, A_ub=-np.asarray(cuts), b_ub=np.zeros(len(cuts)), A_eq=a_eq, b_eq=b_eq,
                      bounds=box, method=method, options=options)
        if res.status == 2:
            raise LpInfeasibleError("LP relaxation is infeasible; the identity channel should always be feasible")
        if res.status == 0:
            return res
    raise RuntimeError(f"LP solver failed: {res.message}")


def quasi_inverse_lp(phi: np.ndarray, opts: LpOptions | None = None, **kw) -> QiResult:
    """Quasi-inverse of the channel with superoperator ``phi`` (``d <= 6``).

    Terminates when the LP optimum is positive to ``tol_psd``, when the best feasible
    channel is within ``gap_tol`` (fidelity units) of an upper bound, or after
    ``max_cuts`` added cuts.  The upper bound is the smaller of the LP value and the
    dual certificate of the best feasible channel.
    """
    opts = replace(opts or LpOptions(), **kw)
    phi = np.asarray(phi, dtype=complex)
    d = dim_of(phi)
    if d > 6:
        raise ValueError(f"the LP solver supports d <= 6, got d={d}")
    if opts.mode not in ("cutting", "random"):
        raise ValueError(f"unknown LP mode {opts.mode!r}; use 'cutting' or 'random'")
    n = d * d
    choi = superop_to_choi(phi)
    choi = (choi + choi.conj().T) / 2
    weight = correction_choi_weight(choi)
    weight = (weight + weight.conj().T) / 2
    norm = d * (d + 1)

    param = HermitianParam(n)
    c = -param.coeffs(weight)
    a_eq, b_eq = tp_equalities(d, param)
    box = param.box()
    rng = np.random.default_rng(opts.seed)
    value = lambda cq: float(np.real(np.vdot(weight.conj().T, cq)))

    bound = fidelity_bounds(choi, opts.restarts, opts.iters, opts.seed) if opts.bounds else None

    cuts = [param.cut(e) for e in np.eye(n)]
    count = 4 * n if opts.mode == "cutting" or opts.n_random is None else opts.n_random
    cuts += [param.cut(v) for v in _unit_vectors(n, count, rng)]

    best_choi = superop_to_choi(np.eye(n, dtype=complex))
    best_val = value(best_choi)
    best_blocks, settled = None, True

    def slack_cuts(cq):
        _, z = dual_slack(weight, cq)
        wz, vz = np.linalg.eigh(z)
        return [param.cut(vz[:, k]) for k in np.where(wz > 1e-9)[0]]

    polish = opts.mode == "cutting" and opts.warm_start
    if polish:
        unitary = None if bound is None else bound.fef_witness.conj().T
        ws_val, ws_blocks, ws_settled = warm_start(choi, unitary, opts.seed, opts.ascent_iters)
        if ws_val > best_val:
            best_val, best_blocks, settled = ws_val, ws_blocks, ws_settled
            best_choi = _ascent.blocks_to_choi(ws_blocks)
        cuts += slack_cuts(best_choi)
        wc, vc = np.linalg.eigh(best_choi)
        cuts += [param.cut(vc[:, k]) for k in np.where(wc < 1e-6)[0]]
    n_seed = len(cuts)

    iterations = 0
    while True:
        iterations += 1
        res = _solve(c, cuts, a_eq, b_eq, box)
        cand = param.build(res.x)
        lp_val = -res.fun
        w, v = np.linalg.eigh(cand)
        if w[0] >= -opts.tol_psd or opts.mode == "random":
            termination = "psd" if w[0] >= -opts.tol_psd else "random"
            final = cand
            break
        if polish:
            # Near a degenerate face the ascent converges slowly, so an unsettled best
            # point is continued before trying the projected LP candidate.
            trials = [choi_to_blocks(project_feasible(cand))]
            if not settled:
                trials.insert(0, best_blocks)
            for start in trials:
                val, blocks, it = _ascent.ascend(choi, start, opts.ascent_iters)
                if val > best_val or start is best_blocks:
                    best_val, best_blocks, settled = val, blocks, it < opts.ascent_iters
                    best_choi = _ascent.blocks_to_choi(blocks)
        upper = min(lp_val, dual_upper_bound(weight, best_choi))
        if (upper - best_val) / norm <= opts.gap_tol:
            termination = "gap"
            final = best_choi
            break
        new = [param.cut(v[:, k]) for k in np.where(w < 0)[0]]
        if polish:
            new += slack_cuts(best_choi)
        if len(cuts) - n_seed + len(new) > opts.max_cuts:
            termination = "max_cuts"
            final = best_choi
            break
        cuts += new

    final_min = float(np.linalg.eigvalsh(final)[0])
    converged = final_min >= -opts.tol_psd and termination != "max_cuts"
    final_val = value(final)
    phi_qi = choi_to_superop(final)
    solver = {
        "method": "lp-" + opts.mode,
        "iterations": iterations,
        "constraints_added": len(cuts) - n_seed,
        "constraints_total": len(cuts),
        "final_min_eig": final_min,
        "objective_gap": max(0.0, (lp_val - final_val) / norm),
        "dual_gap": max(0.0, (dual_upper_bound(weight, final) - final_val) / norm),
        "termination": termination,
        "converged": bool(converged),
        "degenerate": bool(is_degenerate(weight, final)) if converged else False,
    }
    return QiResult(
        qi=Channel.from_choi(final),
        fidelity_before=avg_fidelity(phi),
        fidelity_after=corrected_fidelity(phi_qi, phi),
        bound=bound,
        solver=solver,
    )


def best_unitary_correction(phi: np.ndarray, restarts: int = 20, iters: int = 500,
                            seed: int | None = 0) -> tuple[np.ndarray, float]:
    """Best unitary correction ``W`` and the corrected fidelity of ``rho -> W E(rho) W^dag``."""
    phi = np.asarray(phi, dtype=complex)
    d = dim_of(phi)
    val, u = _ascent.best_unitary(superop_to_choi(phi), restarts, iters, seed)
    return u.conj().T, (1 + val / d) / (d + 1)

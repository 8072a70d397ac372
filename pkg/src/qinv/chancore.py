"""Quantum states and channels in finite dimension.

Conventions
-----------
* Vectorization is row-major: ``vec(|i><j|) = |i, j>``, i.e. ``vec(A) = A.reshape(-1)``.
* Superoperator: ``Phi = sum_a K_a (x) conj(K_a)`` so that ``vec(E(rho)) = Phi @ vec(rho)``.
* Choi matrix: ``C = sum_ij E(|i><j|) (x) |i><j|`` (output factor first).  It is the
  reshuffle of the superoperator, ``C[(a, c), (b, e)] = Phi[(a, b), (c, e)]``, and a
  trace-preserving channel has ``Tr_out C = I``.
* Hermitian basis: identity plus ``d**2 - 1`` traceless generators with
  ``Tr(G_i G_j) = d (d - 1) delta_ij``; diagonal generators come first.

Channels are passed around as plain ``numpy`` arrays (superoperator or Choi form).
:class:`Channel` bundles one representation with an optional constructor tag and is
what the file format stores.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

HERM_TOL = 1e-10
PSD_TOL = 1e-8
TP_TOL = 1e-8
KRAUS_CUTOFF = 1e-10


class ChannelError(ValueError):
    """Raised when a matrix fails to represent a valid channel."""


class NotCPError(ChannelError):
    pass


class NotTPError(ChannelError):
    pass


class NotAStateError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def dim_of(mat: np.ndarray) -> int:
    """Hilbert-space dimension ``d`` of a ``d**2 x d**2`` superoperator or Choi matrix."""
    n = mat.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or mat.shape != (n, n):
        raise DimensionError(f"expected a d^2 x d^2 matrix, got shape {mat.shape}")
    return d


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d)


# ---------------------------------------------------------------------------
# Operator basis and Bloch vectors
# ---------------------------------------------------------------------------

def gell_mann_basis(d: int) -> np.ndarray:
    """Traceless Hermitian basis normalized to ``Tr(G_i G_j) = d(d-1) delta_ij``.

    Returns an array of shape ``(d**2 - 1, d, d)``.  Ordering: diagonal generators
    ``H_1 .. H_{d-1}``, then ``X_ij, Y_ij`` pairs for ``i < j`` in lexicographic order.
    """
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    d = int(d)
    out = []
    for k in range(1, d):
        h = np.zeros((d, d), dtype=complex)
        h[np.arange(k), np.arange(k)] = 1.0
        h[k, k] = -k
        out.append(np.sqrt(d * (d - 1) / (k * (k + 1))) * h)
    c = np.sqrt(d * (d - 1) / 2)
    for i in range(d):
        for j in range(i + 1, d):
            x = np.zeros((d, d), dtype=complex)
            x[i, j] = x[j, i] = c
            y = np.zeros((d, d), dtype=complex)
            y[i, j] = -1j * c
            y[j, i] = 1j * c
            out.append(x)
            out.append(y)
    return np.array(out)


def _basis_for(d: int, basis: np.ndarray | None) -> np.ndarray:
    if basis is None:
        return gell_mann_basis(d)
    if basis.shape != (d * d - 1, d, d):
        raise DimensionError(f"basis shape {basis.shape} does not match dimension {d}")
    return basis


def check_state(rho: np.ndarray, tol: float = HERM_TOL) -> None:
    """Raise :class:`NotAStateError` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAStateError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NotAStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise NotAStateError(f"trace {np.trace(rho).real:.3g} != 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lo < -tol:
        raise NotAStateError(f"negative eigenvalue {lo:.3g}")


def bloch_from_state(rho: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Generalized Bloch vector ``r_i = Tr(rho G_i) / (d - 1)``."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    g = _basis_for(d, basis)
    return np.real(np.einsum("kij,ji->k", g, rho)) / (d - 1)


def state_from_bloch(r: np.ndarray, basis: np.ndarray | None = None, tol: float = HERM_TOL) -> np.ndarray:
    """Inverse of :func:`bloch_from_state`: ``(I + r.G) / d``.

    Raises :class:`NotAStateError` when the result has a negative eigenvalue; for
    ``d > 2`` the state space is a strict subset of the Bloch ball.
    """
    r = np.asarray(r, dtype=float)
    d = int(round(np.sqrt(r.size + 1)))
    if d * d - 1 != r.size:
        raise DimensionError(f"Bloch vector length {r.size} is not d^2 - 1")
    g = _basis_for(d, basis)
    rho = (np.eye(d) + np.einsum("k,kij->ij", r, g)) / d
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -tol:
        raise NotAStateError(f"Bloch vector gives eigenvalue {lo:.3g}")
    return rho


# ---------------------------------------------------------------------------
# Representation conversions
# ---------------------------------------------------------------------------

def check_kraus(kraus: Sequence[np.ndarray], tol: float = TP_TOL) -> None:
    ops = np.asarray(kraus)
    if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
        raise DimensionError("Kraus operators must be a list of square matrices of equal size")
    d = ops.shape[1]
    resid = np.einsum("aji,ajk->ik", ops.conj(), ops) - np.eye(d)
    if np.max(np.abs(resid)) > tol:
        raise NotTPError(f"sum K^dag K deviates from identity by {np.max(np.abs(resid)):.3g}")


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    ops = np.asarray(kraus, dtype=complex)
    d = ops.shape[1]
    return np.einsum("aij,akl->ikjl", ops, ops.conj()).reshape(d * d, d * d)


def reshuffle(a: np.ndarray) -> np.ndarray:
    """``A^R[(i, j), (k, l)] = A[(i, k), (j, l)]``; an involution."""
    d = dim_of(a)
    return a.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


def superop_to_choi(phi: np.ndarray) -> np.ndarray:
    return reshuffle(phi)


def choi_to_superop(choi: np.ndarray) -> np.ndarray:
    return reshuffle(choi)


def kraus_to_choi(kraus: Sequence[np.ndarray]) -> np.ndarray:
    ops = np.asarray(kraus, dtype=complex)
    v = ops.reshape(ops.shape[0], -1)
    return v.T @ v.conj()


def choi_to_kraus(choi: np.ndarray, tol: float = PSD_TOL, cutoff: float = KRAUS_CUTOFF) -> list[np.ndarray]:
    """Kraus operators ``sqrt(lam) * unvec(v)`` from the eigenpairs of a Choi matrix.

    Eigenvalues below ``cutoff`` are discarded.  Raises :class:`NotCPError` if the
    smallest eigenvalue is below ``-tol``.
    """
    d = dim_of(choi)
    w, v = np.linalg.eigh((choi + choi.conj().T) / 2)
    if w[0] < -tol:
        raise NotCPError(f"Choi matrix has eigenvalue {w[0]:.3g}")
    keep = np.where(w > cutoff)[0][::-1]
    return [np.sqrt(w[k]) * v[:, k].reshape(d, d) for k in keep]


def partial_trace_out(a: np.ndarray) -> np.ndarray:
    """Trace over the first (output) tensor factor of a ``d**2 x d**2`` matrix."""
    d = dim_of(a)
    return np.einsum("aiaj->ij", a.reshape(d, d, d, d))


def partial_trace_in(a: np.ndarray) -> np.ndarray:
    """Trace over the second (input) tensor factor."""
    d = dim_of(a)
    return np.einsum("iaja->ij", a.reshape(d, d, d, d))


def _orthonormal_basis_matrix(d: int, basis: np.ndarray) -> np.ndarray:
    cols = [vec(np.eye(d)) / np.sqrt(d)]
    cols += [vec(g) / np.sqrt(d * (d - 1)) for g in basis]
    return np.array(cols).T


class Affine(NamedTuple):
    """Affine action ``r -> M r + t`` on generalized Bloch vectors."""

    M: np.ndarray
    t: np.ndarray


def superop_to_affine(phi: np.ndarray, basis: np.ndarray | None = None, tol: float = TP_TOL) -> Affine:
    d = dim_of(phi)
    g = _basis_for(d, basis)
    b = _orthonormal_basis_matrix(d, g)
    liou = b.conj().T @ phi @ b
    top = liou[0].copy()
    top[0] -= 1.0
    if np.max(np.abs(top)) > tol:
        raise NotTPError(f"top row of the Liouville matrix deviates from (1, 0, ...) by {np.max(np.abs(top)):.3g}")
    m = np.real(liou[1:, 1:])
    t = np.real(liou[1:, 0]) / np.sqrt(d - 1)
    return Affine(m, t)


def affine_to_superop(aff: Affine, basis: np.ndarray | None = None) -> np.ndarray:
    m, t = np.asarray(aff.M, dtype=float), np.asarray(aff.t, dtype=float)
    n = m.shape[0] + 1
    d = int(round(np.sqrt(n)))
    g = _basis_for(d, basis)
    b = _orthonormal_basis_matrix(d, g)
    liou = np.zeros((n, n))
    liou[0, 0] = 1.0
    liou[1:, 0] = np.sqrt(d - 1) * t
    liou[1:, 1:] = m
    return b @ liou @ b.conj().T


def compose_affine(second: Affine, first: Affine) -> Affine:
    """Affine pair of ``second o first``: ``(M2 M1, M2 t1 + t2)``."""
    return Affine(second.M @ first.M, second.M @ first.t + second.t)


# ---------------------------------------------------------------------------
# Channel algebra
# ---------------------------------------------------------------------------

def compose(phi2: np.ndarray, phi1: np.ndarray) -> np.ndarray:
    """Superoperator of ``E2 o E1`` (``phi1`` acts first)."""
    if phi1.shape != phi2.shape:
        raise DimensionError(f"cannot compose shapes {phi2.shape} and {phi1.shape}")
    return phi2 @ phi1


def tensor(phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Superoperator of ``E1 (x) E2`` on ``C^{d1} (x) C^{d2}``.

    The composite system uses the ordinary Kronecker ordering ``|i1, i2>``, so the
    result is consistent with :func:`vec`, :func:`reshuffle` and the partial traces
    applied to dimension ``d1 * d2``.
    """
    d1, d2 = dim_of(phi1), dim_of(phi2)
    a = phi1.reshape(d1, d1, d1, d1)
    b = phi2.reshape(d2, d2, d2, d2)
    n = (d1 * d2) ** 2
    return np.einsum("abcd,efgh->aebfcgdh", a, b).reshape(n, n)


def apply_channel(phi: np.ndarray, rho: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    d = dim_of(phi)
    rho = np.asarray(rho)
    if rho.shape != (d, d):
        raise DimensionError(f"state shape {rho.shape} does not match channel dimension {d}")
    out = unvec(phi @ vec(rho))
    lo = np.linalg.eigvalsh((out + out.conj().T) / 2)[0]
    if lo < -tol:
        raise NotCPError(f"output has eigenvalue {lo:.3g}; the channel is not completely positive")
    return out


def unitary_superop(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return np.kron(u, u.conj())


def identity_superop(d: int) -> np.ndarray:
    return np.eye(d * d, dtype=complex)


def max_entangled(d: int) -> np.ndarray:
    """``|phi+> = sum_i |i, i> / sqrt(d)``."""
    return vec(np.eye(d)) / np.sqrt(d)


def swap(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s


@dataclass(frozen=True)
class ValidationReport:
    min_eig: float
    tp_residual: float
    trace: float
    cp: bool
    tp: bool

    @property
    def ok(self) -> bool:
        return self.cp and self.tp


def validate_channel(choi: np.ndarray, psd_tol: float = PSD_TOL, tp_tol: float = TP_TOL) -> ValidationReport:
    d = dim_of(choi)
    h = (choi + choi.conj().T) / 2
    lo = float(np.linalg.eigvalsh(h)[0])
    resid = float(np.max(np.abs(partial_trace_out(choi) - np.eye(d))))
    tr = float(np.real(np.trace(choi)))
    return ValidationReport(lo, resid, tr, lo >= -psd_tol, resid <= tp_tol)


# ---------------------------------------------------------------------------
# Channel container
# ---------------------------------------------------------------------------

FORMS = ("kraus", "choi", "superop", "affine")


@dataclass
class Channel:
    """One representation of a channel plus an optional constructor tag.

    ``data`` holds a list of Kraus matrices, a Choi or superoperator matrix, or an
    :class:`Affine` pair, depending on ``form``.  The tag (``{"family": ..., "params":
    {...}}``) records how a named constructor built the channel.
    """

    dim: int
    form: str
    data: object
    tag: dict | None = field(default=None)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown channel form {self.form!r}; expected one of {FORMS}")

    @classmethod
    def from_kraus(cls, kraus, tag=None) -> "Channel":
        ops = [np.asarray(k, dtype=complex) for k in kraus]
        return cls(ops[0].shape[0], "kraus", ops, tag)

    @classmethod
    def from_superop(cls, phi, tag=None) -> "Channel":
        phi = np.asarray(phi, dtype=complex)
        return cls(dim_of(phi), "superop", phi, tag)

    @classmethod
    def from_choi(cls, choi, tag=None) -> "Channel":
        choi = np.asarray(choi, dtype=complex)
        return cls(dim_of(choi), "choi", choi, tag)

    def superop(self) -> np.ndarray:
        if self.form == "superop":
            return self.data
        if self.form == "choi":
            return choi_to_superop(self.data)
        if self.form == "kraus":
            return kraus_to_superop(self.data)
        return affine_to_superop(self.data)

    def choi(self) -> np.ndarray:
        if self.form == "choi":
            return self.data
        return superop_to_choi(self.superop())

    def kraus(self) -> list[np.ndarray]:
        if self.form == "kraus":
            return list(self.data)
        return choi_to_kraus(self.choi())

    def affine(self) -> Affine:
        if self.form == "affine":
            return self.data
        return superop_to_affine(self.superop())

    def to_form(self, form: str) -> "Channel":
        conv = {"kraus": self.kraus, "choi": self.choi, "superop": self.superop, "affine": self.affine}
        return Channel(self.dim, form, conv[form](), self.tag)

    def validate(self, psd_tol: float = PSD_TOL, tp_tol: float = TP_TOL) -> ValidationReport:
        return validate_channel(self.choi(), psd_tol, tp_tol)


# ---------------------------------------------------------------------------
# Named constructors
# ---------------------------------------------------------------------------

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _probability_vector(p, name="weights") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-10:
        raise ValueError(f"{name} must be a probability vector, got {p}")
    return np.clip(p, 0, None)


def _check_unitary(u: np.ndarray, tol: float = 1e-8) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be a square matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")


def depolarizing(d: int, q: float) -> Channel:
    """``rho -> (1 - q) rho + q Tr(rho) I / d`` for ``0 <= q <= 1``."""
    if not 0 <= q <= 1:
        raise ValueError(f"depolarizing parameter must satisfy 0 <= q <= 1, got q={q}")
    phi_plus = max_entangled(d)
    phi = (1 - q) * np.eye(d * d) + q * np.outer(phi_plus, phi_plus)
    return Channel.from_superop(phi, {"family": "depolarizing", "params": {"d": d, "q": q}})


def transverse_depolarizing(d: int, w: float) -> Channel:
    """``rho -> (1 - w) rho^T + w Tr(rho) I / d``; CP iff ``d/(d+1) <= w <= d/(d-1)``."""
    lo, hi = d / (d + 1), d / (d - 1)
    if not lo - 1e-12 <= w <= hi + 1e-12:
        raise ValueError(f"transverse-depolarizing needs {lo:.6g} <= w <= {hi:.6g} for complete positivity, got w={w}")
    phi_plus = max_entangled(d)
    phi = (1 - w) * swap(d) + w * np.outer(phi_plus, phi_plus)
    return Channel.from_superop(phi, {"family": "transverse_depolarizing", "params": {"d": d, "w": w}})


def werner_holevo(d: int) -> Channel:
    """``rho -> (Tr(rho) I - rho^T) / (d - 1)``."""
    return transverse_depolarizing(d, d / (d - 1))


def pauli(p: Sequence[float]) -> Channel:
    p = _probability_vector(p, "Pauli weights")
    if p.size != 4:
        raise ValueError("Pauli channel needs four weights p0..p3")
    ops = [np.sqrt(pi) * s for pi, s in zip(p, PAULI)]
    return Channel.from_kraus(ops, {"family": "pauli", "params": {"p": p.tolist()}})


def mixed_unitary(weights: Sequence[float], unitaries: Sequence[np.ndarray]) -> Channel:
    w = _probability_vector(weights)
    us = [np.asarray(u, dtype=complex) for u in unitaries]
    if len(us) != w.size:
        raise ValueError("need one unitary per weight")
    for u in us:
        _check_unitary(u)
    tag = {"family": "mixed_unitary", "params": {"weights": w.tolist(), "unitaries": [_cplx(u) for u in us]}}
    return Channel.from_kraus([np.sqrt(wi) * u for wi, u in zip(w, us)], tag)


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-``j`` generators ``(J_x, J_y, J_z)`` in dimension ``2j + 1``."""
    d = int(round(2 * j + 1))
    if d < 2 or abs(2 * j - round(2 * j)) > 1e-12:
        raise ValueError(f"j must be a positive half-integer, got {j}")
    m = j - np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


def landau_streater(j: float) -> Channel:
    """``rho -> sum_i J_i rho J_i / (j (j + 1))`` on dimension ``2j + 1``."""
    ops = [x / np.sqrt(j * (j + 1)) for x in spin_matrices(j)]
    return Channel.from_kraus(ops, {"family": "landau_streater", "params": {"j": j}})


def check_orthogonal_conjugations(ops: Sequence[np.ndarray], tol: float = 1e-8) -> None:
    xs = np.asarray(ops, dtype=complex)
    q, d = xs.shape[0], xs.shape[1]
    if np.max(np.abs(np.einsum("aji,ajk->ik", xs.conj(), xs) - np.eye(d))) > tol:
        raise ValueError("sum X^dag X != I")
    if np.max(np.abs(np.einsum("aij,akj->ik", xs, xs.conj()) - np.eye(d))) > tol:
        raise ValueError("sum X X^dag != I")
    gram = np.einsum("aji,bji->ab", xs.conj(), xs)
    if np.max(np.abs(gram - d / q * np.eye(q))) > tol:
        raise ValueError(f"Tr(X_a^dag X_b) must equal (d/q) delta_ab = {d / q:.6g} delta_ab")


def orthogonal_conjugations(ops: Sequence[np.ndarray]) -> Channel:
    check_orthogonal_conjugations(ops)
    xs = [np.asarray(x, dtype=complex) for x in ops]
    return Channel.from_kraus(xs, {"family": "orthogonal_conjugations", "params": {"ops": [_cplx(x) for x in xs]}})


def stretch_rotation(d: int) -> np.ndarray:
    """Fixed unitary (discrete Fourier matrix) whose columns span the measured subspaces."""
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def stretch_projectors(d1: int, d2: int, m1: int, m2: int):
    """Projectors ``P1, P2`` (computational) and ``Q1, Q2`` (Fourier-rotated)."""
    d = d1 + d2
    if min(d1, d2, m1, m2) < 1 or m1 + m2 != d:
        raise ValueError(f"stretch channel needs positive ranks with d1 + d2 = m1 + m2, got {(d1, d2, m1, m2)}")
    p1 = np.diag([1.0] * d1 + [0.0] * d2).astype(complex)
    f = stretch_rotation(d)
    q1 = f[:, :m1] @ f[:, :m1].conj().T
    return p1, np.eye(d) - p1, q1, np.eye(d) - q1


def stretch_channel(d1: int, d2: int, m1: int, m2: int) -> Channel:
    """Measure-and-prepare map ``rho -> Tr(Q1 rho) P1 / d1 + Tr(Q2 rho) P2 / d2``."""
    d = d1 + d2
    stretch_projectors(d1, d2, m1, m2)
    f = stretch_rotation(d)
    ops = []
    for i in range(d1):
        for a in range(m1):
            ops.append(np.outer(np.eye(d)[i], f[:, a].conj()) / np.sqrt(d1))
    for i in range(d1, d):
        for a in range(m1, d):
            ops.append(np.outer(np.eye(d)[i], f[:, a].conj()) / np.sqrt(d2))
    return Channel.from_kraus(ops, {"family": "stretch", "params": {"d1": d1, "d2": d2, "m1": m1, "m2": m2}})


def stretch_observables(d1: int, d2: int, m1: int, m2: int) -> tuple[np.ndarray, np.ndarray]:
    """Traceless ``A`` (built from the Q's) and ``B`` (from the P's) with ``Tr A^2 = Tr B^2 = d``."""
    p1, p2, q1, q2 = stretch_projectors(d1, d2, m1, m2)
    a = (m2 * q1 - m1 * q2) / np.sqrt(m1 * m2)
    b = (d2 * p1 - d1 * p2) / np.sqrt(d1 * d2)
    return a, b


def commuting_unitary_mixture(weights: Sequence[float], phases) -> Channel:
    """Mixture of diagonal unitaries ``diag(exp(i theta^(k)))`` with weights ``p_k``."""
    w = _probability_vector(weights)
    th = np.atleast_2d(np.asarray(phases, dtype=float))
    if th.shape[0] != w.size:
        raise ValueError("need one phase vector per weight")
    ops = [np.sqrt(wk) * np.diag(np.exp(1j * t)) for wk, t in zip(w, th)]
    tag = {"family": "commuting_unitary", "params": {"weights": w.tolist(), "phases": th.tolist()}}
    return Channel.from_kraus(ops, tag)


def spin1_dephasing(taus: Sequence[float], probs: Sequence[float]) -> Channel:
    """Spin-1 rotation ``diag(e^{i tau}, 1, e^{-i tau})`` with a discrete distribution of ``tau``."""
    taus = np.asarray(taus, dtype=float)
    phases = np.stack([taus, np.zeros_like(taus), -taus], axis=1)
    ch = commuting_unitary_mixture(probs, phases)
    ch.tag = {"family": "spin1_dephasing", "params": {"taus": taus.tolist(), "probs": np.asarray(probs, float).tolist()}}
    return ch


def phase_coherences(weights: Sequence[float], phases) -> np.ndarray:
    """``w_ij = sum_k p_k exp(i (theta_i^k - theta_j^k))``; the diagonal of the superoperator."""
    w = np.asarray(weights, dtype=float)
    th = np.atleast_2d(np.asarray(phases, dtype=float))
    e = np.exp(1j * th)
    return np.einsum("k,ki,kj->ij", w, e, e.conj())


def _cplx(a: np.ndarray) -> list:
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


CONSTRUCTORS = {
    "depolarizing": depolarizing,
    "transverse_depolarizing": transverse_depolarizing,
    "pauli": pauli,
    "mixed_unitary": mixed_unitary,
    "landau_streater": landau_streater,
    "orthogonal_conjugations": orthogonal_conjugations,
    "stretch": stretch_channel,
    "spin1_dephasing": spin1_dephasing,
    "commuting_unitary": commuting_unitary_mixture,
}


def construct(name: str, **params) -> Channel:
    """Build a named channel family; ``name`` is a key of :data:`CONSTRUCTORS`."""
    key = name.replace("-", "_")
    if key not in CONSTRUCTORS:
        raise ValueError(f"unknown channel family {name!r}; choose from {sorted(CONSTRUCTORS)}")
    return CONSTRUCTORS[key](**params)

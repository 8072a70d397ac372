"""Random channels, stochastic matrices and states, and the Monte Carlo runners.

Every sample ``i`` of a run draws from its own Philox stream keyed by ``(i, seed)``,
so results do not depend on the number of worker processes or on scheduling order.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .chancore import choi_to_superop, partial_trace_out, spin1_dephasing, superop_to_affine
from .classical import classical_ensemble_theory
from .fidelity import avg_fidelity, jamiolkowski_purity, unitality
from .qinvert.analytic import qi_commuting_unitary
from .qinvert.lp import LpOptions, quasi_inverse_lp

CLASSICAL_CHUNK = 1000
QUANTUM_CSV_FIELDS = ["index", "d", "f_before", "f_unitary", "f_qi", "jam_purity", "unitality",
                      "lp_iters", "converged"]
CLASSICAL_CSV_FIELDS = ["index", "d", "f_before", "f_after"]


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for sample ``index`` of a run seeded with ``seed``."""
    if not 0 <= seed < 2**64 or index < 0:
        raise ValueError("seed must be a 64-bit unsigned integer and index non-negative")
    return np.random.Generator(np.random.Philox(key=(index << 64) | seed))


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector in ``C^d``."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_channel(d: int, rng: np.random.Generator) -> np.ndarray:
    """Choi matrix of a channel drawn from the Hilbert-Schmidt measure."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    n = d * d
    while True:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        w = g @ g.conj().T
        ev, vec = np.linalg.eigh(partial_trace_out(w))
        if ev[0] > 1e-12 * ev[-1]:
            break
    y_inv_sqrt = (vec / np.sqrt(ev)) @ vec.conj().T
    k = np.kron(np.eye(d), y_inv_sqrt)
    choi = k @ w @ k
    return (choi + choi.conj().T) / 2


def random_stochastic(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Column-stochastic matrix with independent uniform (flat Dirichlet) columns.

    With ``size`` given, returns a stack of shape ``(size, d, d)``.
    """
    shape = (d, d) if size is None else (size, d, d)
    e = rng.standard_exponential(shape)
    return e / e.sum(axis=-2, keepdims=True)


@dataclass
class EnsembleConfig:
    d: int
    n: int
    seed: int
    mode: str = "quantum"
    lp: LpOptions = field(default_factory=LpOptions)
    jobs: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("the number of samples must be at least 1")
        if self.mode not in ("quantum", "classical"):
            raise ValueError(f"mode must be 'quantum' or 'classical', got {self.mode!r}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float

    @classmethod
    def of(cls, values) -> "Estimate":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls(math.nan, math.nan)
        mean = math.fsum(v) / v.size
        sd = math.sqrt(math.fsum((v - mean) ** 2) / (v.size - 1)) if v.size > 1 else 0.0
        return cls(mean, sd / math.sqrt(v.size))

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.se


def variance_estimate(values) -> Estimate:
    """Sample variance with its large-sample standard error ``sqrt((m4 - s^4) / n)``."""
    v = np.asarray(values, dtype=float)
    n = v.size
    c = v - math.fsum(v) / n
    var = math.fsum(c**2) / (n - 1)
    m4 = math.fsum(c**4) / n
    return Estimate(var, math.sqrt(max(m4 - var**2, 0.0) / n))


@dataclass
class EnsembleStats:
    d: int
    n: int
    mode: str
    before: Estimate
    after_qi: Estimate
    after_unitary: Estimate | None = None
    jam_purity: Estimate | None = None
    unitality: Estimate | None = None
    var_before: Estimate | None = None
    excluded: int = 0
    theory: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def quantum_sample(d: int, seed: int, index: int, lp: LpOptions) -> dict:
    """One row of the quantum pipeline for sample ``index``."""
    rng = sample_rng(seed, index)
    choi = random_channel(d, rng)
    phi = choi_to_superop(choi)
    res = quasi_inverse_lp(phi, lp, seed=int(rng.integers(2**32)))
    qi_choi = res.choi()
    # The lower bound is the corrected fidelity of the best unitary the optimizer found.
    f_unitary = res.bound.lower if res.bound is not None else math.nan
    return {
        "index": index,
        "d": d,
        "f_before": avg_fidelity(phi),
        "f_unitary": f_unitary,
        "f_qi": res.fidelity_after,
        "jam_purity": jamiolkowski_purity(qi_choi),
        "unitality": unitality(superop_to_affine(choi_to_superop(qi_choi))),
        "lp_iters": res.solver["iterations"],
        "converged": int(res.converged),
        "upper": res.bound.upper if res.bound is not None else math.nan,
        "degenerate": int(res.degenerate),
    }


def _quantum_task(args):
    return quantum_sample(*args)


def _map(fn, tasks, jobs):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_quantum_ensemble(cfg: EnsembleConfig) -> tuple[EnsembleStats, list[dict]]:
    if cfg.d > 5:
        raise ValueError("quantum ensembles are limited to d <= 5")
    tasks = [(cfg.d, cfg.seed, i, cfg.lp) for i in range(cfg.n)]
    rows = sorted(_map(_quantum_task, tasks, cfg.jobs), key=lambda r: r["index"])
    ok = [r for r in rows if r["converged"]]
    col = lambda key, src: [r[key] for r in src]
    stats = EnsembleStats(
        d=cfg.d, n=cfg.n, mode="quantum",
        before=Estimate.of(col("f_before", rows)),
        after_qi=Estimate.of(col("f_qi", ok)),
        after_unitary=Estimate.of(col("f_unitary", rows)),
        jam_purity=Estimate.of(col("jam_purity", ok)),
        unitality=Estimate.of(col("unitality", ok)),
        excluded=len(rows) - len(ok),
        theory={"mean_before": 1 / cfg.d},
    )
    return stats, rows


def classical_chunk(d: int, seed: int, chunk: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """``Tr(T)/d`` and mean row maxima for one chunk of random stochastic matrices."""
    ts = random_stochastic(d, sample_rng(seed, chunk), size)
    before = np.trace(ts, axis1=1, axis2=2) / d
    after = ts.max(axis=2).sum(axis=1) / d
    return before, after


def _classical_task(args):
    return classical_chunk(*args)


def run_classical_ensemble(cfg: EnsembleConfig) -> tuple[EnsembleStats, dict[str, np.ndarray]]:
    """Monte Carlo over stochastic matrices, drawn in chunks of ``CLASSICAL_CHUNK`` samples."""
    sizes = [min(CLASSICAL_CHUNK, cfg.n - s) for s in range(0, cfg.n, CLASSICAL_CHUNK)]
    tasks = [(cfg.d, cfg.seed, k, size) for k, size in enumerate(sizes)]
    parts = _map(_classical_task, tasks, cfg.jobs)
    before = np.concatenate([p[0] for p in parts])
    after = np.concatenate([p[1] for p in parts])
    th = classical_ensemble_theory(cfg.d)
    stats = EnsembleStats(
        d=cfg.d, n=cfg.n, mode="classical",
        before=Estimate.of(before),
        after_qi=Estimate.of(after),
        var_before=variance_estimate(before),
        theory={"mean_before": float(th.mean_before), "var_before": float(th.var_before),
                "mean_after": float(th.mean_after)},
    )
    return stats, {"index": np.arange(cfg.n), "f_before": before, "f_after": after}


def write_rows(dest, rows, fields) -> None:
    """CSV with one row per dict; ``dest`` is a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_csv(dest, rows, fields)
        return
    with open(dest, "w", newline="") as fh:
        _write_csv(fh, rows, fields)


def _write_csv(fh, rows, fields) -> None:
    writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                         for k, v in r.items()})


def classical_rows(d: int, table: dict[str, np.ndarray]):
    for i, b, a in zip(table["index"], table["f_before"], table["f_after"]):
        yield {"index": int(i), "d": d, "f_before": float(b), "f_after": float(a)}


@dataclass(frozen=True)
class Spin1Point:
    p: float
    tau0: float
    f_before: float
    f_after: float
    delta: float
    tau_m: float


def spin1_point(p: float, tau0: float, grid: int = 64) -> Spin1Point:
    """Two-point spin-1 dephasing (``tau = 0`` w.p. ``1 - p``, ``tau0`` w.p. ``p``) and its correction."""
    taus, probs = [0.0, tau0], [1 - p, p]
    ch = spin1_dephasing(taus, probs)
    phases = [[t, 0.0, -t] for t in taus]
    res = qi_commuting_unitary(probs, phases, grid)
    u = np.diag(res.qi.tag["unitary"])
    # The correction is diag(e^{-i tau_m}, 1, e^{i tau_m}) up to a global phase; the middle
    # phase is free when the optimum is degenerate, so read tau_m off the outer entries.
    half = float(np.angle(u[2] / u[0])) / 2
    score = lambda tm: sum(q * (1 + 2 * np.cos(t - tm)) ** 2 for t, q in zip(taus, probs))
    tau_m = max((half, half + np.pi if half <= 0 else half - np.pi), key=score)
    before = avg_fidelity(ch.superop())
    return Spin1Point(p, tau0, before, res.fidelity_after, res.fidelity_after - before, tau_m)


def spin1_sweep(p_grid, tau0_grid, grid: int = 64) -> list[Spin1Point]:
    if len(p_grid) == 0 or len(tau0_grid) == 0:
        raise ValueError("both grids must be nonempty")
    return [spin1_point(float(p), float(t), grid) for p in p_grid for t in tau0_grid]


def theory_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"

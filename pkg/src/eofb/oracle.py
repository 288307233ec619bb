"""Stochastic search over decompositions, independent of the closed forms.

Every decomposition of rho is ``W R`` with ``R`` a dim x N matrix with
orthonormal rows. The search keeps ``R`` on that manifold by only ever
right-multiplying with unitaries: random two-column rotations first, then a
conjugate-gradient polish along ``R exp(-t H)``, where ``H`` combines the
anti-Hermitian projections of successive gradients of a smoothed objective.
Neither phase ever keeps a point that increases the exact objective.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from .bounds import cdb_bound
from .decomposition import Decomposition, apply_right, eigen_decomposition
from .errors import BadShape
from .linalg import DEFAULT_TOL
from .smatrices import s_channels, s_ij
from .states import DensityMatrix

Objective = Union[Literal["concurrence", "entanglement"], tuple[int, int]]

_MASK64 = (1 << 64) - 1
_LN2 = math.log(2.0)


def child_seed(seed: int, index: int) -> int:
    """splitmix64 of (seed, index); independent streams per restart."""
    z = (int(seed) * 0x9E3779B97F4A7C15 + (index + 1) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SearchConfig:
    n_columns: int = 12
    restarts: int = 16
    iterations: int = 2000
    polish_iterations: int = 300
    seed: int = 0
    steps: tuple[float, ...] | None = None
    workers: int = 1

    def step_schedule(self) -> np.ndarray:
        if self.steps:
            s = np.asarray(self.steps, dtype=float)
            return np.resize(s, self.iterations) if s.size != self.iterations else s
        return np.geomspace(0.5, 1e-3, max(self.iterations, 1))


PRESETS = {
    "quick": SearchConfig(n_columns=12, restarts=4, iterations=300, polish_iterations=150),
    "default": SearchConfig(),
    "thorough": SearchConfig(n_columns=16, restarts=48, iterations=4000, polish_iterations=600),
}


@dataclass(frozen=True)
class SampledMinima:
    """Smallest values seen over every decomposition the search visited."""

    per_channel: tuple[float, ...]
    concurrence: float
    entanglement: float
    worst_residual: float
    visited: int


@dataclass(frozen=True)
class SearchResult:
    best_value: float
    best_decomposition: Decomposition
    best_right: np.ndarray
    trace: tuple[float, ...]
    restart_bests: tuple[float, ...]
    sampled: SampledMinima


def random_right(dim: int, n: int, seed=None) -> np.ndarray:
    """Leading ``dim`` rows of a Haar-random n x n unitary."""
    if dim < 1 or n < dim:
        raise BadShape(f"need n >= dim >= 1, got dim={dim}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return unitary_group.rvs(n, random_state=rng)[:dim]


class _Evaluator:
    """Per-column objective values and gradients for a fixed channel set.

    Works from the four nonzero entries of each indicator matrix instead of
    dense products.
    """

    def __init__(self, d: int, objective: Objective):
        self.objective = objective
        every = s_channels(d)
        if objective in ("concurrence", "entanglement"):
            chosen = every
        else:
            i, j = objective
            chosen = [s_ij(d, i, j)]
        self.all_idx = self._indices(every)
        self.idx = self._indices(chosen)

    @staticmethod
    def _indices(s_list):
        d = s_list[0].d
        i = np.array([s.i - 1 for s in s_list])
        j = np.array([s.j - 1 for s in s_list])
        return i, j + d, j, i + d

    @staticmethod
    def _z(idx, phi: np.ndarray) -> np.ndarray:
        a, b, c, e = idx
        return 2.0 * (phi[a] * phi[b] - phi[c] * phi[e])

    def columns(self, phi: np.ndarray, eta: float = 0.0) -> np.ndarray:
        z = self._z(self.idx, phi)
        c = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=0) + eta * eta)
        if self.objective != "entanglement":
            return c
        p = np.sum(phi.real**2 + phi.imag**2, axis=0)
        return _weighted_epsilon(c, p)

    def value(self, phi: np.ndarray) -> float:
        return float(np.sum(self.columns(phi)))

    def grad_phi(self, phi: np.ndarray, eta: float) -> tuple[float, np.ndarray]:
        """Smoothed objective and its derivative with respect to conj(phi)."""
        z = self._z(self.idx, phi)
        c = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=0) + eta * eta)
        coef = z / c
        pb = phi.conj()
        a, b, cc, e = self.idx
        # d conj(z_k) / d conj(phi) = 2 S_k conj(phi)
        dc = np.zeros_like(phi)
        for k in range(len(a)):
            dc[a[k]] += 2.0 * coef[k] * pb[b[k]]
            dc[b[k]] += 2.0 * coef[k] * pb[a[k]]
            dc[cc[k]] -= 2.0 * coef[k] * pb[e[k]]
            dc[e[k]] -= 2.0 * coef[k] * pb[cc[k]]
        if self.objective != "entanglement":
            return float(np.sum(c)), dc
        p = np.sum(phi.real**2 + phi.imag**2, axis=0)
        live = p > 1e-300
        t = np.where(live, c / np.where(live, p, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0 - 1e-12)
        eps = _epsilon_vec(t)
        deps = _epsilon_prime_vec(t)
        dp_coef = np.where(live, eps - t * deps, 0.0)
        dc_coef = np.where(live, deps, 0.0)
        return float(np.sum(p * eps)), dp_coef * phi + dc_coef * dc

    def channel_sums(self, phi: np.ndarray) -> np.ndarray:
        return np.sum(np.abs(self._z(self.all_idx, phi)), axis=1)

    def full(self, phi: np.ndarray) -> tuple[np.ndarray, float, float]:
        z = np.abs(self._z(self.all_idx, phi))
        c = np.sqrt(np.sum(z**2, axis=0))
        p = np.sum(np.abs(phi) ** 2, axis=0)
        return z.sum(axis=1), float(c.sum()), float(np.sum(_weighted_epsilon(c, p)))


def _epsilon_vec(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    root = np.sqrt(1.0 - t * t)
    small = t * t / (2.0 * (1.0 + root))
    big = 1.0 - small
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(small > 0, small * np.log(small), 0.0) - np.where(big > 0, big * np.log(big), 0.0)
    return h / _LN2


def _epsilon_prime_vec(t: np.ndarray) -> np.ndarray:
    root = np.sqrt(1.0 - t * t)
    small = t * t / (2.0 * (1.0 + root))
    big = 1.0 - small
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(small > 0, np.log(big / np.where(small > 0, small, 1.0)), 0.0)
        out = ratio / _LN2 * t / (2.0 * root)
    return np.where(t > 0, out, 0.0)


def _weighted_epsilon(c: np.ndarray, p: np.ndarray) -> np.ndarray:
    live = p > 1e-300
    t = np.where(live, c / np.where(live, p, 1.0), 0.0)
    return np.where(live, p * _epsilon_vec(t), 0.0)


class _Tracker:
    def __init__(self, ev: _Evaluator, w: np.ndarray, rho: np.ndarray):
        self.ev, self.w, self.rho = ev, w, rho
        n_ch = len(ev.all_idx[0])
        self.per_channel = np.full(n_ch, np.inf)
        self.concurrence = np.inf
        self.entanglement = np.inf
        self.residual = 0.0
        self.visited = 0

    def visit(self, phi: np.ndarray, check: bool = False) -> None:
        sums, conc, ent = self.ev.full(phi)
        np.minimum(self.per_channel, sums, out=self.per_channel)
        self.concurrence = min(self.concurrence, conc)
        self.entanglement = min(self.entanglement, ent)
        if check:
            res = float(np.max(np.abs(phi @ phi.conj().T - self.rho)))
            self.residual = max(self.residual, res)
        self.visited += 1

    def minima(self) -> SampledMinima:
        return SampledMinima(
            tuple(float(x) for x in self.per_channel),
            float(self.concurrence),
            float(self.entanglement),
            self.residual,
            self.visited,
        )


def _pair_unitaries(rng: np.random.Generator, steps: np.ndarray) -> np.ndarray:
    """exp(step * i (h0 + h . sigma)) for Gaussian h, one 2x2 unitary per step."""
    h = rng.standard_normal((steps.size, 4)) * steps[:, None]
    norm = np.linalg.norm(h[:, 1:], axis=1)
    unit = h[:, 1:] / np.where(norm > 0, norm, 1.0)[:, None]
    cos, sin = np.cos(norm), np.sin(norm)
    nx, ny, nz = unit.T
    u = np.empty((steps.size, 2, 2), dtype=complex)
    u[:, 0, 0] = cos + 1j * sin * nz
    u[:, 0, 1] = 1j * sin * (nx - 1j * ny)
    u[:, 1, 0] = 1j * sin * (nx + 1j * ny)
    u[:, 1, 1] = cos - 1j * sin * nz
    return u * np.exp(1j * h[:, 0])[:, None, None]


def _restart(args) -> tuple[float, np.ndarray, SampledMinima]:
    w, rho, d, objective, cfg, index = args
    ev = _Evaluator(d, objective)
    tracker = _Tracker(ev, w, rho)
    rng = np.random.default_rng(child_seed(cfg.seed, index))
    dim, n = w.shape[0], cfg.n_columns
    r = random_right(dim, n, rng)
    phi = w @ r
    cols = ev.columns(phi)
    f = float(cols.sum())
    tracker.visit(phi, check=True)

    steps = cfg.step_schedule()[: cfg.iterations]
    first = rng.integers(n, size=steps.size)
    second = (first + 1 + rng.integers(n - 1, size=steps.size)) % n
    moves = _pair_unitaries(rng, steps)
    for a, b, u in zip(first, second, moves):
        pair = [a, b]
        new_phi = phi[:, pair] @ u
        new_cols = ev.columns(new_phi)
        f_new = f - cols[a] - cols[b] + new_cols[0] + new_cols[1]
        if f_new < f:
            phi[:, pair] = new_phi
            r[:, pair] = r[:, pair] @ u
            cols[pair] = new_cols
            f = f_new
            tracker.visit(phi)
    # drop drift from the incremental bookkeeping
    phi = w @ r
    f = ev.value(phi)
    tracker.visit(phi, check=True)

    r, f = _polish(ev, w, r, f, cfg.polish_iterations, tracker)
    tracker.visit(w @ r, check=True)
    return f, r, tracker.minima()


def _polish(ev: _Evaluator, w: np.ndarray, r: np.ndarray, f: float, iterations: int, tracker: _Tracker):
    """Polak-Ribiere conjugate gradient on the unitary group, eta annealed."""
    if iterations <= 0:
        return r, f
    best_r, best_f = r, f
    eta_hi, eta_lo = 1e-2, 1e-10
    t = 0.1
    stall = 0
    prev_omega = direction = None
    prev_g2 = 1.0
    for k in range(iterations):
        eta = eta_hi * (eta_lo / eta_hi) ** (k / max(iterations - 1, 1))
        g_val, dphi = ev.grad_phi(w @ r, eta)
        g = 2.0 * w.conj().T @ dphi
        omega = r.conj().T @ g - g.conj().T @ r
        g2 = float(np.vdot(omega, omega).real)
        if g2 < 1e-28:
            break
        if direction is None:
            direction = omega
        else:
            beta = max(0.0, float(np.vdot(omega, omega - prev_omega).real) / prev_g2)
            direction = omega + beta * direction
            if float(np.vdot(omega, direction).real) <= 0:
                direction = omega
        slope = float(np.vdot(omega, direction).real)
        prev_omega, prev_g2 = omega, g2
        # exp(-t direction) for every trial t from one Hermitian eigensolve
        mu, vec = np.linalg.eigh(1j * direction)
        rv = r @ vec
        t = min(2.0 * t, 10.0)
        moved = False
        while t > 1e-14:
            cand = (rv * np.exp(1j * t * mu)) @ vec.conj().T
            if ev.columns(w @ cand, eta).sum() <= g_val - 1e-4 * t * slope:
                r, moved = cand, True
                break
            t *= 0.5
        if not moved:
            if direction is omega:
                break
            direction = None
            t = 0.1
            continue
        phi = w @ r
        exact = ev.value(phi)
        tracker.visit(phi)
        if exact < best_f:
            stall = 0 if best_f - exact > 1e-12 * best_f else stall + 1
            best_r, best_f = r, exact
        else:
            stall += 1
        if stall > 25 and eta < 1e-7:
            break
    return best_r, best_f


def minimize_average(
    rho: DensityMatrix,
    objective: Objective = "concurrence",
    cfg: SearchConfig = SearchConfig(),
    tol: float = DEFAULT_TOL,
) -> SearchResult:
    """Smallest average objective found over decompositions of rho.

    ``objective`` is ``"concurrence"`` (full concurrence), ``"entanglement"``
    (average von Neumann entropy) or a channel ``(i, j)``.
    """
    dim = rho.dim
    if cfg.n_columns < dim:
        raise BadShape(f"need n_columns >= {dim}, got {cfg.n_columns}")
    if cfg.restarts < 1:
        raise BadShape("need at least one restart")
    w_dec = eigen_decomposition(rho, tol)
    jobs = [(w_dec.phi, rho.matrix, rho.d, objective, cfg, k) for k in range(cfg.restarts)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_restart, jobs))
    else:
        outcomes = [_restart(job) for job in jobs]

    restart_bests = tuple(o[0] for o in outcomes)
    trace = tuple(np.minimum.accumulate(restart_bests))
    best = int(np.argmin(restart_bests))  # ties -> lowest restart index
    best_r = outcomes[best][1]
    dec = apply_right(w_dec, best_r)
    ev = _Evaluator(rho.d, objective)
    sampled = _merge_minima([o[2] for o in outcomes])
    return SearchResult(ev.value(dec.phi), dec, best_r, trace, restart_bests, sampled)


def _merge_minima(parts: Sequence[SampledMinima]) -> SampledMinima:
    return SampledMinima(
        tuple(float(x) for x in np.min([p.per_channel for p in parts], axis=0)),
        min(p.concurrence for p in parts),
        min(p.entanglement for p in parts),
        max(p.worst_residual for p in parts),
        sum(p.visited for p in parts),
    )


@dataclass(frozen=True)
class GapReport:
    c_db: float
    empirical_c: float
    gap: float
    c_ij: tuple[float, ...]
    best_channel_sums: tuple[float, ...]
    channel_attainment: tuple[float, ...]
    sampled: SampledMinima
    violations: tuple[str, ...] = field(default=())

    @property
    def sound(self) -> bool:
        return not self.violations


SOUNDNESS_SLACK = 1e-6


def soundness_violations(report_c_ij, c_db, eof_lower, sampled: SampledMinima, slack=SOUNDNESS_SLACK) -> list[str]:
    out = []
    for (k, bound), seen in zip(enumerate(report_c_ij), sampled.per_channel):
        if seen < bound - slack:
            out.append(f"channel #{k}: sampled sum {seen:.12g} < bound {bound:.12g}")
    if sampled.concurrence < c_db - slack:
        out.append(f"sampled concurrence {sampled.concurrence:.12g} < c_db {c_db:.12g}")
    if sampled.entanglement < eof_lower - slack:
        out.append(f"sampled entanglement {sampled.entanglement:.12g} < eps(c_db) {eof_lower:.12g}")
    return out


def bound_gap_experiment(
    rho: DensityMatrix,
    cfg: SearchConfig = SearchConfig(),
    per_channel: bool = True,
    tol: float = DEFAULT_TOL,
) -> GapReport:
    """Compare c_db against the best average concurrence the search finds.

    A negative gap beyond ``SOUNDNESS_SLACK`` means a sampled decomposition
    beat a proven lower bound, which can only be a bug. With ``per_channel``
    each channel is also minimized on its own and the residual against its
    closed-form bound is reported.
    """
    report = cdb_bound(rho, tol)
    full = minimize_average(rho, "concurrence", cfg, tol)
    ev = _Evaluator(rho.d, "concurrence")
    best_sums = tuple(float(x) for x in ev.channel_sums(full.best_decomposition.phi))
    sampled = [full.sampled]
    attainment = []
    if per_channel:
        for k, ch in enumerate(report.channels):
            res = minimize_average(rho, ch, replace(cfg, seed=child_seed(cfg.seed, 1000 + k)), tol)
            attainment.append(res.best_value - report.c_ij[k])
            sampled.append(res.sampled)
    merged = _merge_minima(sampled)
    violations = soundness_violations(report.c_ij, report.c_db, report.eof_lower, merged)
    gap = full.best_value - report.c_db
    if gap < -SOUNDNESS_SLACK:
        violations.append(f"gap {gap:.3e} is negative")
    return GapReport(
        c_db=report.c_db,
        empirical_c=full.best_value,
        gap=gap,
        c_ij=report.c_ij,
        best_channel_sums=best_sums,
        channel_attainment=tuple(attainment),
        sampled=merged,
        violations=tuple(violations),
    )

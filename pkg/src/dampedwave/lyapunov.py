"""Finite-time cocycle bounds, Lyapunov spectra and essential band edges.

Two families of rates are estimated from the same trajectories:

* uniform bounds: c_minus = -(1/T) max log ||G_T||_2 and
  c_plus = -(1/T) min log sigma_min(G_T) over energy-shell samples, whose
  T -> infinity limits confine all but finitely many eigenfrequencies;
* Lyapunov exponents via discrete QR (re-orthonormalize a propagated frame
  every few steps and average the log diagonal), whose essential range over
  the shell gives the band that carries the spectral density.

The essential inf/sup are estimated by min/max over Monte-Carlo shell
samples at finite horizon; half-horizon values are carried along as a
convergence diagnostic.  Everything is sample-parallel and deterministic
given the seed.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .cocycle import _renormalized, _scaled_reduce, plan_steps, window_products
from .damping import DampingField
from .geometry import PhasePoint, flow, sample_shell

DEFAULT_HORIZON = 200.0
DEFAULT_DT = 1e-3
DEFAULT_SAMPLES = 64
DEFAULT_RENORM_EVERY = 10
SHELL_ENERGY = 0.5


@dataclass(frozen=True)
class FiniteTimeBounds:
    """Uniform finite-horizon decay bounds over a sample of the shell."""

    T: float
    c_minus: float
    c_plus: float
    sample_count: int


@dataclass(frozen=True)
class CInfinityEstimate:
    """C bounds at the largest horizon plus a convergence diagnostic."""

    c_minus: float
    c_plus: float
    T: float
    diagnostic: float
    converged: bool = True

    def __iter__(self):
        return iter((self.c_minus, self.c_plus))


@dataclass(frozen=True)
class LyapunovSpectrum:
    """QR-estimated exponents at horizon T, sorted ascending."""

    exponents: tuple
    T: float
    point: PhasePoint
    rank_ok: bool = True


@dataclass(frozen=True)
class EssentialBounds:
    """Sample extremes of the extreme exponents at horizon T."""

    lambda_minus: float
    lambda_plus: float
    T: float
    m: int
    diagnostics: dict = dataclass_field(default_factory=dict)


@dataclass(frozen=True)
class BandEstimates:
    """C bounds and band edges computed from one set of trajectories."""

    c_minus: float
    c_plus: float
    lambda_minus: float
    lambda_plus: float
    T: float
    m: int
    diagnostics: dict = dataclass_field(default_factory=dict)

    def to_report(self) -> dict:
        return {
            "T": self.T,
            "m": self.m,
            "c_minus": self.c_minus,
            "c_plus": self.c_plus,
            "lambda_minus": self.lambda_minus,
            "lambda_plus": self.lambda_plus,
            "diagnostics": dict(self.diagnostics),
        }


class _StreamStats:
    """One pass over the transfer-matrix stream, three accumulators.

    Keeps (i) the scaled total product G_T per trajectory, (ii) the scaled
    product of the inverted window factors, i.e. G_T^{-1} (the only stable
    way to the smallest singular value once sigma_min/sigma_max falls under
    machine precision), and (iii) a QR-orthonormalized frame whose log
    diagonal accumulates the Lyapunov sums, with a snapshot near T/2.
    """

    def __init__(self, field: DampingField, points: list[PhasePoint], T: float, dt: float,
                 renorm_every: int = DEFAULT_RENORM_EVERY, want_qr: bool = True):
        B, n = len(points), field.n
        M, h = plan_steps(T, dt)
        units = np.broadcast_to(np.eye(n, dtype=complex), (B, n, n)).copy()
        logs = np.zeros(B)
        inv_units = units.copy()
        inv_logs = np.zeros(B)
        Q = units.copy()
        qr_logs = np.zeros((B, n))
        rank_ok = True
        steps_done = 0
        half_logs, half_time = None, None
        for W in window_products(field, points, T, dt, window=renorm_every):
            cu, cl = _scaled_reduce(W)
            units = cu @ units
            logs += cl
            scale = np.linalg.norm(units, axis=(-2, -1)) / math.sqrt(n)
            units /= scale[..., None, None]
            logs += np.log(scale)
            inv_units = inv_units @ np.linalg.inv(cu)
            inv_logs -= cl
            iscale = np.linalg.norm(inv_units, axis=(-2, -1)) / math.sqrt(n)
            inv_units /= iscale[..., None, None]
            inv_logs += np.log(iscale)
            if not want_qr:
                continue
            for i in range(W.shape[1]):
                Q = W[:, i] @ Q
                Q, R = np.linalg.qr(Q)
                diag = np.abs(np.einsum("bii->bi", R))
                if np.any(diag == 0.0):
                    rank_ok = False
                    diag = np.maximum(diag, 1e-300)
                qr_logs += np.log(diag)
                steps_done = min(steps_done + renorm_every, M)
                if half_logs is None and steps_done * h >= 0.5 * T:
                    half_logs = qr_logs.copy()
                    half_time = steps_done * h
        self.T = T
        self.n = n
        self.points = points
        self.product = [_renormalized(units[b], float(logs[b])) for b in range(B)]
        self.inverse = [_renormalized(inv_units[b], float(inv_logs[b])) for b in range(B)]
        self.qr_logs = qr_logs
        self.half_logs = half_logs if half_logs is not None else qr_logs.copy()
        self.half_time = half_time if half_time is not None else T
        self.rank_ok = rank_ok

    def log_norm_top(self, norm: str = "spectral") -> np.ndarray:
        """(B,) values of log ||G_T||."""
        if norm == "spectral":
            return np.array([g.log_norm2() for g in self.product])
        return np.array([g.log_scale + math.log(np.linalg.norm(g.unit))
                         for g in self.product])

    def log_norm_bottom(self, norm: str = "spectral") -> np.ndarray:
        """(B,) values of log sigma_min(G_T) = -log ||G_T^{-1}||."""
        if norm == "spectral":
            return -np.array([g.log_norm2() for g in self.inverse])
        return -np.array([g.log_scale + math.log(np.linalg.norm(g.unit))
                          for g in self.inverse])

    def exponents(self) -> np.ndarray:
        """(B, n) ascending QR exponents at the full horizon."""
        return np.sort(self.qr_logs / self.T, axis=1)

    def exponents_half(self) -> np.ndarray:
        return np.sort(self.half_logs / self.half_time, axis=1)


def _shell_points(field: DampingField, m: int, seed: int) -> list[PhasePoint]:
    return sample_shell(m, SHELL_ENERGY, d=field.d, seed=seed)


def _c_bounds(field: DampingField, points, T, dt, norm="spectral"):
    if norm not in ("spectral", "frobenius"):
        raise ValueError(f"unknown norm {norm!r}")
    stats = _StreamStats(field, points, T, dt, want_qr=False)
    c_minus = -float(np.max(stats.log_norm_top(norm))) / T
    c_plus = -float(np.min(stats.log_norm_bottom(norm))) / T
    return c_minus, c_plus


def finite_time_bounds_at(field: DampingField, T: float, points: list[PhasePoint],
                          dt: float = DEFAULT_DT, norm: str = "spectral") -> FiniteTimeBounds:
    """C bounds over an explicit set of phase points (e.g. a dense grid)."""
    if T <= 0:
        raise ValueError("T must be positive")
    c_minus, c_plus = _c_bounds(field, points, T, dt, norm)
    return FiniteTimeBounds(T, c_minus, c_plus, len(points))


def finite_time_bounds(field: DampingField, T: float, m: int = DEFAULT_SAMPLES,
                       dt: float = DEFAULT_DT, seed: int = 0,
                       norm: str = "spectral") -> FiniteTimeBounds:
    """C bounds over m Liouville samples of the energy-1/2 shell."""
    if m < 1:
        raise ValueError("need at least one sample")
    return finite_time_bounds_at(field, T, _shell_points(field, m, seed), dt, norm)


def extrapolate_c_infinity(field: DampingField, T_list, m: int = DEFAULT_SAMPLES,
                           dt: float = DEFAULT_DT, seed: int = 0) -> CInfinityEstimate:
    """C bounds at the largest horizon of T_list with a convergence diagnostic.

    The estimate is the value at max(T_list) (no fit); the diagnostic is the
    largest successive difference of the bounds along T_list.  The
    ``converged`` flag drops when earlier differences exceed ten times the
    final one, signalling pre-asymptotic horizons.
    """
    T_list = list(T_list)
    if len(T_list) < 3 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be increasing with at least 3 horizons")
    points = _shell_points(field, m, seed)
    fwd = [None] * m
    inv = [None] * m
    series = []
    prev_T = 0.0
    moved = points
    for T in T_list:
        seg = _StreamStats(field, moved, T - prev_T, dt, want_qr=False)
        if fwd[0] is None:
            fwd, inv = list(seg.product), list(seg.inverse)
        else:
            fwd = [s @ r for s, r in zip(seg.product, fwd)]
            inv = [r @ s for s, r in zip(seg.inverse, inv)]
        top = np.array([g.log_norm2() for g in fwd])
        bot = -np.array([g.log_norm2() for g in inv])
        series.append((-np.max(top) / T, -np.min(bot) / T))
        moved = [flow(p, T - prev_T) for p in moved]
        prev_T = T
    diffs = [max(abs(a[0] - b[0]), abs(a[1] - b[1])) for a, b in zip(series, series[1:])]
    diagnostic = max(diffs)
    last = diffs[-1]
    converged = all(d <= 10.0 * last + 1e-15 for d in diffs)
    if not converged:
        warnings.warn("C-bound horizons look pre-asymptotic; enlarge T_list", stacklevel=2)
    c_minus, c_plus = series[-1]
    return CInfinityEstimate(c_minus, c_plus, T_list[-1], diagnostic, converged)


def lyapunov_spectrum(field: DampingField, point: PhasePoint, T: float,
                      dt: float = DEFAULT_DT,
                      renorm_every: int = DEFAULT_RENORM_EVERY) -> LyapunovSpectrum:
    """Ascending QR exponents of the cocycle at `point` over horizon T."""
    if T <= 0:
        raise ValueError("T must be positive")
    stats = _StreamStats(field, [point], T, dt, renorm_every)
    exps = stats.exponents()[0]
    return LyapunovSpectrum(tuple(float(v) for v in exps), T, point, stats.rank_ok)


def _compound_batch(A: np.ndarray, combos: list) -> np.ndarray:
    """i-th compound matrices of a stack A (S, n, n): entries are the i x i
    minors indexed by row/column subsets, so the compound of a product is
    the product of compounds."""
    S = A.shape[0]
    m = len(combos)
    out = np.empty((S, m, m), dtype=complex)
    for p, rows in enumerate(combos):
        sub = A[:, rows, :]
        for q, cols in enumerate(combos):
            out[:, p, q] = np.linalg.det(sub[:, :, cols])
    return out


def exterior_sums(field: DampingField, point: PhasePoint, T: float,
                  dt: float = DEFAULT_DT, i: int = 1) -> float:
    """(1/T) * sum of the top-i log singular values of G_T.

    Equals the sum of the i largest Lyapunov exponents in the long-time
    limit.  Computed as the growth rate of the i-th exterior power: the
    window transfer matrices are mapped to their i-th compounds and the
    scaled product's top singular value is read off, which stays accurate
    even when sigma_i/sigma_1 underflows a direct SVD of G_T.
    """
    n = field.n
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= {n}")
    combos = list(itertools.combinations(range(n), i))
    m = len(combos)
    unit = np.eye(m, dtype=complex)
    log = 0.0
    for W in window_products(field, [point], T, dt):
        C = _compound_batch(W[0], combos)
        cu, cl = _scaled_reduce(C[None])
        unit = cu[0] @ unit
        log += float(cl[0])
        s = np.linalg.norm(unit)
        unit /= s
        log += math.log(s)
    return float((log + math.log(np.linalg.norm(unit, ord=2))) / T)


def band_estimates(field: DampingField, T: float = DEFAULT_HORIZON, m: int = DEFAULT_SAMPLES,
                   dt: float = DEFAULT_DT, seed: int = 0,
                   renorm_every: int = DEFAULT_RENORM_EVERY) -> BandEstimates:
    """C bounds and essential band edges from one set of shell trajectories.

    Sharing trajectories keeps the finite-horizon ordering
    c_minus <= -lambda_plus <= -lambda_minus <= c_plus meaningful without
    sampling noise between the two estimates.
    """
    if m < 1:
        raise ValueError("need at least one sample")
    points = _shell_points(field, m, seed)
    stats = _StreamStats(field, points, T, dt, renorm_every)
    c_minus = float(-np.max(stats.log_norm_top()) / T)
    c_plus = float(-np.min(stats.log_norm_bottom()) / T)
    exps = stats.exponents()
    exps_half = stats.exponents_half()
    lam_minus = float(np.min(exps[:, 0]))
    lam_plus = float(np.max(exps[:, -1]))
    diagnostics = {
        "half_horizon": stats.half_time,
        "lambda_minus_half": float(np.min(exps_half[:, 0])),
        "lambda_plus_half": float(np.max(exps_half[:, -1])),
        "max_exponent_drift": float(np.max(np.abs(exps - exps_half))),
        "rank_ok": stats.rank_ok,
        "dt": dt,
        "seed": seed,
        "renorm_every": renorm_every,
    }
    return BandEstimates(c_minus, c_plus, lam_minus, lam_plus, T, m, diagnostics)


def essential_bounds(field: DampingField, T: float = DEFAULT_HORIZON, m: int = DEFAULT_SAMPLES,
                     dt: float = DEFAULT_DT, seed: int = 0,
                     renorm_every: int = DEFAULT_RENORM_EVERY) -> EssentialBounds:
    """Estimated essential range [lambda_minus, lambda_plus] of the exponents.

    Minimum of the smallest and maximum of the largest QR exponent over
    m >= 10 shell samples; half-horizon values ride along as diagnostics.
    """
    if m < 10:
        raise ValueError("essential bounds need m >= 10 samples")
    est = band_estimates(field, T, m, dt, seed, renorm_every)
    return EssentialBounds(est.lambda_minus, est.lambda_plus, T, m, est.diagnostics)

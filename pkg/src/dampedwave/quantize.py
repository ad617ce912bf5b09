"""Anti-Wick and Weyl quantization on 1-d grids, plus a periodized variant.

States are samples on a uniform grid with the inner product
<u, v> = dx * sum(conj(u) v).  The anti-Wick operator is a phase-space
quadrature of rank-one coherent-state projectors,

    Op_AW(a) = (2 pi h)^{-1} sum_{x0, xi0} dx0 dxi0 a(x0, xi0) Pi_(x0,xi0);

the momentum nodes tile exactly one Nyquist period of the grid, so for
a = 1 the aliased Gaussian tiling reproduces the identity to quadrature
accuracy, and Gaussians are truncated at 8 sqrt(h), which keeps the
assembled operator banded.  The Weyl operator is built from the kernel
K(x, y) = (2 pi h)^{-1} int a((x+y)/2, xi) e^{i(x-y)xi/h} dxi with momentum
nodes dense enough that the discrete kernel has no replica within the box.

Matrix-valued symbols quantize entrywise against the scalar projector
weights.  A periodized circle variant backs the propagator-factorization
experiment; coherent states are wrapped by summing nearby periodic images
(a single image survives the tail truncation for h <= 0.15).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

TAIL_CUT = 8.0  # Gaussian tails kept out to TAIL_CUT * sqrt(h)
NODE_SPACING = 0.25  # phase-space quadrature spacing in units of sqrt(h)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L] with semiclassical parameter h.

    Spacing must resolve the coherent-state width (dx <= sqrt(h)/4) and the
    momentum cutoff must cover the symbols of interest (xi_max >= 3 covers
    supports within |xi| <= 3/2 with room for Gaussian tails).
    """

    L: float
    points: int
    h: float
    xi_max: float = 3.0

    def __post_init__(self):
        if self.h <= 0 or self.L <= 0 or self.points < 8:
            raise ValueError("need h > 0, L > 0 and a non-trivial grid")
        if self.dx > math.sqrt(self.h) / 4.0 + 1e-12:
            raise ValueError(
                f"grid spacing {self.dx:.4g} does not resolve sqrt(h)/4 = "
                f"{math.sqrt(self.h)/4:.4g}")
        if self.xi_max < 3.0:
            raise ValueError("xi_max must be at least 3")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.points

    @property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.points) + 0.5) * self.dx

    @property
    def nyquist(self) -> float:
        """Half-width of the momentum band the grid represents, pi h / dx."""
        return math.pi * self.h / self.dx

    @classmethod
    def build(cls, L: float, h: float, xi_max: float = 3.0) -> "GridSpec":
        """Choose the point count so the Nyquist band clears xi_max + tails."""
        dx = min(math.sqrt(h) / 4.0, math.pi * h / (xi_max + TAIL_CUT * math.sqrt(h)))
        return cls(L, int(math.ceil(2.0 * L / dx)), h, xi_max)


@dataclass(frozen=True)
class Symbol:
    """A phase-space symbol (x, xi) -> scalar or n x n matrix.

    ``fn`` must broadcast over numpy arrays.  ``xy_parts`` optionally lists
    separable terms (f(x), g(xi)) enabling the fast Weyl path; ``mollified``
    optionally maps h to the Gaussian-mollified symbol (variance h/2 per
    phase-space coordinate), which is what anti-Wick quantization sees.
    """

    fn: callable
    n: int = 1
    hermitian: bool = False
    sup_bound: float | None = None
    xy_parts: list | None = None
    mollified: callable = None
    label: str = ""

    def __call__(self, x, xi):
        return self.fn(x, xi)


def symbol_one(n: int = 1) -> Symbol:
    if n == 1:
        return Symbol(lambda x, xi: np.ones(np.broadcast(x, xi).shape), 1, True, 1.0,
                      xy_parts=[(lambda x: np.ones_like(x), lambda xi: np.ones_like(xi))],
                      mollified=lambda h: symbol_one(), label="1")
    eye = np.eye(n)
    return Symbol(lambda x, xi: np.multiply.outer(np.ones(np.broadcast(x, xi).shape), eye),
                  n, True, 1.0, mollified=lambda h: symbol_one(n), label="Id")


def symbol_harmonic() -> Symbol:
    """x^2 + xi^2; its mollification is exactly x^2 + xi^2 + h."""

    def moll(h):
        s = Symbol(lambda x, xi: x * x + xi * xi + h, 1, True,
                   xy_parts=[(lambda x: x * x + h, lambda xi: np.ones_like(xi)),
                             (lambda x: np.ones_like(x), lambda xi: xi * xi)],
                   label="x^2+xi^2+h")
        return s

    return Symbol(lambda x, xi: x * x + xi * xi, 1, True,
                  xy_parts=[(lambda x: x * x, lambda xi: np.ones_like(xi)),
                            (lambda x: np.ones_like(x), lambda xi: xi * xi)],
                  mollified=moll, label="x^2+xi^2")


def symbol_cos_x() -> Symbol:
    """cos x; Gaussian x-mollification scales it by exp(-h/4)."""

    def moll(h):
        c = math.exp(-h / 4.0)
        return Symbol(lambda x, xi: c * np.cos(x) + 0.0 * xi, 1, True, c,
                      xy_parts=[(lambda x: c * np.cos(x), lambda xi: np.ones_like(xi))],
                      label="exp(-h/4)cos x")

    return Symbol(lambda x, xi: np.cos(x) + 0.0 * xi, 1, True, 1.0,
                  xy_parts=[(lambda x: np.cos(x), lambda xi: np.ones_like(xi))],
                  mollified=moll, label="cos x")


def symbol_xi() -> Symbol:
    return Symbol(lambda x, xi: xi + np.zeros_like(x), 1, True,
                  xy_parts=[(lambda x: np.ones_like(x), lambda xi: xi)],
                  mollified=lambda h: symbol_xi(), label="xi")


def coherent_state(x0: float, xi0: float, grid: GridSpec) -> np.ndarray:
    """Sampled Gaussian wave packet (h pi)^{-1/4} e^{-(x0-y)^2/2h} e^{i y xi0/h}.

    Warns when the Gaussian mass inside the box drops below 1 - 1e-12,
    i.e. when the center sits too close to a boundary.
    """
    h = grid.h
    y = grid.x
    g = (h * math.pi) ** (-0.25) * np.exp(-((y - x0) ** 2) / (2.0 * h))
    state = g * np.exp(1j * y * xi0 / h)
    mass = float(np.sum(g * g) * grid.dx)
    if mass < 1.0 - 1e-12:
        warnings.warn(f"coherent state at x0={x0:.3f} loses mass {1.0 - mass:.2e} "
                      "outside the box", stacklevel=2)
    return state


def _aw_nodes(grid: GridSpec):
    """Phase-space quadrature nodes: x beyond the box by the tail cut, xi
    tiling exactly one Nyquist period (alias tiling makes Op_AW(1) = Id)."""
    h = grid.h
    s = NODE_SPACING * math.sqrt(h)
    half = grid.L + TAIL_CUT * math.sqrt(h)
    nx = int(math.ceil(2.0 * half / s))
    xs = -half + (np.arange(nx) + 0.5) * (2.0 * half / nx)
    Xi = grid.nyquist
    if Xi < grid.xi_max:
        raise ValueError("grid Nyquist band does not cover xi_max; refine the grid")
    nxi = int(math.ceil(2.0 * Xi / s))
    sxi = 2.0 * Xi / nxi
    xis = -Xi + (np.arange(nxi) + 0.5) * sxi
    wx = 2.0 * half / nx
    return xs, xis, wx * sxi / (2.0 * math.pi * h)


def antiwick_build(symbol: Symbol, grid: GridSpec) -> np.ndarray:
    """Dense anti-Wick operator matrix (side points*n) by projector quadrature."""
    h, y, dx = grid.h, grid.x, grid.dx
    P, n = grid.points, symbol.n
    xs, xis, w = _aw_nodes(grid)
    cut = TAIL_CUT * math.sqrt(h)
    op = np.zeros((P * n, P * n), dtype=complex)
    for x0 in xs:
        lo = np.searchsorted(y, x0 - cut)
        hi = np.searchsorted(y, x0 + cut, side="right")
        if hi <= lo:
            continue
        idx = slice(lo, hi)
        # normalized continuum amplitude: the projector weight is dx, so
        # centers near or beyond the box edge contribute only their small
        # in-box tail instead of being renormalized to full mass
        g = (h * math.pi) ** (-0.25) * np.exp(-((y[idx] - x0) ** 2) / (2.0 * h))
        E = np.exp(1j * np.outer(y[idx], xis) / h)
        vals = np.asarray(symbol(x0, xis))
        gouter = dx * np.outer(g, g)
        if n == 1:
            M = (E * (w * vals)[None, :]) @ E.conj().T
            op[idx, idx.start:idx.stop] += gouter * M
        else:
            for a in range(n):
                for b in range(n):
                    M = (E * (w * vals[:, a, b])[None, :]) @ E.conj().T
                    op[a * P + lo:a * P + hi, b * P + lo:b * P + hi] += gouter * M
    return op


def _weyl_nodes(grid: GridSpec):
    """Momentum nodes for the Weyl kernel: dense enough that the discrete
    kernel has no position replica within reach of the box."""
    h = grid.h
    Xi = grid.nyquist
    s_res = NODE_SPACING * math.sqrt(h)
    s_rep = 2.0 * math.pi * h / (4.0 * grid.L + 1.0)
    s = min(s_res, s_rep)
    nxi = int(math.ceil(2.0 * Xi / s))
    sxi = 2.0 * Xi / nxi
    xis = -Xi + (np.arange(nxi) + 0.5) * sxi
    return xis, sxi


def weyl_build(symbol: Symbol, grid: GridSpec) -> np.ndarray:
    """Dense Weyl operator matrix from midpoint kernel quadrature."""
    y, h, dx = grid.x, grid.h, grid.dx
    P, n = grid.points, symbol.n
    xis, sxi = _weyl_nodes(grid)
    pref = dx * sxi / (2.0 * math.pi * h)
    offsets = y[:, None] - y[None, :]
    if symbol.xy_parts is not None and n == 1:
        # separable fast path: each term f(x) g(xi) has a Toeplitz xi-factor
        # over the unique offsets m*dx
        mids = 0.5 * (y[:, None] + y[None, :])
        op = np.zeros((P, P), dtype=complex)
        m = np.arange(-(P - 1), P)
        take = (np.arange(P)[:, None] - np.arange(P)[None, :]) + (P - 1)
        for fx, gxi in symbol.xy_parts:
            phases = np.exp(1j * np.outer(m * dx, xis) / h)
            tvals = phases @ gxi(xis) * pref
            op += fx(mids) * tvals[take]
        return op
    # generic chunked kernel quadrature
    op = np.zeros((P * n, P * n), dtype=complex)
    chunk = max(1, int(2e6 // (P * len(xis))))
    for j0 in range(0, P, chunk):
        j1 = min(j0 + chunk, P)
        mid = 0.5 * (y[:, None] + y[None, j0:j1])
        phase = np.exp(1j * offsets[:, j0:j1, None] * xis[None, None, :] / h)
        vals = np.asarray(symbol(mid[..., None], xis[None, None, :]))
        if n == 1:
            op[:, j0:j1] += pref * np.sum(vals * phase, axis=-1)
        else:
            K = pref * np.sum(vals * phase[..., None, None], axis=2)
            for a in range(n):
                for b in range(n):
                    op[a * P:(a + 1) * P, b * P + j0:b * P + j1] += K[:, :, a, b]
    return op


def certified_compressor(grid: GridSpec) -> np.ndarray:
    """Projector-like cutoff onto the phase-space region the grid certifies.

    Smooth position window inside the box and smooth momentum window inside
    [-xi_max, xi_max]; quantization comparisons are made on this range,
    away from box edges and the Nyquist band edge where any discrete
    quantization degrades.
    """
    h = grid.h
    y = grid.x
    P = grid.points
    r = 2.0 * math.sqrt(h)

    def window(u, lo, hi):
        w = np.ones_like(u)
        w = np.where(u < lo, 0.0, w)
        w = np.where(u > hi, 0.0, w)
        ramp_lo = (u >= lo) & (u < lo + r)
        ramp_hi = (u > hi - r) & (u <= hi)
        w[ramp_lo] = np.sin(0.5 * math.pi * (u[ramp_lo] - lo) / r) ** 2
        w[ramp_hi] = np.sin(0.5 * math.pi * (hi - u[ramp_hi]) / r) ** 2
        return w

    margin = (TAIL_CUT + 2.0) * math.sqrt(h)
    wx = window(y, -grid.L + margin, grid.L - margin)
    eta = 2.0 * math.pi * h * np.fft.fftfreq(P, d=grid.dx)
    xi_cut = min(grid.xi_max, grid.nyquist - margin)
    weta = window(eta, -xi_cut, xi_cut)
    F = np.fft.fft(np.eye(P), axis=0)
    C = (F.conj().T @ (weta[:, None] * F)) / P
    return wx[:, None] * C * wx[None, :]


def mollified_weyl_residual(symbol: Symbol, grid: GridSpec) -> float:
    """Relative gap ||Op_AW(a) - Op_W(a * eps)|| on the certified region.

    a * eps is the symbolically mollified symbol (symbols without one are
    rejected).  The difference is compressed away from box and momentum-band
    edges before taking the spectral norm; the denominator is the full
    ||Op_AW(a)||.
    """
    if symbol.mollified is None:
        raise ValueError("symbol has no symbolic mollification")
    if symbol.n != 1:
        raise ValueError("mollified comparison is implemented for scalar symbols")
    A = antiwick_build(symbol, grid)
    Wm = weyl_build(symbol.mollified(grid.h), grid)
    C = certified_compressor(grid)
    diff = C.conj().T @ (A - Wm) @ C
    denom = np.linalg.norm(A, ord=2)
    return float(np.linalg.norm(diff, ord=2) / denom)


def identity_error(grid: GridSpec, probes: list | None = None) -> float:
    """Worst relative error of Op_AW(1) f = f over interior test states.

    Default probes are coherent states placed 5 sqrt(h) or more inside the
    box with momenta across the covered band.
    """
    A = antiwick_build(symbol_one(), grid)
    if probes is None:
        span = grid.L - 6.0 * math.sqrt(grid.h)
        ximax = grid.xi_max - 0.2
        probes = [coherent_state(x0, xi0, grid)
                  for x0 in np.linspace(-span, span, 5)
                  for xi0 in np.linspace(-ximax, ximax, 5)]
        y = grid.x
        bump = np.exp(-0.5 * (y / max(span, 1e-9)) ** 2) * np.cos(3.0 * y)
        probes.append(bump.astype(complex))
    worst = 0.0
    for f in probes:
        worst = max(worst, float(np.linalg.norm(A @ f - f) / np.linalg.norm(f)))
    return worst


def aw_weyl_gap(symbol: Symbol, grid: GridSpec) -> float:
    """Compressed ||Op_AW(a) - Op_W(a)||, the O(h) mollification gap."""
    A = antiwick_build(symbol, grid)
    W = weyl_build(symbol, grid)
    C = certified_compressor(grid)
    return float(np.linalg.norm(C.conj().T @ (A - W) @ C, ord=2))


# ---------------------------------------------------------------------------
# periodized (circle) variant


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid on the circle [0, 2pi) for the periodized quantization."""

    points: int
    h: float

    def __post_init__(self):
        if self.points < 8 or self.h <= 0:
            raise ValueError("need points >= 8 and h > 0")
        if self.dx > math.sqrt(self.h) / 4.0 + 1e-12:
            raise ValueError("circle grid spacing does not resolve sqrt(h)/4")

    @property
    def dx(self) -> float:
        return 2.0 * math.pi / self.points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.points) * self.dx

    @property
    def nyquist(self) -> float:
        return math.pi * self.h / self.dx  # = h * points / 2

    @classmethod
    def build(cls, h: float, xi_cover: float) -> "CircleGrid":
        """Smallest even grid resolving sqrt(h)/4 whose Nyquist band covers
        |xi| <= xi_cover plus Gaussian tails."""
        p1 = 8.0 * math.pi / math.sqrt(h)
        p2 = 2.0 * (xi_cover + TAIL_CUT * math.sqrt(h)) / h
        points = int(math.ceil(max(p1, p2) / 2.0)) * 2
        return cls(points, h)


def antiwick_build_circle(symbol: Symbol, grid: CircleGrid) -> np.ndarray:
    """Periodized anti-Wick operator for scalar or matrix symbols.

    Coherent states are wrapped by summing periodic images; with tails
    truncated at 8 sqrt(h) < pi a single image reaches each grid point, so
    the wrapped Gaussian reduces to the Gaussian of the wrapped distance.
    """
    h, P, dx = grid.h, grid.points, grid.dx
    n = symbol.n
    cut = TAIL_CUT * math.sqrt(h)
    if cut >= math.pi:
        raise ValueError("h too large for single-image periodization")
    Xi = grid.nyquist
    s = NODE_SPACING * math.sqrt(h)
    nxi = int(math.ceil(2.0 * Xi / s))
    sxi = 2.0 * Xi / nxi
    xis = -Xi + (np.arange(nxi) + 0.5) * sxi
    w = dx * sxi / (2.0 * math.pi * h)
    halfw = int(math.ceil(cut / dx))
    rel = np.arange(-halfw, halfw + 1)
    delta = rel * dx
    g = (h * math.pi) ** (-0.25) * np.exp(-(delta**2) / (2.0 * h))
    E = np.exp(1j * np.outer(delta, xis) / h)
    gouter = dx * np.outer(g, g)
    op = np.zeros((P * n, P * n), dtype=complex)
    for i0 in range(P):
        idx = (i0 + rel) % P
        vals = np.asarray(symbol(grid.x[i0], xis))
        if n == 1:
            M = gouter * ((E * (w * vals)[None, :]) @ E.conj().T)
            op[np.ix_(idx, idx)] += M
        else:
            for a in range(n):
                for b in range(n):
                    M = gouter * ((E * (w * vals[:, a, b])[None, :]) @ E.conj().T)
                    op[np.ix_(a * P + idx, b * P + idx)] += M
    return op

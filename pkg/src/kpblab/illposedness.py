"""Second-Picard-iterate norm growth: the explicit counterexample machinery.

Data concentrated on two frequency rectangles

    D_1 = [N/2, N) x [-6N^2, 6N^2),
    D_2 = [N, 2N) x [sqrt(3) N^2, (sqrt(3)+1) N^2),

with flat amplitude N^{-3/2-s} (plus the conjugate mirrors at negative xi so
the field is real), produces a second Picard iterate whose spectral density
on the output window

    xi in [3N/2, 3N],  eta in [(sqrt(3)-6) N^2, (sqrt(3)+7) N^2]

is an explicit double integral of the interaction kernel

    K(t) = (e^{-t(xi1^2+xi2^2)} e^{i t chi} - e^{-t xi^2}) / (-2 xi1 xi2 + i chi),
    chi  = 3 xi xi1 xi2 + (xi1 eta - xi eta1)^2 / (xi xi1 xi2),   xi2 = xi - xi1,

over the interaction set k(xi,eta) = k1 u k2 with
k1 = {nu1 in D_2 : nu - nu1 in D_1} and k2 the reflected copy.  Everything
here is continuum quadrature: k1 is itself a rectangle (an intersection of
two rectangles), the amplitude is constant on it, and the integrand is
invariant under nu1 -> nu - nu1, so the full integral is exactly twice the
midpoint-rule sum over k1.

Evaluating the H^{s,0} norm of the second iterate at t_N = N^{-3-eps0} for a
sweep of N and fitting log-norm against log N measures the growth exponent;
the analytic prediction for the slope is (-1 - 2 eps0 - 2 s)/2, positive for
s < -1/2 - eps0 (norm inflation) and negative above.

Continuum norms carry the same (2 pi)^{-2} Plancherel factor as the discrete
Parseval convention in spectral_core, so grid and continuum values of
||phi_N||_{H^{s,0}} are directly comparable.

Rectangle membership is closed-left, open-right on both axes (a fixed
measure-zero convention, for determinism).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .spectral_core import Grid2D, SpectralField

__all__ = [
    "Rectangle",
    "RectanglePair",
    "IllposedResult",
    "ScalingStudy",
    "rectangle_pair",
    "output_window",
    "interaction_rectangle",
    "build_phi_N",
    "PhiHat",
    "resonance_chi",
    "kernel_K",
    "second_iterate_hat",
    "second_iterate_norm",
    "scaling_study",
    "chi_bound_check",
]

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Rectangle:
    """Half-open frequency rectangle [xi_min, xi_max) x [eta_min, eta_max)."""

    xi_min: float
    xi_max: float
    eta_min: float
    eta_max: float

    def contains(self, xi, eta):
        return ((xi >= self.xi_min) & (xi < self.xi_max)
                & (eta >= self.eta_min) & (eta < self.eta_max))

    @property
    def area(self) -> float:
        return (self.xi_max - self.xi_min) * (self.eta_max - self.eta_min)


@dataclass(frozen=True)
class RectanglePair:
    """The two data rectangles D_1, D_2 at frequency scale N."""

    N: float
    D1: Rectangle
    D2: Rectangle


def rectangle_pair(N: float) -> RectanglePair:
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    n2 = N * N
    return RectanglePair(
        N=float(N),
        D1=Rectangle(N / 2, N, -6 * n2, 6 * n2),
        D2=Rectangle(N, 2 * N, _SQRT3 * n2, (_SQRT3 + 1) * n2),
    )


def output_window(N: float) -> tuple[float, float, float, float]:
    """(xi_lo, xi_hi, eta_lo, eta_hi) of the lower-bound window."""
    n2 = N * N
    return 1.5 * N, 3.0 * N, (_SQRT3 - 6) * n2, (_SQRT3 + 7) * n2


def interaction_rectangle(N: float, xi: float, eta: float) -> Rectangle | None:
    """The rectangle k1(xi, eta) = D_2 intersected with (nu - D_1), or None.

    nu1 in k1 means xi1 in [N, 2N) and xi - xi1 in [N/2, N), and likewise in
    eta; both constraints are intervals, so k1 is their product.
    """
    pair = rectangle_pair(N)
    xlo = max(pair.D2.xi_min, xi - pair.D1.xi_max)
    xhi = min(pair.D2.xi_max, xi - pair.D1.xi_min)
    ylo = max(pair.D2.eta_min, eta - pair.D1.eta_max)
    yhi = min(pair.D2.eta_max, eta - pair.D1.eta_min)
    if xlo >= xhi or ylo >= yhi:
        return None
    return Rectangle(xlo, xhi, ylo, yhi)


@dataclass(frozen=True)
class PhiHat:
    """Continuum descriptor of phi_N: flat amplitude on D_1 u D_2 u mirrors."""

    N: float
    s: float
    amplitude: float
    rectangles: RectanglePair

    def __call__(self, xi, eta):
        d1, d2 = self.rectangles.D1, self.rectangles.D2
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        inside = (d1.contains(xi, eta) | d2.contains(xi, eta)
                  | d1.contains(-xi, -eta) | d2.contains(-xi, -eta))
        return np.where(inside, self.amplitude, 0.0)

    def sobolev_norm(self, s1: float, s2: float = 0.0) -> float:
        """Exact continuum H^{s1,s2} norm (1-D quadrature per rectangle)."""
        total = 0.0
        for rect in (self.rectangles.D1, self.rectangles.D2):
            fx = quad(lambda x: (1.0 + x * x) ** s1, rect.xi_min, rect.xi_max,
                      epsrel=1e-12)[0]
            fy = quad(lambda y: (1.0 + y * y) ** s2, rect.eta_min, rect.eta_max,
                      epsrel=1e-12)[0]
            total += fx * fy
        total *= 2.0 * self.amplitude ** 2  # conjugate mirrors double the mass
        return math.sqrt(total / (4.0 * math.pi ** 2))


def build_phi_N(N: float, s: float, grid: Grid2D | None = None):
    """phi_N with hat value N^{-3/2-s} on D_1 u D_2 (mirrored to negative xi).

    With ``grid`` omitted, returns the continuum :class:`PhiHat` descriptor.
    With a grid, returns the SpectralField whose transform samples the same
    indicator; the grid must carry at least 8x8 modes inside each rectangle.
    """
    if N < 4:
        raise ValueError(f"N must be >= 4, got {N}")
    pair = rectangle_pair(N)
    amp = float(N) ** (-1.5 - s)
    descriptor = PhiHat(N=float(N), s=float(s), amplitude=amp, rectangles=pair)
    if grid is None:
        return descriptor

    for rect in (pair.D1, pair.D2):
        n_xi = np.count_nonzero((grid.xi >= rect.xi_min) & (grid.xi < rect.xi_max))
        n_eta = np.count_nonzero((grid.eta >= rect.eta_min) & (grid.eta < rect.eta_max))
        if n_xi < 8 or n_eta < 8:
            raise ValueError(
                f"grid resolves rectangle [{rect.xi_min},{rect.xi_max})x"
                f"[{rect.eta_min},{rect.eta_max}) with only {n_xi}x{n_eta} modes "
                "(need at least 8x8)")

    xi_m = grid.xi_mesh()
    eta_m = grid.eta_mesh()
    # hat values / (dx dy) is the coefficient normalization of spectral_core
    coeffs = descriptor(xi_m, eta_m).astype(complex) / (grid.dx * grid.dy)
    return SpectralField(grid=grid, coeffs=coeffs)


def _require_nonzero(*arrays) -> None:
    for a in arrays:
        if np.any(np.asarray(a) == 0.0):
            raise ValueError("xi, xi1 and xi - xi1 must all be nonzero")


def resonance_chi(xi, xi1, eta, eta1):
    """chi = 3 xi xi1 (xi-xi1) + (xi1 eta - xi eta1)^2 / (xi xi1 (xi-xi1))."""
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    eta = np.asarray(eta, dtype=float)
    eta1 = np.asarray(eta1, dtype=float)
    xi2 = xi - xi1
    _require_nonzero(xi, xi1, xi2)
    prod = xi * xi1 * xi2
    chi = 3.0 * prod + (xi1 * eta - xi * eta1) ** 2 / prod
    if chi.ndim == 0:
        return float(chi)
    return chi


def _cexpm1(z: np.ndarray) -> np.ndarray:
    """exp(z) - 1 for complex z without cancellation near 0.

    Real part: expm1(x) cos(y) - 2 sin^2(y/2); imaginary part: e^x sin(y).
    Both pieces are O(|z|) for small |z|.
    """
    x = np.real(z)
    y = np.imag(z)
    re = np.expm1(x) * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def kernel_K(t, xi, xi1, eta, eta1):
    """K = (e^{-t(xi1^2+xi2^2)} e^{i t chi} - e^{-t xi^2}) / (-2 xi1 xi2 + i chi).

    Evaluated as e^{-t xi^2} expm1(t (2 xi1 xi2 + i chi)) / (-2 xi1 xi2 + i chi),
    which is exact (xi^2 = xi1^2 + xi2^2 + 2 xi1 xi2) and avoids cancellation
    of the two exponentials for small t.
    """
    xi = np.asarray(xi, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = xi - xi1
    _require_nonzero(xi, xi1, xi2)
    chi = resonance_chi(xi, xi1, eta, eta1)
    cross = 2.0 * xi1 * xi2
    denom = -cross + 1j * np.asarray(chi)
    out = np.exp(-t * xi ** 2) * _cexpm1(t * (cross + 1j * np.asarray(chi))) / denom
    if out.ndim == 0:
        return complex(out)
    return out


def _midpoints(lo, hi, cells: int):
    """Midpoint nodes and cell width for [lo, hi) split into ``cells`` parts."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    h = (hi - lo) / cells
    offsets = (np.arange(cells) + 0.5)
    return lo[..., None] + offsets * h[..., None], h


def _dispersion(xi, eta):
    return xi ** 3 - eta ** 2 / xi


_MIN_CELLS = 64


def _check_cells(cells: int) -> None:
    if cells < _MIN_CELLS:
        raise ValueError(f"cells must be >= {_MIN_CELLS}, got {cells}")


def second_iterate_hat(N: float, s: float, t: float, xi: float, eta: float,
                       cells: int) -> complex:
    """Spectral density of the second Picard iterate at one (xi, eta).

    i xi e^{i t P(xi,eta)} times the midpoint-rule integral of
    phihat(nu1) phihat(nu-nu1) K(t, xi, xi1, eta, eta1) over k(xi,eta);
    by the nu1 -> nu - nu1 symmetry this is twice the k1 part.  Returns 0
    when the interaction set is empty.
    """
    _check_cells(cells)
    if N < 4:
        raise ValueError(f"N must be >= 4, got {N}")
    rect = interaction_rectangle(N, xi, eta)
    if rect is None:
        return 0.0 + 0.0j
    amp = float(N) ** (-1.5 - s)
    x_nodes, hx = _midpoints(np.float64(rect.xi_min), np.float64(rect.xi_max), cells)
    y_nodes, hy = _midpoints(np.float64(rect.eta_min), np.float64(rect.eta_max), cells)
    K = kernel_K(t, xi, x_nodes[:, None], eta, y_nodes[None, :])
    integral = 2.0 * amp * amp * np.sum(K) * hx * hy
    prefactor = 1j * xi * np.exp(1j * t * _dispersion(xi, eta))
    return complex(prefactor * integral)


def _window_density(N: float, s: float, t: float, cells: int) -> tuple[np.ndarray, float, float]:
    """|uhat_2|^2-weighted H^{s,0} integrand sampled on the output window.

    Returns (table, hx, hy): ``table[i, j]`` is xi^2 (1+xi^2)^s |I(xi_i, eta_j)|^2
    at window midpoints, with I the bare k-set integral (prefactor modulus
    xi folded into the weight).  Vectorized one outer-xi row at a time:
    arrays of shape (n_eta, cells, cells) cover every inner node of that row.
    """
    xi_lo, xi_hi, eta_lo, eta_hi = output_window(N)
    xi_nodes, hx = _midpoints(np.float64(xi_lo), np.float64(xi_hi), cells)
    eta_nodes, hy = _midpoints(np.float64(eta_lo), np.float64(eta_hi), cells)

    pair = rectangle_pair(N)
    amp2 = float(N) ** (2.0 * (-1.5 - s))
    table = np.zeros((cells, cells))

    # Inner eta-interval of k1 depends on the outer eta only
    y_lo = np.maximum(pair.D2.eta_min, eta_nodes - pair.D1.eta_max)
    y_hi = np.minimum(pair.D2.eta_max, eta_nodes - pair.D1.eta_min)
    y_ok = y_lo < y_hi
    y_mid, wy = _midpoints(y_lo, np.where(y_ok, y_hi, y_lo + 1.0), cells)
    eta_col = eta_nodes[:, None, None]
    y_mid = y_mid[:, None, :]

    for i, x in enumerate(xi_nodes):
        x_lo = max(pair.D2.xi_min, x - pair.D1.xi_max)
        x_hi = min(pair.D2.xi_max, x - pair.D1.xi_min)
        if x_lo >= x_hi:
            continue
        x_mid, wx = _midpoints(np.float64(x_lo), np.float64(x_hi), cells)
        xi1 = x_mid[None, :, None]
        xi2 = x - xi1
        prod = x * xi1 * xi2
        chi = 3.0 * prod + (xi1 * eta_col - x * y_mid) ** 2 / prod
        cross = 2.0 * xi1 * xi2
        K = np.exp(-t * x * x) * _cexpm1(t * (cross + 1j * chi)) / (-cross + 1j * chi)
        S = np.sum(K, axis=(1, 2)) * wx * wy  # (n_eta,)
        S = np.where(y_ok, S, 0.0)
        mod2 = np.abs(2.0 * amp2 * S) ** 2
        table[i, :] = x * x * (1.0 + x * x) ** s * mod2
    return table, hx, hy


@dataclass(frozen=True)
class IllposedResult:
    """One (N, s, eps0) evaluation of the second-iterate norm at t_N."""

    N: float
    s: float
    eps0: float
    t_N: float
    norm_u2: float
    norm_phi: float
    quadrature_cells: int


def second_iterate_norm(N: float, s: float, eps0: float, cells: int) -> IllposedResult:
    """H^{s,0} norm of the second iterate at t_N = N^{-3-eps0} over the window.

    The squared norm is the midpoint-rule integral of
    xi^2 (1+xi^2)^s |I(xi,eta)|^2 over the output window, divided by
    (2 pi)^2 to match the Parseval convention of the discrete norms.
    """
    if N < 8:
        raise ValueError(f"N must be >= 8, got {N}")
    _check_cells(cells)
    t_N = float(N) ** (-(3.0 + eps0))
    table, hx, hy = _window_density(N, s, t_N, cells)
    norm_sq = float(np.sum(table)) * hx * hy / (4.0 * math.pi ** 2)
    phi = build_phi_N(N, s)
    return IllposedResult(
        N=float(N), s=float(s), eps0=float(eps0), t_N=t_N,
        norm_u2=math.sqrt(norm_sq), norm_phi=phi.sobolev_norm(s, 0.0),
        quadrature_cells=int(cells),
    )


@dataclass(frozen=True)
class ScalingStudy:
    """Fitted growth exponent of ||u_2(t_N)||_{H^{s,0}} against N."""

    slope: float
    intercept: float
    results: tuple[IllposedResult, ...]


def scaling_study(N_list, s: float, eps0: float, cells: int) -> ScalingStudy:
    """Least-squares slope of log norm_u2 vs log N over an increasing N sweep."""
    Ns = [float(N) for N in N_list]
    if len(Ns) < 4:
        raise ValueError(f"need at least 4 values of N, got {len(Ns)}")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("N_list must be strictly increasing")
    results = tuple(second_iterate_norm(N, s, eps0, cells) for N in Ns)
    logN = np.log([r.N for r in results])
    logU = np.log([r.norm_u2 for r in results])
    slope, intercept = np.polyfit(logN, logU, 1)
    return ScalingStudy(slope=float(slope), intercept=float(intercept),
                        results=results)


def chi_bound_check(N: float, samples: int, seed: int = 0) -> float:
    """max over random interaction tuples of |chi| / N^3.

    (xi, eta) is drawn uniformly in the output window, (xi1, eta1) uniformly
    in k1(xi, eta), then reflected to k2 with probability 1/2 (chi is
    invariant under the reflection).  Every interior window point has a
    nonempty k1, so the boundary guard below drops nothing almost surely.
    The sampled ratio distribution is exactly N-independent because chi scales
    as N^3 under (xi, eta) -> (N xi', N^2 eta').
    """
    if samples < 10_000:
        raise ValueError(f"samples must be >= 10000, got {samples}")
    rng = np.random.default_rng([int(seed), int(N)])
    xi_lo, xi_hi, eta_lo, eta_hi = output_window(N)
    pair = rectangle_pair(N)

    xi = rng.uniform(xi_lo, xi_hi, size=samples)
    eta = rng.uniform(eta_lo, eta_hi, size=samples)
    x_lo = np.maximum(pair.D2.xi_min, xi - pair.D1.xi_max)
    x_hi = np.minimum(pair.D2.xi_max, xi - pair.D1.xi_min)
    y_lo = np.maximum(pair.D2.eta_min, eta - pair.D1.eta_max)
    y_hi = np.minimum(pair.D2.eta_max, eta - pair.D1.eta_min)
    ok = (x_lo < x_hi) & (y_lo < y_hi)  # boundary fibers are measure zero
    xi, eta = xi[ok], eta[ok]
    x_lo, x_hi, y_lo, y_hi = x_lo[ok], x_hi[ok], y_lo[ok], y_hi[ok]

    xi1 = rng.uniform(x_lo, x_hi)
    eta1 = rng.uniform(y_lo, y_hi)
    flip = rng.random(xi.size) < 0.5
    xi1 = np.where(flip, xi - xi1, xi1)
    eta1 = np.where(flip, eta - eta1, eta1)

    chi = resonance_chi(xi, xi1, eta, eta1)
    return float(np.max(np.abs(chi)) / float(N) ** 3)

"""Doubly periodic dbar machinery on the torus with a hole.

The flat torus is C/(Z + i alpha Z); T^{alpha,sigma} keeps the cross of
two width-sigma laths around the skeleton.  The construction takes a
holomorphic g on the vertical annulus {|Re z| < 5 delta/2}/(z ~ z+i
alpha), blends it to the constant g(0) across the window
delta/2 < |Re z| < 3 delta/2 with the C^2 cutoff chi, and corrects the
resulting smooth map g1 by the solution f of dbar f = phi := dbar g1.

The correction uses the doubly periodic kernels

  wp(z)    = 1/z^2 + sum' [ 1/(z-u)^2 - 1/u^2 ],
  wp_nu(z) = 1/z - 1/(z-nu) + sum' [ 1/(z-u) - 1/(z-u-nu) + nu/u^2 ],

with u running over the lattice Z + i alpha Z minus the origin and
nu = (1 + i alpha)/2.  Sums are truncated to the box |n|,|m| <= N; the
documented tails are O(1/N) for wp_nu and O(1/N^2) for wp on compact
pole-free sets.  The solution

  f(z) = -(1/pi) * int_{Q_eps} phi(zeta) wp_nu(zeta - z) dm(zeta)

is computed by a tensor midpoint rule with exact analytic integration of
the Cauchy factor over cells containing (or adjacent to) the evaluation
point; the smooth kernel remainder is tabulated on pole-free strips and
interpolated by bicubic splines.

The cutoff profile chi0 integrates a C^1 trapezoid of height 3/2 (the
least possible maximum slope): chi0' rises along the cubic ramp
(3/2) p(3t), p(v) = 3v^2 - 2v^3, stays at 3/2 on [1/3, 2/3] and falls
symmetrically, making chi0 a piecewise quartic C^2 function with
chi0(0) = 0, chi0(1) = 1 and |chi0'| <= 3/2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.special import psi as _psi

from .errors import NumericalError, ValidationError
from .words import FreeWord


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    nu: complex | None = None
    trunc: int = 50

    def __post_init__(self):
        if self.alpha < 1:
            raise ValidationError("alpha must be >= 1")
        if self.trunc < 2:
            raise ValidationError("truncation order must be >= 2")
        nv = self.nu_value
        n = round(nv.real)
        m = round(nv.imag / self.alpha)
        if abs(nv - (n + 1j * m * self.alpha)) < 1e-9:
            raise ValidationError("nu must avoid the lattice")

    @property
    def nu_value(self) -> complex:
        return self.nu if self.nu is not None else 0.5 + 0.5j * self.alpha


def _lattice(params: KernelParams) -> np.ndarray:
    n = params.trunc
    ns, ms = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1))
    u = ns.ravel() + 1j * params.alpha * ms.ravel()
    return u[np.abs(u) > 0.5]


def _nearest_pole(z: complex, poles: np.ndarray) -> complex:
    return complex(poles[np.argmin(np.abs(poles - z))])


def _check_poles(params: KernelParams, z: np.ndarray, with_nu: bool) -> None:
    lat = np.concatenate([_lattice(params), [0.0]])
    poles = np.concatenate([lat, lat + params.nu_value]) if with_nu else lat
    flat = np.atleast_1d(z).ravel()
    d = np.abs(flat[:, None] - poles[None, :]).min(axis=1)
    if (d < 1e-6).any():
        bad = complex(flat[int(np.argmin(d))])
        raise ValidationError(
            f"evaluation point {bad} too close to kernel pole "
            f"{_nearest_pole(bad, poles)}")


def wp(params: KernelParams, z) -> np.ndarray | complex:
    """Truncated lattice sum for the double-pole kernel."""
    zz = np.asarray(z, dtype=complex)
    _check_poles(params, zz, with_nu=False)
    u = _lattice(params)
    w = zz[..., None] - u
    out = 1.0 / zz ** 2 + (1.0 / w ** 2 - 1.0 / u ** 2).sum(axis=-1)
    return out if out.shape else complex(out)


def wp_nu(params: KernelParams, z) -> np.ndarray | complex:
    """Truncated lattice sum for the simple-pole kernel."""
    zz = np.asarray(z, dtype=complex)
    _check_poles(params, zz, with_nu=True)
    u = _lattice(params)
    nu = params.nu_value
    w = zz[..., None]
    out = (1.0 / (w - u) - 1.0 / (w - u - nu) + nu / u ** 2).sum(axis=-1)
    out = out + 1.0 / zz - 1.0 / (zz - nu)
    return out if out.shape else complex(out)


def _wp_nu_rows(params: KernelParams, z: np.ndarray,
                skip: tuple[complex, ...] = ()) -> np.ndarray:
    """The same truncated sum computed row by row with digamma telescoping,
    optionally omitting the simple-pole terms at the lattice points in
    `skip` (used when tabulating the smooth remainder near those poles)."""
    n = params.trunc
    alpha, nu = params.alpha, params.nu_value
    u = _lattice(params)
    s0 = complex((nu / u ** 2).sum())
    out = np.full(z.shape, s0, dtype=complex)
    skipset = {(round(p.real), round(p.imag / alpha)) for p in skip}
    for m in range(-n, n + 1):
        x = z - 1j * m * alpha
        y = x - nu
        out += -_psi(y + n + 1) + _psi(y - n)
        row_skips = [pn for (pn, pm) in skipset if pm == m]
        if abs(m) >= 2 and not row_skips:
            out += _psi(x + n + 1) - _psi(x - n)
        else:
            for k in range(-n, n + 1):
                if k in row_skips:
                    continue
                out += 1.0 / (x - k)
    return out


def wp_tail_bound(params: KernelParams, wmax: float) -> float:
    """Bound for |wp - wp_truncated| on {|z| <= wmax}: paired terms decay
    like |u|^-4, and the off-box lattice satisfies sum |u|^-4 <= 4/N^2."""
    n = params.trunc
    if wmax > n / 2:
        raise ValidationError("tail bound needs |z| <= N/2")
    c = 30.0 * wmax ** 2 * (1.0 + wmax)
    return c * 4.0 / n ** 2


def wp_nu_tail_bound(params: KernelParams, wmax: float) -> float:
    """Bound for |wp_nu - wp_nu_truncated| on {|z| <= wmax}: single terms
    decay like |u|^-3 and the off-box lattice satisfies sum |u|^-3 <= 8/N."""
    n = params.trunc
    nu = abs(params.nu_value)
    if 2.0 * (wmax + nu) > n:
        raise ValidationError("tail bound needs 2(|z|+|nu|) <= N")
    a = 4.0 * nu * (2.0 * wmax + nu)
    b = 4.0 * nu * wmax * (wmax + nu)
    return a * 8.0 / n + b * 4.0 / n ** 2


# ---------------------------------------------------------------------------
# cutoff


def chi0(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise ValidationError("chi0 domain is [0,1]")
    if t > 0.5:
        return 1.0 - chi0(1.0 - t)
    if t <= 1.0 / 3.0:
        v = 3.0 * t
        return 0.5 * (v ** 3 - 0.5 * v ** 4)
    return 0.25 + 1.5 * (t - 1.0 / 3.0)


def chi0_prime(t: float) -> float:
    if not 0.0 <= t <= 1.0:
        raise ValidationError("chi0 domain is [0,1]")
    if t > 0.5:
        return chi0_prime(1.0 - t)
    if t <= 1.0 / 3.0:
        v = 3.0 * t
        return 1.5 * (3.0 * v ** 2 - 2.0 * v ** 3)
    return 1.5


def _clamp01(u: float) -> float:
    return 0.0 if u < 0.0 else (1.0 if u > 1.0 else u)


def chi(delta: float, t: float) -> float:
    if delta <= 0:
        raise ValidationError("delta must be positive")
    if abs(t) > 1.5 * delta * (1 + 1e-12):
        raise ValidationError("chi argument outside [-3 delta/2, 3 delta/2]")
    if abs(t) <= 0.5 * delta:
        return 1.0
    if t < 0:
        return chi0(_clamp01(t / delta + 1.5))
    return chi0(_clamp01(-t / delta + 1.5))


def chi_prime(delta: float, t: float) -> float:
    if abs(t) > 1.5 * delta:
        return 0.0
    if abs(t) <= 0.5 * delta:
        return 0.0
    if t < 0:
        return chi0_prime(_clamp01(t / delta + 1.5)) / delta
    return -chi0_prime(_clamp01(-t / delta + 1.5)) / delta


# ---------------------------------------------------------------------------
# configuration and blending


@dataclass(frozen=True)
class DbarConfig:
    """Geometry and constants of one dbar run; sigma = eps * delta."""

    eps: float
    delta: float = 0.1
    quad_n: int = 400
    c1: float | None = None
    c2: float | None = None
    lath_samples: int = 360
    lath_across: int = 7
    remainder_block: int = 4

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValidationError("eps must lie in (0,1)")
        if not 0 < self.delta <= 0.2:
            raise ValidationError("delta must lie in (0, 0.2]")
        if self.quad_n < 16:
            raise ValidationError("quadrature grid too coarse")

    @property
    def sigma(self) -> float:
        return self.eps * self.delta


def blend(g_value: complex, g_zero: complex, x: float, delta: float) -> complex:
    """g1(z) = chi(Re z) g(z) + (1 - chi(Re z)) g(0) inside the window,
    the constant g(0) beyond it."""
    if abs(x) >= 1.5 * delta:
        return g_zero
    c = chi(delta, x)
    return c * g_value + (1.0 - c) * g_zero


def phi_value(g_value: complex, g_zero: complex, x: float, delta: float) -> complex:
    """dbar g1 = (1/2) chi'(Re z) (g(z) - g(0))."""
    return 0.5 * chi_prime(delta, x) * (g_value - g_zero)


def validate_analytic(xs: np.ndarray, ys: np.ndarray, values: np.ndarray,
                      tol: float = 1e-8) -> float:
    """Cauchy-Riemann finite-difference residual of samples on a grid;
    raises when it exceeds the second-order FD allowance (floor tol)."""
    if values.shape != (ys.size, xs.size):
        raise ValidationError("value grid shape mismatch")
    if xs.size < 3 or ys.size < 3:
        raise ValidationError("analyticity check needs a 3x3 grid")
    hx = xs[1] - xs[0]
    hy = ys[1] - ys[0]
    gx = (values[1:-1, 2:] - values[1:-1, :-2]) / (2 * hx)
    gy = (values[2:, 1:-1] - values[:-2, 1:-1]) / (2 * hy)
    res = float(np.abs(0.5 * (gx + 1j * gy)).max())
    scale = max(float(np.abs(values).max()), 1.0)
    # holomorphic samples leave an O(h^2 g''') discretization residual
    h2 = max(hx, hy) ** 2
    third = _third_difference_scale(values, hx, hy)
    if res > max(tol * scale, h2 * third):
        raise ValidationError(
            f"samples fail the analyticity check (CR residual {res:.3e})")
    return res


def _third_difference_scale(values: np.ndarray, hx: float, hy: float) -> float:
    dx = np.diff(values, n=3, axis=1) / hx ** 3 if values.shape[1] > 3 else np.zeros(1)
    dy = np.diff(values, n=3, axis=0) / hy ** 3 if values.shape[0] > 3 else np.zeros(1)
    return float(max(np.abs(dx).max(), np.abs(dy).max()))


def blend_and_phi(xs: np.ndarray, ys: np.ndarray, values: np.ndarray,
                  cfg: DbarConfig) -> tuple[np.ndarray, np.ndarray]:
    """Blend a holomorphic sample grid on the strip |Re z| < 3 delta/2 and
    return (g1, phi) on the same grid; checks analyticity and the bound
    |phi| <= (3/2) C1/delta."""
    validate_analytic(xs, ys, values)
    i0 = int(np.argmin(np.abs(xs)))
    j0 = int(np.argmin(np.abs(ys)))
    g_zero = complex(values[j0, i0])
    g1 = np.empty_like(values)
    phi = np.empty_like(values)
    for i, x in enumerate(xs):
        cx = chi(cfg.delta, float(x)) if abs(x) <= 1.5 * cfg.delta else 0.0
        cpx = chi_prime(cfg.delta, float(x))
        g1[:, i] = cx * values[:, i] + (1.0 - cx) * g_zero
        phi[:, i] = 0.5 * cpx * (values[:, i] - g_zero)
    c1 = cfg.c1 if cfg.c1 is not None else float(np.abs(values).max())
    cap = 1.5 * c1 / cfg.delta
    if float(np.abs(phi).max()) > cap * (1 + 1e-9):
        raise ValidationError("phi exceeds the (3/2) C1/delta bound; "
                              "C1 is too small for this g")
    return g1, phi


# ---------------------------------------------------------------------------
# quadrature over Q_eps


@dataclass
class QuadratureData:
    centers: np.ndarray    # complex cell centers with phi != 0
    areas: np.ndarray
    phi: np.ndarray
    hx: float
    hy: float
    all_centers: np.ndarray  # every cell center of Q_eps (phi = 0 included)


def q_eps_cells(cfg: DbarConfig) -> tuple[np.ndarray, float, float]:
    """Cell centers of the quad_n x quad_n midpoint rule over the bounding
    box of Q, restricted to Q_eps."""
    d, s = cfg.delta, cfg.sigma
    n = cfg.quad_n
    hx = 3.0 * d / n
    hy = d / n
    cx = -1.5 * d + (np.arange(n) + 0.5) * hx
    cy = -0.5 * d + (np.arange(n) + 0.5) * hy
    xx, yy = np.meshgrid(cx, cy)
    keep = (np.abs(yy) < 0.5 * s) | (np.abs(xx) < 0.5 * s)
    return (xx[keep] + 1j * yy[keep]), hx, hy


def quadrature_phi(g, cfg: DbarConfig) -> QuadratureData:
    """Evaluate phi = dbar g1 on the Q_eps midpoint cells for a callable
    holomorphic g (periodic with period i alpha)."""
    centers, hx, hy = q_eps_cells(cfg)
    g_zero = complex(g(0.0 + 0.0j))
    x = centers.real
    cp = np.array([chi_prime(cfg.delta, float(v)) for v in x])
    phi = np.zeros(centers.shape, dtype=complex)
    hot = cp != 0.0
    if hot.any():
        phi[hot] = 0.5 * cp[hot] * (g(centers[hot]) - g_zero)
    keep = phi != 0.0
    return QuadratureData(centers[keep], np.full(int(keep.sum()), hx * hy),
                          phi[keep], hx, hy, centers)


def rect_cauchy_integral(x0: float, x1: float, y0: float, y1: float,
                         w: complex) -> complex:
    """Exact integral over the rectangle of dm(zeta)/(zeta - w), by the
    Stokes identity with the bounded primitive (conj(zeta) - conj(w))/(zeta - w)."""
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0 + 0.0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        aa = a - w
        d = b - a
        if abs(aa) < 1e-14 or abs(aa + d) < 1e-14:
            w = w + (1e-12 + 1e-12j)
            return rect_cauchy_integral(x0, x1, y0, y1, w)
        ell = cmath.log((aa + d) / aa)
        total += ell * (aa.conjugate() - aa * d.conjugate() / d)
    return total / 2j


# ---------------------------------------------------------------------------
# kernel remainder tables


class _RemainderTable:
    """Bicubic spline of R_reg(w) = wp_nu(w) - sum_p 1/(w - p) over a
    pole-free rectangle, with p running over the subtracted pole set."""

    def __init__(self, params: KernelParams, poles: tuple[complex, ...],
                 re_lo, re_hi, im_lo, im_hi, step=0.01):
        xs = np.linspace(re_lo, re_hi, max(8, int((re_hi - re_lo) / step) + 1))
        ys = np.linspace(im_lo, im_hi, max(8, int((im_hi - im_lo) / step) + 1))
        xx, yy = np.meshgrid(xs, ys)
        w = xx + 1j * yy
        vals = _wp_nu_rows(params, w, skip=poles)
        if not np.isfinite(vals).all() or np.abs(vals).max() > 1e4:
            raise ValidationError(
                "kernel remainder table hits a pole; the lath width is too "
                "large for the tabulated strips (reduce sigma or delta)")
        self.re_spl = RectBivariateSpline(xs, ys, vals.real.T)
        self.im_spl = RectBivariateSpline(xs, ys, vals.imag.T)
        self.box = (re_lo, re_hi, im_lo, im_hi)
        self.max_abs = float(np.abs(vals).max())

    def contains(self, w: np.ndarray) -> np.ndarray:
        re_lo, re_hi, im_lo, im_hi = self.box
        return ((w.real >= re_lo) & (w.real <= re_hi)
                & (w.imag >= im_lo) & (w.imag <= im_hi))

    def eval(self, w: np.ndarray) -> np.ndarray:
        return (self.re_spl.ev(w.real, w.imag)
                + 1j * self.im_spl.ev(w.real, w.imag))


# ---------------------------------------------------------------------------
# the dbar solution


class DbarSolution:
    """f(z) = -(1/pi) int_{Q_eps} phi(zeta) wp_nu(zeta - z) dm(zeta).

    The kernel splits into the five nearby simple poles (the origin and its
    four lattice neighbours, so that z may roam the fundamental cross plus
    one period in each direction) plus a smooth remainder interpolated from
    the strip tables.  Cells containing or adjacent to an evaluation point
    swap the midpoint Cauchy term for the exact rectangle integral.
    """

    def __init__(self, quad: QuadratureData, params: KernelParams,
                 cfg: DbarConfig):
        self.quad = quad
        self.params = params
        self.cfg = cfg
        a = params.alpha
        self.poles = (0.0 + 0.0j, 1.0 + 0.0j, -1.0 + 0.0j,
                      1j * a, -1j * a)
        pad = 0.05
        d = cfg.delta
        h_im = 0.5 * d + cfg.sigma + pad
        h_re = 1.5 + 1.5 * d + pad
        self._h_box = (-h_re, h_re, -h_im, h_im)
        v_re = 1.5 * d + cfg.sigma + pad
        v_im = 1.5 * a + 0.5 * d + pad
        self._v_box = (-v_re, v_re, -v_im, v_im)
        self._tables: list[_RemainderTable] | None = None
        self._blocks = self._aggregate_blocks(cfg.remainder_block)

    def _aggregate_blocks(self, b: int) -> tuple[np.ndarray, np.ndarray]:
        """Group cells into b x b blocks for the smooth remainder part
        (mass-weighted centroids; the resulting error is holomorphic in the
        evaluation point and quartically small in the block size)."""
        c = self.quad.centers
        pa = self.quad.phi * self.quad.areas
        if b <= 1 or c.size == 0:
            return c, pa
        kx = np.round(c.real / (b * self.quad.hx)).astype(np.int64)
        ky = np.round(c.imag / (b * self.quad.hy)).astype(np.int64)
        keys = kx * 10 ** 6 + ky
        order = np.argsort(keys, kind="stable")
        keys, c, pa = keys[order], c[order], pa[order]
        starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
        sums = np.add.reduceat(pa, starts)
        weights = np.abs(pa) + 1e-300
        centroids = (np.add.reduceat(c * weights, starts)
                     / np.add.reduceat(weights, starts))
        return centroids, sums

    def _remainders(self) -> list[_RemainderTable]:
        if self._tables is None:
            self._tables = [
                _RemainderTable(self.params, self.poles, *self._h_box),
                _RemainderTable(self.params, self.poles, *self._v_box),
            ]
        return self._tables

    def remainder(self, w: np.ndarray) -> np.ndarray:
        """R_reg on the union of the two strip boxes."""
        out = np.empty(w.shape, dtype=complex)
        done = np.zeros(w.shape, dtype=bool)
        for table in self._remainders():
            sel = table.contains(w) & ~done
            if sel.any():
                out[sel] = table.eval(w[sel])
                done[sel] = True
        if not done.all():
            bad = w[~done].ravel()[0]
            raise ValidationError(
                f"kernel remainder requested outside tabulated strips at {bad}")
        return out

    def kernel_c2(self) -> float:
        """Numeric bound for |wp_nu(w) - 1/w| over the tabulated strips."""
        bound = 0.0
        for table in self._remainders():
            re_lo, re_hi, im_lo, im_hi = table.box
            xs = np.linspace(re_lo, re_hi, 160)
            ys = np.linspace(im_lo, im_hi, 40)
            xx, yy = np.meshgrid(xs, ys)
            w = (xx + 1j * yy).ravel()
            vals = table.eval(w)
            for p in self.poles[1:]:
                vals += 1.0 / (w - p)
            keep = np.ones(w.shape, dtype=bool)
            for p in self.poles[1:]:
                keep &= np.abs(w - p) > 0.24
            if keep.any():
                bound = max(bound, float(np.abs(vals[keep]).max()))
        return 1.1 * bound + wp_nu_tail_bound(self.params, 2.0)

    def f(self, z) -> np.ndarray | complex:
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        flat = zz.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        centers = self.quad.centers
        phi_a = self.quad.phi * self.quad.areas
        hx, hy = self.quad.hx, self.quad.hy
        blk_c, blk_pa = self._blocks
        sing_radius = 2.5 * max(hx, hy)
        chunk = max(1, int(4e6 // max(1, centers.size)))
        for lo in range(0, flat.size, chunk):
            zc = flat[lo:lo + chunk]
            wb = blk_c[None, :] - zc[:, None]
            acc = (blk_pa[None, :] * self.remainder(wb)).sum(axis=1)
            w0 = centers[None, :] - zc[:, None]
            for p in self.poles:
                wp_ = w0 - p
                near = np.abs(wp_) < sing_radius
                terms = phi_a[None, :] / np.where(near, 1.0, wp_)
                if near.any():
                    rows, cols = np.nonzero(near)
                    for r, c in zip(rows, cols):
                        zeta = centers[c]
                        w_tgt = zc[r] + p
                        exact = rect_cauchy_integral(
                            zeta.real - hx / 2, zeta.real + hx / 2,
                            zeta.imag - hy / 2, zeta.imag + hy / 2, w_tgt)
                        terms[r, c] = self.quad.phi[c] * exact
                acc += terms.sum(axis=1)
            out[lo:lo + chunk] = -acc / math.pi
        out = out.reshape(zz.shape)
        return out if out.shape != (1,) or np.ndim(z) else complex(out[0])


def solve_dbar(quad: QuadratureData, params: KernelParams,
               cfg: DbarConfig) -> DbarSolution:
    if quad.centers.size and (np.abs(quad.centers.real) > 1.5 * cfg.delta + 1e-12).any():
        raise ValidationError("phi support must lie inside Q")
    min_h = min(quad.hx, quad.hy)
    if min_h > cfg.sigma / 2:
        raise NumericalError(
            f"quadrature grid too coarse to resolve the Cauchy singularity "
            f"(cell {min_h:.2e} vs sigma {cfg.sigma:.2e})")
    return DbarSolution(quad, params, cfg)


def sup_f_budget(c1: float, c2: float, eps: float, delta: float) -> float:
    """Supremum budget for |f|:
    6 C1 C2 eps delta / pi + (3 C1 / (pi delta)) (2 sqrt2 pi eps delta
    + 4 eps delta log(3/eps))."""
    ed = eps * delta
    return (6.0 * c1 * c2 * ed / math.pi
            + 3.0 * c1 / (math.pi * delta)
            * (2.0 * math.sqrt(2.0) * math.pi * ed + 4.0 * ed * math.log(3.0 / eps)))


# ---------------------------------------------------------------------------
# sampling grids and diagnostics


def cross_grid(params: KernelParams, cfg: DbarConfig,
               along: int | None = None, across: int | None = None) -> np.ndarray:
    """Sample points on the fundamental cross of T^{alpha,sigma}."""
    a = params.alpha
    s = cfg.sigma
    along = along or cfg.lath_samples
    across = across or cfg.lath_across
    ts = np.linspace(-0.5 + 1e-3, 0.5 - 1e-3, along)
    us = np.linspace(-s / 2 + s / 64, s / 2 - s / 64, across)
    vert = (us[None, :] + 1j * a * ts[:, None]).ravel()
    horiz = (ts[:, None] + 1j * us[None, :]).ravel()
    return np.concatenate([vert, horiz])


@dataclass
class SolveDiagnostics:
    sup_f: float
    budget: float
    c1: float
    c2: float
    fd_dbar_residual: float
    off_support_residual: float
    periodic_defect: float


def fd_dbar(fvals: dict[str, np.ndarray], step_x: float, step_y: float) -> np.ndarray:
    """Central-difference dbar from f at z, z +- hx, z +- i hy."""
    gx = (fvals["xp"] - fvals["xm"]) / (2 * step_x)
    gy = (fvals["yp"] - fvals["ym"]) / (2 * step_y)
    return 0.5 * (gx + 1j * gy)


def _fd_values(sol: DbarSolution, z: np.ndarray, sx: float, sy: float):
    return {
        "xp": sol.f(z + sx), "xm": sol.f(z - sx),
        "yp": sol.f(z + 1j * sy), "ym": sol.f(z - 1j * sy),
    }


def fd_nodes(quad: QuadratureData, cfg: DbarConfig, stride: int = 3) -> np.ndarray:
    """Q_eps cell centers where a +-hy dbar stencil sees a smooth field:
    inside the lath where chi' can be nonzero (support edges at
    |Im z| = sigma/2 must not be crossed), and in the chi' = 0 band of the
    vertical strip away from the corner."""
    s, d = cfg.sigma, cfg.delta
    hy = quad.hy
    pts = quad.all_centers
    horiz = (np.abs(pts.imag) < s / 2 - hy) & (np.abs(pts.real) < 1.5 * d - 2 * hy)
    vert = (np.abs(pts.real) < s / 2) & \
           (np.abs(pts.imag) > s / 2 + 2 * hy) & \
           (np.abs(pts.imag) < 0.5 * d - 2 * hy)
    sel = pts[horiz | vert]
    return sel[::stride]


def solve_diagnostics(sol: DbarSolution, g, g_zero: complex) -> SolveDiagnostics:
    cfg, params = sol.cfg, sol.params
    quad = sol.quad
    hx, hy = quad.hx, quad.hy

    nodes = fd_nodes(quad, cfg)
    vals = _fd_values(sol, nodes, hy, hy)
    dbar_fd = fd_dbar(vals, hy, hy)
    phi_true = np.array([phi_value(complex(g(z)), g_zero, float(z.real), cfg.delta)
                         for z in nodes])
    fd_res = float(np.abs(dbar_fd - phi_true).max()) if nodes.size else 0.0

    # off-support holomorphy of f alone
    a = params.alpha
    off = cross_grid(params, cfg, along=120, across=3)
    off = off[(np.abs(off.real) > 1.6 * cfg.delta) | (np.abs(off.imag) > 0.6 * cfg.delta)]
    off = off[:240]
    so = cfg.sigma / 8
    off_res = float(np.abs(fd_dbar(_fd_values(sol, off, so, so), so, so)).max())

    grid = cross_grid(params, cfg)
    fvals = sol.f(grid)
    sup_f = float(np.abs(fvals).max())

    # the torus gluing shifts each lath along its own direction
    vert = grid[np.abs(grid.real) <= cfg.sigma / 2][::5]
    horiz = grid[np.abs(grid.imag) <= cfg.sigma / 2][::5]
    defect = max(
        float(np.abs(sol.f(horiz + 1.0) - sol.f(horiz)).max()),
        float(np.abs(sol.f(vert + 1j * a) - sol.f(vert)).max()))

    c1 = cfg.c1 if cfg.c1 is not None else _c1_estimate(g, params, cfg)
    c2 = cfg.c2 if cfg.c2 is not None else sol.kernel_c2()
    return SolveDiagnostics(sup_f, sup_f_budget(c1, c2, cfg.eps, cfg.delta),
                            c1, c2, fd_res, off_res, defect)


def _c1_estimate(g, params: KernelParams, cfg: DbarConfig) -> float:
    xs = np.linspace(-2.5 * cfg.delta, 2.5 * cfg.delta, 41)
    ys = np.linspace(0.0, params.alpha, 101)
    zz = xs[None, :] + 1j * ys[:, None]
    return 1.02 * float(np.abs(g(zz)).max())


# ---------------------------------------------------------------------------
# the end-to-end demo: single-generator-power monodromy


@dataclass
class DemoResult:
    alpha: float
    sigma: float
    target: FreeWord
    decoded: FreeWord
    sup_f: float
    clearance: float
    dbar_residual: float
    circle_samples: np.ndarray
    map_samples: np.ndarray

    def to_json(self) -> dict:
        from .words import format_word

        return {
            "alpha": self.alpha,
            "sigma": self.sigma,
            "target": format_word(self.target),
            "sup_f": self.sup_f,
            "clearance": self.clearance,
            "decoded": format_word(self.decoded),
            "dbar_residual": self.dbar_residual,
        }


def demo_g(alpha: float, gen: int, n: int, rho: float):
    """Holomorphic i*alpha-periodic map of the vertical annulus into a
    punctured disc around -1 (gen 1) or +1 (gen 2), winding n times."""
    center = -1.0 if gen == 1 else 1.0

    def g(z):
        return center + rho * np.exp(2.0 * math.pi * n * np.asarray(z) / alpha)

    return g


def demo_config(alpha: float, sigma: float, n: int) -> DbarConfig:
    """Blend width tuned so the winding-n growth across the window stays
    bounded: delta = min(1/10, alpha/(10 |n|))."""
    delta = min(0.1, alpha / (10.0 * abs(n)))
    return DbarConfig(eps=sigma / delta, delta=delta, quad_n=200)


def demo_construct(alpha: float, sigma: float, target: FreeWord,
                   cfg: DbarConfig | None = None, trunc: int = 50,
                   circle_samples: int = 1024) -> DemoResult:
    """Build a holomorphic map T^{alpha,sigma} -> C minus {-1,1} whose
    monodromy along the vertical generator is the single-power target,
    and decode it back from samples."""
    if target.is_identity or len(target.terms) != 1:
        raise ValidationError("demo target must be a single power a1^n or a2^n")
    gen, n = target.terms[0]
    if n == 0:
        raise ValidationError("target exponent must be nonzero")
    cfg = cfg or demo_config(alpha, sigma, n)
    if abs(cfg.sigma - sigma) > 1e-12:
        raise ValidationError("config sigma does not match the requested sigma")
    params = KernelParams(alpha, trunc=trunc)

    growth = math.exp(2.0 * math.pi * abs(n) * (1.5 * cfg.delta) / alpha)
    rho = 0.5 / growth
    g = demo_g(alpha, gen, n, rho)
    g_zero = complex(g(0.0 + 0.0j))

    quad = quadrature_phi(g, cfg)
    sol = solve_dbar(quad, params, cfg)

    grid = cross_grid(params, cfg)
    g1 = np.array([blend(complex(g(z)), g_zero, float(z.real), cfg.delta)
                   for z in grid])
    clearance = float(min(np.abs(g1 - 1.0).min(), np.abs(g1 + 1.0).min()))
    fvals = sol.f(grid)
    if not np.isfinite(fvals).all():
        raise NumericalError("dbar solution returned non-finite values")
    sup_f = float(np.abs(fvals).max())
    # pointwise puncture margin: h_t = g1 - t f stays clear of -1 and 1
    # for all t in [0,1], which keeps the monodromy of h that of g1
    margin = np.minimum(np.abs(g1 - 1.0), np.abs(g1 + 1.0)) - np.abs(fvals)
    if not float(margin.min()) > 0.0:
        raise ValidationError(
            f"eps too large: sup|f| {sup_f:.4e} vs clearance {clearance:.4e} "
            "(pointwise puncture margin exhausted)")

    # holomorphy of h = g1 - f off the support
    so = cfg.sigma / 8
    off = grid[(np.abs(grid.real) > 1.6 * cfg.delta)
               | (np.abs(grid.imag) > 0.6 * cfg.delta)][:240]
    hvals = {}
    for key, dz in (("xp", so), ("xm", -so), ("yp", 1j * so), ("ym", -1j * so)):
        zz = off + dz
        g1s = np.array([blend(complex(g(z)), g_zero, float(z.real), cfg.delta)
                        for z in zz])
        hvals[key] = g1s - sol.f(zz)
    residual = float(np.abs(fd_dbar(hvals, so, so)).max())

    ys = np.linspace(0.0, alpha, circle_samples, endpoint=False)
    circle = 1j * ys
    h = g(circle) - sol.f(circle)
    samples = np.concatenate([h, h[:1]])

    from .config3 import decode_word, plane_loop

    decoded = decode_word(plane_loop(list(samples)))
    return DemoResult(alpha, sigma, target, decoded, sup_f, clearance,
                      residual, np.concatenate([circle, circle[:1]]), samples)

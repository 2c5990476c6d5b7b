"""Green's-function solver for the inhomogeneous mode equation.

Solves (1 - rho^2) u'' + (4/rho - 2(lam+2) rho) u' - (lam+1)(lam+2) u
+ 16/(1+rho^2)^2 u = -f on (0, 1) with the regularity selected by the
similarity problem: analytic at the origin and at the light cone.  The
solution is assembled from the fundamental pair (u0 regular at 0, u1
analytic at 1), rescaled so that W(u1, u0) = 2(1-lam) rho^-4
(1-rho^2)^-lam, in two independent ways:

* a direct variation-of-constants form, valid for Re lam in (0, 3/4],
  whose integrals carry the endpoint weight (1-s)^(lam-1);
* an integrated-by-parts form valid on the whole strip |Re lam| <= 3/4
  away from 0 and from eigenvalues, built from the antiderivatives
  U_j(rho) = 1/(2(1-lam)) int_0^rho s^4 u_j (1-s^2)^(lam-1) ds and the
  boundary functional b(f).

Quadrature: composite per-cell Gauss-Legendre away from the light cone;
the weight-singular endpoint cells use Gauss-Jacobi nodes when lam is
real and a Legendre fit paired with exact complex power moments
int_0^1 w^(e+j) dw otherwise.  Every knob lives in QuadratureSettings
and doubling any of them must leave results unchanged to 1e-8.

The lam = 1 mode equation is also solved in its potential-free reduced
form by an explicit variation-of-constants formula (lambda1_free_solve),
which is the route used to manufacture range elements of the full
operator at the gauge eigenvalue.
"""

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import legendre as npleg
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp
from scipy.special import roots_jacobi

from .grid import Grid, RadialField, evaluate_at, fd_weights
from .spectral import (
    _second_derivative_from_ode,
    _singular_series_at_one,
    _singular_series_at_zero,
    analytic_series_at_one,
    regular_series_at_zero,
)

__all__ = [
    "QuadratureSettings",
    "FundamentalPair",
    "fundamental_pair",
    "reduced_source",
    "second_component",
    "resolvent_direct",
    "resolvent_ibp",
    "lambda1_free_solve",
]

_EIG_GUARD = 1e-4
_EXCLUSION = 0.05
_SERIES_LEN = 140


@dataclass(frozen=True)
class QuadratureSettings:
    """Quadrature knobs; results must be stable under doubling any of them.

    gl_order: Gauss-Legendre nodes per grid cell.
    tail_degree: Legendre fit degree for the endpoint-moment tails.
    jacobi_order: Gauss-Jacobi order for real-lambda endpoint weights.
    zone_cells: cells in the light-cone endpoint zone; None picks
        max(4, (n-1)//32) from the grid.
    """

    gl_order: int = 12
    tail_degree: int = 14
    jacobi_order: int = 64
    zone_cells: int | None = None

    def doubled(self) -> "QuadratureSettings":
        return replace(
            self,
            gl_order=2 * self.gl_order,
            tail_degree=2 * self.tail_degree,
            jacobi_order=2 * self.jacobi_order,
        )

    def resolve_zone(self, n: int) -> int:
        k = self.zone_cells if self.zone_cells is not None else max(4, (n - 1) // 32)
        if not 2 <= k <= (n - 1) // 4:
            raise ValueError("zone cell count %r unusable for n=%d" % (k, n))
        return k


DEFAULT_SETTINGS = QuadratureSettings()

_gl_cache: dict = {}
_cheb_cache: dict = {}


def _gl01(order):
    # Gauss-Legendre nodes/weights mapped to [0, 1]
    try:
        return _gl_cache[order]
    except KeyError:
        x, w = npleg.leggauss(order)
        pair = ((x + 1.0) / 2.0, w / 2.0)
        _gl_cache[order] = pair
        return pair


def _cheb_fit_points(deg):
    # open Chebyshev points on [0, 1] plus the inverse of the Legendre
    # Vandermonde there; endpoint-free so weight-singular factors are
    # never sampled at the singularity
    try:
        return _cheb_cache[deg]
    except KeyError:
        k = np.arange(deg + 1)
        x = np.cos(np.pi * (2 * k + 1) / (2 * (deg + 1)))
        vinv = np.linalg.inv(npleg.legvander(x, deg))
        pair = ((x + 1.0) / 2.0, vinv)
        _cheb_cache[deg] = pair
        return pair


def _legendre_power_moments(e, deg):
    # int_0^1 w^e P_j(2w - 1) dw = 1/(e+1) prod_{k<=j} (e-k+1)/(e+k+1)
    m = np.empty(deg + 1, complex)
    m[0] = 1.0 / (e + 1.0)
    for k in range(1, deg + 1):
        m[k] = m[k - 1] * (e - k + 1.0) / (e + k + 1.0)
    return m


def _legendre_log_moments(deg):
    # int_0^1 P_j(2w - 1) ln w dw: -1 for j=0, (-1)^(j+1)/(j(j+1)) after
    m = np.empty(deg + 1)
    m[0] = -1.0
    for k in range(1, deg + 1):
        m[k] = (-1.0) ** (k + 1) / (k * (k + 1.0))
    return m


def _tail_power(H, T, e, settings: QuadratureSettings):
    """int_0^T t^e H(t) dt for analytic H and Re e > -1.

    Real exponents go through Gauss-Jacobi with the weight built into
    the rule; complex ones through a Legendre fit of H with the power
    moments taken exactly.
    """
    e = complex(e)
    if e.real <= -1.0:
        raise ValueError("non-integrable endpoint exponent %r" % (e,))
    if T == 0.0:
        return 0.0j
    if e.imag == 0.0:
        x, w = roots_jacobi(settings.jacobi_order, 0.0, e.real)
        t = T * (x + 1.0) / 2.0
        return (T / 2.0) ** (e.real + 1.0) * np.sum(w * H(t))
    wpts, vinv = _cheb_fit_points(settings.tail_degree)
    c = vinv @ np.asarray(H(T * wpts), complex)
    return T ** (e + 1.0) * (c @ _legendre_power_moments(e, settings.tail_degree))


def _tail_log(H, T, settings: QuadratureSettings):
    # int_0^T H(t) ln t dt = T [ln T c_0 + sum_j c_j L_j]
    if T == 0.0:
        return 0.0
    wpts, vinv = _cheb_fit_points(settings.tail_degree)
    c = vinv @ np.asarray(H(T * wpts))
    out = c @ _legendre_log_moments(settings.tail_degree)
    return T * (out + math.log(T) * c[0])


def _cell_increments(lo, hi, fn, order):
    # one Gauss-Legendre panel per cell, vectorized over the cells
    x01, w01 = _gl01(order)
    width = (hi - lo)[:, None]
    pts = lo[:, None] + width * x01
    vals = np.asarray(fn(pts.ravel()), complex).reshape(pts.shape)
    return (vals * w01 * width).sum(axis=1)


def _segment_integral(a, b, fn, order):
    x01, w01 = _gl01(order)
    pts = a + (b - a) * x01
    return (b - a) * np.sum(w01 * np.asarray(fn(pts), complex))


# ---------------------------------------------------------------------------
# truncated-Taylor helpers (all about rho = 0, used below the switch radius)


def _binom_coeffs(mu, length, sign=1.0, stride=1):
    # coefficients of (1 + sign x^stride)^mu up to the given length
    out = np.zeros(length, complex)
    out[0] = 1.0
    b = 1.0 + 0.0j
    for m in range(1, (length - 1) // stride + 1):
        b *= (mu - (m - 1)) / m
        out[m * stride] = b * sign**m
    return out


def _poly_mul(a, b, length):
    return npoly.polymul(a, b)[:length]


def _poly_antider(c, shift=0):
    # antiderivative from 0 of x^shift * sum c_k x^k
    out = np.zeros(len(c) + shift + 1, complex)
    k = np.arange(len(c))
    out[k + shift + 1] = c / (k + shift + 1.0)
    return out


def _series_eval_pair(coeffs, x):
    return npoly.polyval(x, coeffs), npoly.polyval(x, npoly.polyder(coeffs))


# ---------------------------------------------------------------------------
# fundamental pair


class _PiecewiseSolution:
    """One mode solution on [0, 1]: endpoint series glued to a dense
    ODE transport; eval returns (u, du/drho) vectorized."""

    def __init__(self, segments, scale=1.0 + 0.0j):
        self._segments = segments
        self._scale = scale

    def rescaled(self, c) -> "_PiecewiseSolution":
        return _PiecewiseSolution(self._segments, self._scale * c)

    def eval(self, rho):
        arr = np.atleast_1d(np.asarray(rho, float))
        u = np.empty(arr.shape, complex)
        du = np.empty(arr.shape, complex)
        done = np.zeros(arr.shape, bool)
        for lo, hi, fn in self._segments:
            m = ~done & (arr >= lo) & (arr <= hi)
            if m.any():
                u[m], du[m] = fn(arr[m])
                done[m] = True
        if not done.all():
            raise ValueError("evaluation outside the covered interval [0, 1]")
        u *= self._scale
        du *= self._scale
        if np.isscalar(rho) or np.asarray(rho).ndim == 0:
            return u[0], du[0]
        return u, du

    def u(self, rho):
        return self.eval(rho)[0]


def _series_fn(ser):
    return lambda r: ser.eval(r)

def _combo_fn(ser_a, ser_b, ca, cb):
    def fn(r):
        ua, dua = ser_a.eval(r)
        ub, dub = ser_b.eval(r)
        return ca * ua + cb * ub, ca * dua + cb * dub
    return fn


def _combo_fn_at_one(ser_a, ser_s, ca, cs):
    # the singular factor (1-rho)^(1-lam) vanishes at rho = 1 for
    # Re lam < 1, so the endpoint itself only sees the analytic branch
    def fn(r):
        u = np.empty(r.shape, complex)
        du = np.empty(r.shape, complex)
        at1 = r == 1.0
        inside = ~at1
        if inside.any():
            ua, dua = ser_a.eval(r[inside])
            us, dus = ser_s.eval(r[inside])
            u[inside] = ca * ua + cs * us
            du[inside] = ca * dua + cs * dus
        if at1.any():
            ua, dua = ser_a.eval(r[at1])
            u[at1] = ca * ua
            du[at1] = ca * dua
        return u, du
    return fn


@dataclass(frozen=True, eq=False)
class FundamentalPair:
    """Wronskian-normalized fundamental pair for one lambda.

    u0 is regular at the origin, u1 analytic at the light cone with
    u1(1) = 1; u0 is rescaled so W(u1, u0)(rho) = 2(1-lam) rho^-4
    (1-rho^2)^-lam.  connection holds the raw invariant
    W(u0, u1) rho^4 (1-rho^2)^lam of the unit-normalized branches (the
    same quantity the mode scan tracks); its smallness triggers the
    eigenvalue-proximity rejection.
    """

    lam: complex
    u0: _PiecewiseSolution
    u1: _PiecewiseSolution
    connection: complex


class _Machinery:
    """Everything the two resolvent routes share for one (lam, split)."""

    def __init__(self, lam, split_hi=0.9, rtol=1e-12):
        lam = complex(lam)
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise ValueError("lam must be finite")
        if abs(lam.imag) > 20.0 or not -0.75 <= lam.real <= 0.75:
            raise ValueError("lam=%r outside the resolvent strip" % (lam,))
        if abs(lam) < _EXCLUSION:
            raise ValueError("lam=%r inside the exclusion disk around 0" % (lam,))
        if not 0.85 <= split_hi <= 0.99:
            raise ValueError("light-cone split %r outside [0.85, 0.99]" % (split_hi,))
        self.lam = lam
        self.split_lo = 0.1
        self.split_hi = split_hi

        self.ser_reg0 = regular_series_at_zero(lam, 0.12)
        self.ser_sing0 = _singular_series_at_zero(lam, 0.12)
        self.ser_a1 = analytic_series_at_one(lam, 0.12)
        self.ser_s1 = _singular_series_at_one(lam, 0.12)

        # u1 transported inward with the K accumulator
        # K(s) - K(0.9), K' = (1-s)^lam d/ds[s^4 u1 (1+s)^(lam-1)]
        u, du = self.ser_a1.eval(0.9)
        self.sol1 = self._solve(0.9, self.split_lo, (u, du, 0.0), self._rhs1, rtol)
        y = self.sol1(self.split_lo)
        A, B = self._match(self.ser_reg0, self.ser_sing0, self.split_lo, y[0], y[1])
        self.u1_AB = (A, B)

        # u0 transported outward with the U accumulator
        self.u0_useries = self._u0_antider_series()
        u, du = self.ser_reg0.eval(self.split_lo)
        u_init = npoly.polyval(self.split_lo, self.u0_useries)
        self.sol0 = self._solve(self.split_lo, split_hi, (u, du, u_init), self._rhs0, rtol)
        y = self.sol0(split_hi)
        a_raw, b_raw = self._match(self.ser_a1, self.ser_s1, split_hi, y[0], y[1])

        # raw connection quantity and the Wronskian normalization
        y0, y1 = self.sol0(0.5), self.sol1(0.5)
        w = (y0[0] * y1[1] - y0[1] * y1[0]) * 0.5**4 * 0.75**lam
        self.connection = complex(w)
        if abs(self.connection) < _EIG_GUARD:
            raise ValueError(
                "lam=%r too close to an eigenvalue: |connection|=%.3e below %g"
                % (lam, abs(self.connection), _EIG_GUARD)
            )
        self.nu = -2.0 * (1.0 - lam) / self.connection
        self.alpha = self.nu * a_raw
        self.beta = self.nu * b_raw

        self.u1 = _PiecewiseSolution((
            (0.0, self.split_lo, _combo_fn(self.ser_reg0, self.ser_sing0, A, B)),
            (self.split_lo, 0.9, lambda r: (self.sol1(r)[0], self.sol1(r)[1])),
            (0.9, 1.0, _series_fn(self.ser_a1)),
        ))
        self.u0 = _PiecewiseSolution((
            (0.0, self.split_lo, _series_fn(self.ser_reg0)),
            (self.split_lo, split_hi, lambda r: (self.sol0(r)[0], self.sol0(r)[1])),
            (split_hi, 1.0, _combo_fn_at_one(self.ser_a1, self.ser_s1, a_raw, b_raw)),
        ), scale=self.nu)

        # Taylor data for U1 via its own integrated-by-parts identity
        self.k_series = self._k_antider_series()
        self.dtilde = self._dtilde_series()
        self.k_at_lo = complex(npoly.polyval(self.split_lo, self.k_series))
        self.k_at_hi = self.k_at_lo - complex(self.sol1(self.split_lo)[2])
        # full weighted integral of the u1 derivative identity on [0, 1]
        self.C = self.k_at_hi + self._tailK(1.0 - 0.9)

    # -- construction helpers ------------------------------------------------

    def _rhs1(self, s, y):
        lam = self.lam
        ddu = _second_derivative_from_ode(lam, s, y[0], y[1])
        d = s**3 * (1.0 + s) ** (lam - 2.0) * (
            (4.0 + (lam + 3.0) * s) * y[0] + s * (1.0 + s) * y[1]
        )
        return [y[1], ddu, (1.0 - s) ** lam * d]

    def _rhs0(self, s, y):
        lam = self.lam
        ddu = _second_derivative_from_ode(lam, s, y[0], y[1])
        w = s**4 * (1.0 - s * s) ** (lam - 1.0) / (2.0 * (1.0 - lam))
        return [y[1], ddu, w * y[0]]

    @staticmethod
    def _solve(a, b, y0, rhs, rtol):
        sol = solve_ivp(
            rhs, (a, b), np.asarray(y0, complex),
            method="DOP853", rtol=rtol, atol=1e-14, dense_output=True,
        )
        if not sol.success:
            raise RuntimeError("fundamental-pair transport failed: %s" % sol.message)
        return sol.sol

    @staticmethod
    def _match(ser_p, ser_q, rho, u, du):
        up, dup = ser_p.eval(rho)
        uq, duq = ser_q.eval(rho)
        mat = np.array([[up, uq], [dup, duq]], complex)
        return tuple(np.linalg.solve(mat, np.array([u, du], complex)))

    def _u0_antider_series(self):
        # 1/(2(1-lam)) int_0^rho s^4 u_reg (1-s^2)^(lam-1) ds, unscaled
        lam = self.lam
        prod = _poly_mul(
            self.ser_reg0.coefficients,
            _binom_coeffs(lam - 1.0, _SERIES_LEN, sign=-1.0, stride=2),
            _SERIES_LEN,
        )
        return _poly_antider(prod, shift=4) / (2.0 * (1.0 - lam))

    def _k_antider_series(self):
        # int_0^rho (1-s)^lam d/ds[s^4 u1 (1+s)^(lam-1)] ds near 0
        lam = self.lam
        A, B = self.u1_AB
        s4u1 = np.zeros(_SERIES_LEN, complex)
        reg = self.ser_reg0.coefficients[: _SERIES_LEN - 4]
        s4u1[4:4 + len(reg)] += A * reg
        sing = self.ser_sing0.coefficients[: _SERIES_LEN - 1]
        s4u1[1:1 + len(sing)] += B * sing
        t1 = _poly_mul(s4u1, _binom_coeffs(lam - 1.0, _SERIES_LEN), _SERIES_LEN)
        t2 = npoly.polyder(t1)
        t3 = _poly_mul(t2, _binom_coeffs(lam, _SERIES_LEN, sign=-1.0), _SERIES_LEN)
        return _poly_antider(t3)

    def _dtilde_series(self):
        # Taylor in t = 1-rho of d/ds[s^4 u1 (1+s)^(lam-1)]
        lam = self.lam
        a1 = self.ser_a1.coefficients[: _SERIES_LEN - 4]
        quartic = np.array([1.0, -4.0, 6.0, -4.0, 1.0], complex)  # (1-t)^4
        g = _poly_mul(a1, quartic, _SERIES_LEN)
        half = 2.0 ** (lam - 1.0) * _binom_coeffs(lam - 1.0, _SERIES_LEN, sign=-0.5)
        g = _poly_mul(g, half, _SERIES_LEN)  # (2-t)^(lam-1) factor
        return -npoly.polyder(g)

    def _tailK(self, T):
        # int_0^T t^lam dtilde(t) dt, exact in the Taylor data
        lam = self.lam
        k = np.arange(len(self.dtilde))
        return complex(T ** (lam + 1.0) * np.sum(self.dtilde * T**k / (lam + 1.0 + k)))

    def _phi(self, t):
        # tailK(t) = t^(lam+1) phi(t) with phi analytic
        lam = self.lam
        k = np.arange(len(self.dtilde))
        return npoly.polyval(t, self.dtilde / (lam + 1.0 + k))

    # -- point evaluators used by the quadrature ------------------------------

    def K_cum(self, s):
        """int_0^s (1-sigma)^lam d/dsigma[sigma^4 u1 (1+sigma)^(lam-1)] dsigma."""
        s = np.atleast_1d(np.asarray(s, float))
        out = np.empty(s.shape, complex)
        lo = s <= self.split_lo
        mid = (s > self.split_lo) & (s <= 0.9)
        hi = s > 0.9
        if lo.any():
            out[lo] = npoly.polyval(s[lo], self.k_series)
        if mid.any():
            out[mid] = self.sol1(s[mid])[2] + self.k_at_hi
        if hi.any():
            out[hi] = np.array([self.C - self._tailK(1.0 - v) for v in s[hi]])
        return out

    def U1_at(self, s):
        lam = self.lam
        s = np.atleast_1d(np.asarray(s, float))
        u1 = self.u1.u(s)
        bnd = -u1 * s**4 * (1.0 - s) ** lam * (1.0 + s) ** (lam - 1.0)
        return (bnd + self.K_cum(s)) / (2.0 * lam * (1.0 - lam))

    def U0_unscaled_at(self, s):
        # valid up to split_hi; the zone continuation lives in the route
        s = np.atleast_1d(np.asarray(s, float))
        out = np.empty(s.shape, complex)
        lo = s <= self.split_lo
        if lo.any():
            out[lo] = npoly.polyval(s[lo], self.u0_useries)
        if (~lo).any():
            out[~lo] = self.sol0(s[~lo])[2]
        return out


def fundamental_pair(lam, settings: QuadratureSettings | None = None) -> FundamentalPair:
    """Build the Wronskian-normalized pair (u0, u1) for one lambda.

    Raises ValueError outside the strip, inside the exclusion disk
    around 0, or when |connection| signals an eigenvalue nearby.
    """
    mach = _Machinery(lam)
    return FundamentalPair(mach.lam, mach.u0, mach.u1, mach.connection)


# ---------------------------------------------------------------------------
# the two resolvent routes


def _route_setup(f: RadialField, lam, settings):
    if settings is None:
        settings = DEFAULT_SETTINGS
    grid = f.grid
    n = grid.n
    K = settings.resolve_zone(n)
    nodes = grid.nodes
    split_hi = float(nodes[n - 1 - K])
    mach = _Machinery(lam, split_hi=split_hi)
    return settings, grid, n, K, nodes, mach


def _maybe_real(values, f: RadialField, lam):
    if complex(lam).imag == 0.0 and not np.iscomplexobj(f.values):
        return values.real
    return values


def resolvent_direct(f: RadialField, lam, settings: QuadratureSettings | None = None) -> RadialField:
    """Variation-of-constants solution for Re lam in (0, 3/4].

    Output u satisfies the mode equation with source -f and is regular
    at both ends; an eigenvalue-proximity ValueError protects the
    Wronskian normalization.
    """
    lam = complex(lam)
    if not 0.0 < lam.real <= 0.75:
        raise ValueError("direct route needs Re lam in (0, 3/4], got %r" % (lam,))
    settings, grid, n, K, nodes, mach = _route_setup(f, lam, settings)
    zb = n - 1 - K
    delta = 1.0 - nodes[zb]
    two1l = 2.0 * (1.0 - lam)

    fa = lambda s: evaluate_at(f, s)
    w = lambda s: s**4 * (1.0 - s * s) ** (lam - 1.0)
    g1 = lambda s: w(s) * mach.u1.u(s) * fa(s)
    g2 = lambda s: w(s) * mach.u0.u(s) * fa(s)

    # cells [rho_j, rho_j+1], j = 0..n-3; the cell touching the light
    # cone goes through the endpoint-weight tail instead
    inc1 = _cell_increments(nodes[:-2], nodes[1:-1], g1, settings.gl_order)
    inc2 = _cell_increments(nodes[:-2], nodes[1:-1], g2, settings.gl_order)

    I2 = np.zeros(n, complex)
    I2[1:-1] = np.cumsum(inc2)

    # tails in t = 1 - s; u0 near the cone splits into its analytic and
    # vanishing-branch parts so each factor keeps a single weight
    H1 = lambda t: (1.0 - t) ** 4 * mach.u1.u(1.0 - t) * fa(1.0 - t) * (2.0 - t) ** (lam - 1.0)
    base = lambda t: (1.0 - t) ** 4 * fa(1.0 - t) * (2.0 - t) ** (lam - 1.0)
    H2w = lambda t: base(t) * mach.alpha * mach.ser_a1.eval(1.0 - t)[0]
    H2s = lambda t: base(t) * mach.beta * npoly.polyval(t, mach.ser_s1.coefficients)
    h_last = float(nodes[-1] - nodes[-2])
    I2[-1] = I2[-2] + _tail_power(H2w, h_last, lam - 1.0, settings) \
        + _tail_power(H2s, h_last, 0.0, settings)

    I1 = np.zeros(n, complex)
    for i in range(zb, n - 1):
        I1[i] = _tail_power(H1, 1.0 - nodes[i], lam - 1.0, settings)
    I1[:zb] = I1[zb] + np.cumsum(inc1[:zb][::-1])[::-1]

    out = np.empty(n, complex)
    u0v = mach.u0.u(nodes[:-1])
    u1v = mach.u1.u(nodes[1:-1])
    out[0] = -u0v[0] * I1[0] / two1l
    out[1:-1] = -(u0v[1:] * I1[1:-1] + u1v * I2[1:-1]) / two1l
    out[-1] = -mach.u1.u(1.0) * I2[-1] / two1l
    return RadialField(grid, _maybe_real(out, f, lam))


def resolvent_ibp(f: RadialField, lam, settings: QuadratureSettings | None = None) -> RadialField:
    """Integrated-by-parts resolvent for |Re lam| <= 3/4, lam not 0/eigen.

    Assembles u0 [b(f) + U1 f] + u0 int_rho^1 U1 f' - u1 U0 f
    + u1 int_0^rho U0 f' with f' the grid finite-difference derivative;
    the light-cone node, a removable 0*inf form for Re lam <= 0, is
    filled by one-sided quartic extrapolation.
    """
    lam = complex(lam)
    settings, grid, n, K, nodes, mach = _route_setup(f, lam, settings)
    zb = n - 1 - K
    delta = 1.0 - nodes[zb]
    lam1l = 2.0 * lam * (1.0 - lam)

    fv = f.values.astype(complex)
    fp = f.derivative()
    fa = lambda s: evaluate_at(f, s)
    fpa = lambda s: evaluate_at(fp, s)

    b = -fv[-1] * mach.C / lam1l

    # U1 at the grid nodes (the cone node is never used)
    U1v = np.zeros(n, complex)
    U1v[1:-1] = mach.U1_at(nodes[1:-1])

    # from-the-right cumulative of U1 f': zone nodes by endpoint tails,
    # body nodes by cells on top of the zone-boundary value
    Gw = lambda t: -mach.u1.u(1.0 - t) * (1.0 - t) ** 4 * (2.0 - t) ** (lam - 1.0) \
        * fpa(1.0 - t) / lam1l
    Hc = lambda t: -mach._phi(t) * fpa(1.0 - t) / lam1l
    T2 = np.zeros(n, complex)
    for i in range(zb, n - 1):
        t = 1.0 - nodes[i]
        T2[i] = (
            _tail_power(Gw, t, lam, settings)
            + mach.C / lam1l * (fv[-1] - fv[i])
            + _tail_power(Hc, t, lam + 1.0, settings)
        )
    g_t2 = lambda s: mach.U1_at(s) * fpa(s)
    inc_t2 = _cell_increments(nodes[:zb], nodes[1:zb + 1], g_t2, settings.gl_order)
    T2[:zb] = T2[zb] + np.cumsum(inc_t2[::-1])[::-1]

    # U0 at nodes: antiderivative series / dense accumulator up to the
    # zone boundary, then per-cell continuation across the zone
    U0v = np.zeros(n, complex)
    U0v[:zb + 1] = mach.nu * mach.U0_unscaled_at(nodes[:zb + 1])
    w0 = lambda s: s**4 * mach.u0.u(s) * (1.0 - s * s) ** (lam - 1.0) / (2.0 * (1.0 - lam))
    inc_z = _cell_increments(nodes[zb:-2], nodes[zb + 1:-1], w0, settings.gl_order)
    U0v[zb + 1:-1] = U0v[zb] + np.cumsum(inc_z)

    def U0_at(s):
        s = np.atleast_1d(np.asarray(s, float))
        out = np.empty(s.shape, complex)
        body = s <= nodes[zb]
        if body.any():
            out[body] = mach.nu * mach.U0_unscaled_at(s[body])
        zone = ~body
        if zone.any():
            idx = np.minimum((s[zone] * (n - 1)).astype(int), n - 2)
            vals = np.empty(idx.shape, complex)
            for j, (i_cell, sv) in enumerate(zip(idx, s[zone])):
                vals[j] = U0v[i_cell] + _segment_integral(
                    nodes[i_cell], sv, w0, settings.gl_order)
            out[zone] = vals
        return out

    g4 = lambda s: U0_at(s) * fpa(s)
    inc4 = _cell_increments(nodes[:-2], nodes[1:-1], g4, settings.gl_order)
    cum4 = np.zeros(n, complex)
    cum4[1:-1] = np.cumsum(inc4)

    out = np.empty(n, complex)
    u0v = mach.u0.u(nodes[:-1])
    u1v = mach.u1.u(nodes[1:-1])
    out[0] = u0v[0] * (b + T2[0])
    out[1:-1] = (
        u0v[1:] * (b + U1v[1:-1] * fv[1:-1] + T2[1:-1])
        - u1v * U0v[1:-1] * fv[1:-1]
        + u1v * cum4[1:-1]
    )
    wx = fd_weights(nodes[-6:-1], 1.0, 0)
    out[-1] = wx @ out[-6:-1]
    return RadialField(grid, _maybe_real(out, f, lam))


# ---------------------------------------------------------------------------
# the lam = 1 potential-free solve and the system plumbing


def _psi0(rho):
    # (arctanh rho - rho)/rho^3, series-stable at the origin
    rho = np.asarray(rho, float)
    out = np.empty(rho.shape)
    small = rho < 0.1
    if small.any():
        r2 = rho[small] ** 2
        acc = np.zeros_like(r2)
        for k in range(12, -1, -1):
            acc = acc * r2 + 1.0 / (2.0 * k + 3.0)
        out[small] = acc
    big = ~small
    if big.any():
        r = rho[big]
        out[big] = (np.arctanh(r) - r) / r**3
    return out


def _arctanh_weight(s):
    # s arctanh(s) - s^2 without cancellation for small s
    s = np.asarray(s, float)
    out = np.empty(s.shape)
    small = s < 0.5
    if small.any():
        x = s[small] ** 2
        acc = np.zeros_like(x)
        for k in range(20, 0, -1):
            acc = acc * x + 1.0 / (2.0 * k + 1.0)
        out[small] = x * x * acc
    big = ~small
    if big.any():
        out[big] = s[big] * np.arctanh(s[big]) - s[big] ** 2
    return out


def lambda1_free_solve(f1: RadialField, f2: RadialField,
                       settings: QuadratureSettings | None = None) -> RadialField:
    """Solve the reduced lam = 1 equation without the potential term:
    (rho^2-1) u'' + (6 rho - 4/rho) u' + 6 u = F, F = f2 + 3 f1 + rho f1'.

    Returns the first component; it is even, finite at the origin, and
    continuous up to the light cone where the forcing enters through a
    logarithmic endpoint integral.
    """
    if settings is None:
        settings = DEFAULT_SETTINGS
    if f1.grid != f2.grid:
        raise ValueError("sources must share one grid")
    grid = f1.grid
    n = grid.n
    nodes = grid.nodes
    F = RadialField(grid, f2.values + 3.0 * f1.values + nodes * f1.derivative().values)
    Fa = lambda s: evaluate_at(F, s)

    # A(rho) = int_rho^1 s F ds, smooth everywhere
    gA = lambda s: s * Fa(s)
    incA = _cell_increments(nodes[:-1], nodes[1:], gA, settings.gl_order).real
    A = np.zeros(n)
    A[:-1] = np.cumsum(incA[::-1])[::-1]

    # B(rho) = int_0^rho (s arctanh s - s^2) F ds; the last cell carries
    # the ln(1-s) part of arctanh explicitly
    gB = lambda s: _arctanh_weight(s) * Fa(s)
    incB = _cell_increments(nodes[:-2], nodes[1:-1], gB, settings.gl_order).real
    B = np.zeros(n)
    B[1:-1] = np.cumsum(incB)
    h_last = float(nodes[-1] - nodes[-2])
    S = lambda t: (1.0 - t) * Fa(1.0 - t) * 0.5 * np.log(2.0 - t) \
        - (1.0 - t) ** 2 * Fa(1.0 - t)
    L = lambda t: -0.5 * (1.0 - t) * Fa(1.0 - t)
    B[-1] = B[-2] + float(np.real(_tail_power(S, h_last, 0.0, settings))) \
        + _tail_log(L, h_last, settings)

    out = np.empty(n)
    out[0] = A[0] / 3.0
    rho_in = nodes[1:-1]
    out[1:-1] = _psi0(rho_in) * A[1:-1] + B[1:-1] / rho_in**3
    out[-1] = B[-1]
    return RadialField(grid, out)


def second_component(u1: RadialField, f1, lam) -> RadialField:
    """Recover the second state component: u2 = (1+lam) u1 + rho u1' - f1."""
    lam = complex(lam)
    if lam.imag == 0.0:
        lam = lam.real
    vals = (1.0 + lam) * u1.values + u1.grid.nodes * u1.derivative().values
    if f1 is not None:
        if f1.grid != u1.grid:
            raise ValueError("components must share one grid")
        vals = vals - f1.values
    return RadialField(u1.grid, vals)


def reduced_source(f1: RadialField, f2: RadialField, lam) -> RadialField:
    """Scalar source of the reduced mode equation: f2 + (2+lam) f1 + rho f1'."""
    if f1.grid != f2.grid:
        raise ValueError("sources must share one grid")
    lam = complex(lam)
    if lam.imag == 0.0:
        lam = lam.real
    vals = f2.values + (2.0 + lam) * f1.values + f1.grid.nodes * f1.derivative().values
    return RadialField(f1.grid, vals)

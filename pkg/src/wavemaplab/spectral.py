"""Mode analysis for the linearized similarity-variable evolution.

The time-periodic ansatz u(tau, rho) = e^(lam tau) u(rho) reduces the
linearized system to a single second-order radial equation,

    (rho^2 - 1) u'' + (2(lam+2) rho - 4/rho) u'
        + (lam+2)(lam+1) u - 16/(1+rho^2)^2 u = 0,

with regular singular points at rho = 0 (indices {0, -3}) and at the
light cone rho = 1 (indices {0, 1-lam}); the only other finite
singularities sit at rho = +-i, so both Frobenius expansions have
radius 1.  lam is a mode frequency exactly when the solution regular at
the origin is proportional to the branch analytic at rho = 1.  The
connection quantity E(lam) measures that alignment: it is the Wronskian
of the two shooting solutions rescaled by rho^4 (1-rho^2)^lam, which
the equation makes rho-independent, so E is a holomorphic function of
lam whose zeros are the modes.  Zeros inside a rectangle are counted by
the argument principle with adaptive phase tracking and refined by a
complex secant iteration.

Everything here is scalar machinery: series construction, complex ODE
transport, the E evaluation, and the rectangle scanner.  The
inhomogeneous (Green's function) solvers built on the same solution
pair live in the resolvent module.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp

__all__ = [
    "SolutionPair",
    "SeriesSolution",
    "ConnectionEvaluation",
    "ZeroHit",
    "ScanReport",
    "DEFAULT_EXCLUSIONS",
    "STRIP",
    "ode_rhs",
    "regular_series_at_zero",
    "regular_solution_at_zero",
    "analytic_series_at_one",
    "analytic_solution_at_one",
    "integrate_ode",
    "connection_E",
    "winding_number",
    "scan_rectangle",
]

# Scanned strip and the disk around lam = 0, where the indicial root
# 1 - lam collides with the integer 1 and the analytic-at-one branch
# degenerates.
STRIP = (-0.75, 0.75)
DEFAULT_EXCLUSIONS = ((0j, 0.05),)

_SWITCH_ZERO = 0.1
_SWITCH_ONE = 0.9
_MATCH = 0.5
_DRIFT_PROBES = (0.3, 0.4, 0.5, 0.6, 0.7)
_RESONANCE_RADIUS = 0.04


@dataclass(frozen=True)
class SolutionPair:
    """Value and rho-derivative of a scalar mode solution at one radius."""

    rho: float
    u: complex
    du: complex

    def __post_init__(self):
        vals = (self.u.real, self.u.imag, self.du.real, self.du.imag)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite solution data at rho=%r" % (self.rho,))


@dataclass(frozen=True)
class SeriesSolution:
    """Frobenius expansion sum_k a_k x^(k+sigma) about x = rho - center.

    center 0 uses x = rho, center 1 uses x = 1 - rho (so du/drho flips
    sign).  coefficients are truncated per the builder's contract: the
    last retained term is below 1e-16 times the running maximum of the
    partial sums at radius_used.
    """

    center: int
    lam: complex
    sigma: complex
    coefficients: np.ndarray
    radius_used: float

    def eval(self, rho):
        """Return (u, du/drho) at rho; vectorized over arrays.

        The sigma != 0 branch requires rho strictly inside the disk
        punctured at the center (x > 0).
        """
        rho = np.asarray(rho)
        if self.center == 0:
            x, sign = rho, 1.0
        else:
            x, sign = 1.0 - rho, -1.0
        a = self.coefficients
        v = npoly.polyval(x, a)
        dv = npoly.polyval(x, npoly.polyder(a))
        if self.sigma == 0:
            return v, sign * dv
        xs = x ** self.sigma
        u = xs * v
        du = sign * (self.sigma * xs / x * v + xs * dv)
        return u, du

    def pair_at(self, rho: float) -> SolutionPair:
        u, du = self.eval(rho)
        return SolutionPair(rho, complex(u), complex(du))


@dataclass(frozen=True)
class ConnectionEvaluation:
    lam: complex
    E: complex
    wronskian_drift: float
    accepted: bool


@dataclass(frozen=True)
class ZeroHit:
    lam: complex
    abs_E: float
    iterations: int


@dataclass(frozen=True)
class ScanReport:
    corners: tuple  # (lower-left, upper-right) complex
    exclusions: tuple  # ((center, radius), ...)
    winding: int
    zeros: tuple = field(default_factory=tuple)


def _coeff_arrays(lam):
    # equation multiplied by rho (1+rho^2)^2: Pc u'' + Qc u' + Rc u = 0
    Pc = np.zeros(8, complex)
    Pc[[1, 3, 5, 7]] = [-1.0, -1.0, 1.0, 1.0]
    Qc = np.zeros(7, complex)
    Qc[0] = -4.0
    Qc[2] = 2.0 * lam - 4.0
    Qc[4] = 4.0 * lam + 4.0
    Qc[6] = 2.0 * lam + 4.0
    m = (lam + 1.0) * (lam + 2.0)
    Rc = np.zeros(6, complex)
    Rc[1] = m - 16.0
    Rc[3] = 2.0 * m
    Rc[5] = m
    return Pc, Qc, Rc


def _shift_to_one(c):
    # coefficients of p(1 - x) given those of p(rho)
    out = np.zeros(1, complex)
    for ck in c[::-1]:
        out = npoly.polymul(out, [1.0, -1.0])
        out = npoly.polyadd(out, [ck])
    out2 = np.zeros(len(c), complex)
    out2[: len(out)] = out
    return out2


def _coeff_arrays_at_one(lam):
    Pc, Qc, Rc = _coeff_arrays(lam)
    # x = 1 - rho swaps the sign of the first-derivative term only
    return _shift_to_one(Pc), -_shift_to_one(Qc), _shift_to_one(Rc)


def _frobenius_coefficients(Pc, Qc, Rc, sigma, radius, a0=1.0, max_terms=600):
    """Run the series recurrence until the truncation contract holds.

    Coefficient of x^(M+sigma) in Pc u'' + Qc u' + Rc u couples a_k for
    k up to M+1; since Pc[0] = 0 the leading entry a_{M+1} carries the
    divisor (M+1+sigma)(Pc[1] (M+sigma) + Qc[0]).  Terms are generated
    until |a_k| radius^k drops below 1e-16 times the running maximum of
    the partial sums at that radius (two consecutive hits), which is
    what SeriesSolution promises downstream.
    """
    coeffs = [complex(a0)]
    partial = complex(a0)
    max_partial = abs(partial)
    quiet = 0
    for M in range(max_terms - 1):
        acc = 0j
        for p in range(8):
            k = M + 2 - p
            if 0 <= k <= M and Pc[p] != 0:
                acc += Pc[p] * (k + sigma) * (k + sigma - 1.0) * coeffs[k]
        for q in range(7):
            k = M + 1 - q
            if 0 <= k <= M and Qc[q] != 0:
                acc += Qc[q] * (k + sigma) * coeffs[k]
        for r in range(6):
            k = M - r
            if 0 <= k <= M and Rc[r] != 0:
                acc += Rc[r] * coeffs[k]
        divisor = (M + 1 + sigma) * (Pc[1] * (M + sigma) + Qc[0])
        if divisor == 0:
            # at an indicial-root collision the term is undetermined; it
            # stays a free constant exactly when the accumulated right
            # side vanishes, else the branch needs a logarithm
            if abs(acc) <= 1e-12 * (max_partial + 1.0):
                coeffs.append(0j)
                continue
            raise ValueError(
                "indicial resonance: recurrence divisor vanishes at term %d" % (M + 1)
            )
        nxt = -acc / divisor
        coeffs.append(nxt)
        term = abs(nxt) * radius ** (M + 1)
        partial += nxt * radius ** (M + 1)
        max_partial = max(max_partial, abs(partial))
        if term > 1e8 * (max_partial + 1.0):
            raise RuntimeError("series divergence at radius %g" % radius)
        if term < 1e-16 * max_partial:
            quiet += 1
            if quiet >= 2:
                return np.asarray(coeffs)
        else:
            quiet = 0
    raise RuntimeError("series did not meet truncation target in %d terms" % max_terms)


def _second_derivative_from_ode(lam, rho, u, du):
    V = 16.0 / (1.0 + rho * rho) ** 2
    return -((2.0 * (lam + 2.0) * rho - 4.0 / rho) * du
             + ((lam + 2.0) * (lam + 1.0) - V) * u) / (rho * rho - 1.0)


def ode_rhs(lam, rho, pair):
    """First-order form of the mode equation: (u, u') -> (u', u'').

    pair may be a SolutionPair or any (u, du) sequence.  The
    coefficients are singular at rho = 0 and rho = 1, so endpoint
    evaluation is rejected.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("mode equation coefficients are singular at rho=%r" % (rho,))
    if isinstance(pair, SolutionPair):
        u, du = pair.u, pair.du
    else:
        u, du = pair
    return du, _second_derivative_from_ode(lam, rho, u, du)


def regular_series_at_zero(lam, radius=_SWITCH_ZERO) -> SeriesSolution:
    """Index-0 expansion at the origin, normalized u(0) = 1.

    The recurrence forces a_1 = 0 and with it every odd coefficient, so
    the solution is even; no resonance occurs at center 0 for any lam.
    """
    Pc, Qc, Rc = _coeff_arrays(lam)
    a = _frobenius_coefficients(Pc, Qc, Rc, 0.0, radius)
    return SeriesSolution(0, complex(lam), 0.0, a, float(radius))


def regular_solution_at_zero(lam, rho_switch=_SWITCH_ZERO) -> SolutionPair:
    if not 0.0 < rho_switch <= 0.2:
        raise ValueError("switch radius %r outside (0, 0.2]" % (rho_switch,))
    return regular_series_at_zero(lam, rho_switch).pair_at(rho_switch)


def _singular_series_at_zero(lam, radius=_SWITCH_ZERO) -> SeriesSolution:
    # index -3 branch at the origin, rho^-3 (1 + c2 rho^2 + ...).  The
    # indicial roots differ by the integer 3, but the collision lands on
    # an odd coefficient whose chain is identically zero, so the branch
    # is log-free for every lam.
    Pc, Qc, Rc = _coeff_arrays(lam)
    a = _frobenius_coefficients(Pc, Qc, Rc, -3.0, radius)
    return SeriesSolution(0, complex(lam), -3.0, a, float(radius))


def _guard_resonance_at_one(lam):
    lam = complex(lam)
    # sigma = 0 recurrence divisor vanishes when lam is a nonpositive
    # integer (the indicial roots 0 and 1-lam then differ by an integer
    # realized by the recurrence).  lam = 1 is a double root but the
    # analytic branch itself is untouched.
    k = max(0, int(round(-lam.real)))
    for kk in {0, k, k + 1}:
        if abs(lam + kk) < _RESONANCE_RADIUS:
            raise ValueError(
                "lam=%r within %g of the indicial resonance at %d"
                % (lam, _RESONANCE_RADIUS, -kk)
            )


def analytic_series_at_one(lam, radius=1.0 - _SWITCH_ONE) -> SeriesSolution:
    """Expansion of the branch analytic at the light cone, u(1) = 1."""
    _guard_resonance_at_one(lam)
    P1, Q1, R1 = _coeff_arrays_at_one(lam)
    a = _frobenius_coefficients(P1, Q1, R1, 0.0, radius)
    return SeriesSolution(1, complex(lam), 0.0, a, float(radius))


def analytic_solution_at_one(lam, rho_switch=_SWITCH_ONE) -> SolutionPair:
    if not 0.8 <= rho_switch < 1.0:
        raise ValueError("switch radius %r outside [0.8, 1)" % (rho_switch,))
    return analytic_series_at_one(lam, 1.0 - rho_switch).pair_at(rho_switch)


def _singular_series_at_one(lam, radius=1.0 - _SWITCH_ONE) -> SeriesSolution:
    # companion branch (1-rho)^(1-lam) (1 + ...); its recurrence divisor
    # vanishes for lam in {2, 3, ...} and the branch collapses onto the
    # analytic one at the double root lam = 1
    lam = complex(lam)
    if abs(lam - 1.0) < _RESONANCE_RADIUS:
        raise ValueError("indicial roots at rho=1 collide near lam=1")
    k = max(2, int(round(lam.real)))
    for kk in {k, k + 1}:
        if kk >= 2 and abs(lam - kk) < _RESONANCE_RADIUS:
            raise ValueError("singular-branch resonance near lam=%d" % kk)
    sigma = 1.0 - lam
    P1, Q1, R1 = _coeff_arrays_at_one(lam)
    a = _frobenius_coefficients(P1, Q1, R1, sigma, radius)
    return SeriesSolution(1, lam, sigma, a, float(radius))


def _ivp_rhs(rho, y, lam):
    return [y[1], _second_derivative_from_ode(lam, rho, y[0], y[1])]


def _integrate(lam, start: SolutionPair, rho_end, rtol=1e-12, dense=False):
    y0 = np.array([start.u, start.du], dtype=complex)
    sol = solve_ivp(
        _ivp_rhs,
        (start.rho, float(rho_end)),
        y0,
        args=(complex(lam),),
        method="DOP853",
        rtol=rtol,
        atol=1e-14,
        dense_output=dense,
    )
    if not sol.success:
        raise RuntimeError("ODE transport failed: %s" % sol.message)
    pair = SolutionPair(float(rho_end), complex(sol.y[0, -1]), complex(sol.y[1, -1]))
    return (pair, sol.sol) if dense else pair


def integrate_ode(lam, start: SolutionPair, rho_end, rtol=1e-12, dense=False):
    """Transport (u, u') along the real axis with DOP853.

    Both endpoints (hence the whole path) must lie in [0.05, 0.95],
    keeping the adaptive stepper away from the singular coefficients.
    """
    lo, hi = sorted((start.rho, float(rho_end)))
    if lo < 0.05 or hi > 0.95:
        raise ValueError("transport path [%g, %g] leaves [0.05, 0.95]" % (lo, hi))
    return _integrate(lam, start, rho_end, rtol=rtol, dense=dense)


def connection_E(lam, switch_zero=_SWITCH_ZERO, switch_one=_SWITCH_ONE,
                 match=_MATCH, rtol=1e-12) -> ConnectionEvaluation:
    """Normalized Wronskian of the two shooting solutions.

    E(lam) = W(u0, u1)(1/2) (1/2)^4 (3/4)^lam with u0 the unit regular
    solution at 0 and u1 the unit analytic solution at 1, both
    transported to the matching point.  W rho^4 (1-rho^2)^lam is a
    first integral of the equation, so its spread over the probe radii
    {0.3,...,0.7} (reported as wronskian_drift) measures transport
    error; an evaluation is accepted when the drift is below 1e-6.
    """
    lam = complex(lam)
    if not switch_zero < match < switch_one:
        raise ValueError("matching point must sit between the switch radii")
    p0 = regular_solution_at_zero(lam, switch_zero)
    p1 = analytic_solution_at_one(lam, switch_one)
    _, s0 = _integrate(lam, p0, switch_one, rtol=rtol, dense=True)
    _, s1 = _integrate(lam, p1, switch_zero, rtol=rtol, dense=True)

    def normalized_w(rho):
        a0, b0 = s0(rho)
        a1, b1 = s1(rho)
        return (a0 * b1 - b0 * a1) * rho ** 4 * (1.0 - rho * rho) ** lam

    E = normalized_w(match)
    drift = max(abs(normalized_w(r) - E) for r in _DRIFT_PROBES)
    return ConnectionEvaluation(lam, E, float(drift), bool(drift < 1e-6))


def _E_point(args):
    re, im = args
    return connection_E(complex(re, im)).E


def _eval_E_many(points, jobs=1, cache=None):
    cache = {} if cache is None else cache
    todo = [z for z in points if z not in cache]
    if todo:
        if jobs and jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                vals = list(pool.map(_E_point, [(z.real, z.imag) for z in todo],
                                     chunksize=1))
        else:
            vals = [_E_point((z.real, z.imag)) for z in todo]
        cache.update(zip(todo, vals))
    return cache


def _outside_exclusions(z, exclusions):
    return all(abs(z - complex(c)) > r for c, r in exclusions)


def winding_number(vertices, exclusions=(), grid_density=8.0, jobs=1, cache=None,
                   max_inserts=100000):
    """Argument-principle winding of E along a closed polyline.

    The phase increment between consecutive samples is forced below
    pi/2 by midpoint insertion; the winding is the (deterministically
    ordered) sum of increments over 2 pi, which must land on an
    integer.  vertices is traversed in order and closed automatically.
    """
    pts = [complex(z) for z in vertices]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    samples = []
    for za, zb in zip(pts[:-1], pts[1:]):
        n = max(1, int(math.ceil(abs(zb - za) * grid_density)))
        samples.extend(za + (zb - za) * k / n for k in range(n))
    samples.append(pts[0])
    for z in samples:
        if not _outside_exclusions(z, exclusions):
            raise ValueError("contour sample %r inside an exclusion disk" % (z,))
    cache = _eval_E_many(samples, jobs=jobs, cache=cache)

    total = 0.0
    inserts = 0
    stack = [(samples[k], samples[k + 1]) for k in range(len(samples) - 2, -1, -1)]
    while stack:
        za, zb = stack.pop()
        Ea, Eb = cache[za], cache[zb]
        if Ea == 0 or Eb == 0:
            raise RuntimeError("E vanishes on the contour at %r" % (za if Ea == 0 else zb,))
        step = cmath.phase(Eb / Ea)
        if abs(step) < 0.5 * math.pi:
            total += step
            continue
        inserts += 1
        if inserts > max_inserts or abs(zb - za) < 1e-13:
            raise RuntimeError("phase tracking failed between %r and %r" % (za, zb))
        zm = 0.5 * (za + zb)
        cache = _eval_E_many([zm], jobs=1, cache=cache)
        stack.append((zm, zb))
        stack.append((za, zm))
    w = total / (2.0 * math.pi)
    wi = int(round(w))
    if abs(w - wi) > 1e-3:
        raise RuntimeError("winding sum %r not an integer" % (w,))
    return wi


def _refine_zero(z0, tol=1e-10, max_iter=80):
    # complex secant iteration on E
    z1 = z0 + 1e-3 * (1.0 + 1.0j)
    E0 = connection_E(z0).E
    E1 = connection_E(z1).E
    for it in range(1, max_iter + 1):
        if abs(E1) < tol:
            return ZeroHit(z1, abs(E1), it)
        denom = E1 - E0
        if denom == 0:
            break
        z2 = z1 - E1 * (z1 - z0) / denom
        z0, E0, z1 = z1, E1, z2
        E1 = connection_E(z1).E
    raise RuntimeError("secant refinement stalled near %r (|E|=%g)" % (z1, abs(E1)))


def _rect_vertices(lo, hi):
    return [lo, complex(hi.real, lo.imag), hi, complex(lo.real, hi.imag), lo]


def _disk_circle(center, radius, n=48):
    return [center + radius * cmath.exp(2j * math.pi * k / n) for k in range(n)]


def _in_box(z, lo, hi):
    return lo.real < z.real < hi.real and lo.imag < z.imag < hi.imag


def scan_rectangle(corners, exclusions=DEFAULT_EXCLUSIONS, grid_density=8.0,
                   jobs=1, refine_tol=1e-10, enforce_strip=True) -> ScanReport:
    """Count and refine zeros of E inside a rectangle minus exclusion disks.

    corners = (lower-left, upper-right) as complex numbers.  E has a
    simple pole at lam = 0 (the indicial roots at rho = 1 collide and
    the unit normalization of the analytic branch blows up like 1/lam),
    so each exclusion disk contained in the rectangle contributes its
    own circle winding, which is subtracted: the reported winding
    counts zeros in the rectangle with the disks removed.  Nonzero
    counts are localized by quadrisection on the winding and polished
    by a secant iteration to |E| < refine_tol.  Rectangles are
    restricted to Re lam in [-0.74, 0.74], |Im lam| <= 20 unless
    enforce_strip is False (used to probe the known mode at lam = 1).
    """
    lo, hi = complex(corners[0]), complex(corners[1])
    if not (lo.real < hi.real and lo.imag < hi.imag):
        raise ValueError("corners must be (lower-left, upper-right) with area")
    if enforce_strip:
        if lo.real < -0.74 or hi.real > 0.74 or abs(lo.imag) > 20 or abs(hi.imag) > 20:
            raise ValueError("rectangle leaves the scanned strip")
    exclusions = tuple((complex(c), float(r)) for c, r in exclusions)
    cache = {}
    w_rect = winding_number(_rect_vertices(lo, hi), exclusions, grid_density,
                            jobs, cache)
    # winding contribution of each excluded disk (circle slightly outside
    # the disk so E is evaluable on it)
    disk_w = {}
    for c, r in exclusions:
        if _in_box(c, lo, hi):
            circ = 1.2 * r
            if not _in_box(c - circ - 1j * circ, lo, hi) or \
               not _in_box(c + circ + 1j * circ, lo, hi):
                raise ValueError("exclusion disk at %r too close to the contour" % (c,))
            disk_w[c] = winding_number(_disk_circle(c, circ), exclusions,
                                       max(grid_density, 24.0 / circ), jobs=1,
                                       cache=cache)
    w = w_rect - sum(disk_w.values())
    zeros = []
    if w != 0:
        boxes = [(lo, hi, w, tuple(disk_w))]
        while boxes:
            blo, bhi, bw, bdisks = boxes.pop()
            if bw == 0:
                continue
            diam = abs(bhi - blo)
            if diam < 0.02:
                if bdisks:
                    raise RuntimeError(
                        "zero of E too close to exclusion disk near %r" % (blo,))
                hit = _refine_zero(0.5 * (blo + bhi), tol=refine_tol)
                zeros.extend([hit] * bw)
                continue
            # split fractions are retried: a cut through a zero of E
            # makes phase tracking fail, and a cut through an exclusion
            # disk would split its subtracted winding
            for frac in (0.5, 0.537, 0.4229, 0.6113):
                mid = complex(blo.real + frac * (bhi.real - blo.real),
                              blo.imag + frac * (bhi.imag - blo.imag))
                quads = [
                    (blo, mid),
                    (complex(mid.real, blo.imag), complex(bhi.real, mid.imag)),
                    (complex(blo.real, mid.imag), complex(mid.real, bhi.imag)),
                    (mid, bhi),
                ]
                quad_disks = []
                ok = True
                for qlo, qhi in quads:
                    inside = tuple(c for c in bdisks if _in_box(c, qlo, qhi))
                    pad = max(1.2 * r for cc, r in exclusions) if bdisks else 0.0
                    for c in inside:
                        if not (_in_box(c - pad - 1j * pad, qlo, qhi)
                                and _in_box(c + pad + 1j * pad, qlo, qhi)):
                            ok = False
                    quad_disks.append(inside)
                if not ok or sum(len(q) for q in quad_disks) != len(bdisks):
                    continue
                try:
                    quad_w = [
                        winding_number(_rect_vertices(qlo, qhi), exclusions,
                                       max(grid_density, 4.0 / abs(qhi - qlo)),
                                       jobs=1, cache=cache)
                        - sum(disk_w[c] for c in qd)
                        for (qlo, qhi), qd in zip(quads, quad_disks)
                    ]
                except RuntimeError:
                    continue
                if sum(quad_w) == bw:
                    break
            else:
                raise RuntimeError(
                    "quadrisection could not separate zeros inside box %r" % ((blo, bhi),)
                )
            for (qlo, qhi), qw, qd in zip(quads, quad_w, quad_disks):
                if qw != 0:
                    boxes.append((qlo, qhi, qw, qd))
    return ScanReport((lo, hi), exclusions, w, tuple(zeros))

"""Closed-form reference objects for the corotational blowup analysis.

Everything here is an exact formula: the self-similar blowup solution and its
similarity-variable profile, the symmetry mode of the linearized flow and its
reduction-of-order partner, fundamental systems of the free ODEs that bracket
the spectral analysis, the linearization potentials, and the quadratic-and-up
remainder of the sine nonlinearity.  The rest of the package validates its
numerics against these functions, so implementations favor accuracy near the
removable 0/0 points over brevity: each such formula carries an even
power-series fallback below a fixed cancellation cut.
"""

import numpy as np

# series branches kick in when the relevant small argument drops below this;
# each truncation keeps the next term under 1e-16 of the running sum
_SERIES_CUT = 1e-2


def _atanh(rho):
    # 0.5*(log1p(x) - log1p(-x)) keeps full precision as rho -> 1
    rho = np.asarray(rho, dtype=float)
    return 0.5 * (np.log1p(rho) - np.log1p(-rho))


def _arctan_over_x(x):
    """arctan(x)/x, extended through x = 0 by its even Taylor series."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = 1.0 - x2 / 3.0 + x2 * x2 / 5.0 - x2 * x2 * x2 / 7.0
    small = np.abs(x) < _SERIES_CUT
    safe = np.where(small, 1.0, x)
    return np.where(small, series, np.arctan(safe) / safe)


def u_star(T, t, r):
    """Self-similar blowup solution (2/r) arctan(r/(T-t)).

    The r = 0 value is the limit 2/(T-t).  Scalars or arrays broadcast in the
    usual numpy way; t >= T and r < 0 are rejected.
    """
    T = float(T)
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t >= T):
        raise ValueError("u_star needs t < T")
    if np.any(r < 0.0):
        raise ValueError("u_star needs r >= 0")
    c = T - t
    out = (2.0 / c) * _arctan_over_x(r / c)
    return out[()]


def corotational_embed(u, r, direction):
    """Embed the radial value u(t,r) as a point on the unit three-sphere.

    direction is the unit 3-vector x/|x|; the image is
    (sin(r*u)*direction, cos(r*u)), which collapses to the north pole at r=0.
    """
    direction = np.asarray(direction, dtype=float)
    angle = float(r) * float(u)
    out = np.empty(4)
    out[:3] = np.sin(angle) * direction
    out[3] = np.cos(angle)
    return out


def psi_star(rho):
    """Static profile in similarity variables: (2 arctan(rho)/rho, 2/(1+rho^2)).

    Returns the pair (psi1, psi2); both components tend to 2 at rho = 0 and
    satisfy psi2 = psi1 + rho*psi1' identically.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or np.any(rho > 1.0):
        raise ValueError("psi_star is defined on rho in [0, 1]")
    psi1 = 2.0 * _arctan_over_x(rho)
    psi2 = 2.0 / (1.0 + rho * rho)
    return psi1[()], psi2[()]


def eigenfunction_g(rho):
    """Symmetry mode of the linearized similarity flow, eigenvalue 1.

    g(rho) = (1/(1+rho^2), 2/(1+rho^2)^2); this is the direction the blowup
    time parameter moves the initial data in, so the tuning step targets it.
    """
    rho = np.asarray(rho, dtype=float)
    w = 1.0 / (1.0 + rho * rho)
    return w[()], (2.0 * w * w)[()]


def gtilde1(rho):
    """Reduction-of-order partner of g1 in the eigenvalue-1 spectral ODE.

    gtilde1 = (12 rho^3 arctanh(rho) - 9 rho^2 - 1) / (rho^3 (rho^2+1)),
    singular like -rho^-3 at 0 and logarithmically at 1, hence the open
    domain (0, 1).
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0) or np.any(rho >= 1.0):
        raise ValueError("gtilde1 is singular at rho = 0 and rho = 1")
    r2 = rho * rho
    num = 12.0 * rho * r2 * _atanh(rho) - 9.0 * r2 - 1.0
    return (num / (rho * r2 * (r2 + 1.0)))[()]


def free_psi0_psi1(rho):
    """Fundamental pair of the eigenvalue-1 equation with the potential off.

    psi0 = (arctanh(rho) - rho)/rho^3 (regular, -> 1/3 at 0, series branch
    below the cancellation cut), psi1 = rho^-3.  Their Wronskian satisfies
    W(psi0, psi1) * rho^4 (1 - rho^2) = -1.
    """
    rho = np.asarray(rho, dtype=float)
    r2 = rho * rho
    # (arctanh(rho) - rho)/rho^3 = sum_k rho^(2k)/(2k+3)
    series = 1.0 / 3.0 + r2 * (1.0 / 5.0 + r2 * (1.0 / 7.0 + r2 * (1.0 / 9.0 + r2 / 11.0)))
    small = rho < _SERIES_CUT
    safe = np.where(small, 0.5, rho)
    with np.errstate(divide="ignore"):
        psi0 = np.where(small, series, (_atanh(safe) - safe) / safe**3)
        psi1 = rho**-3.0
    return psi0[()], psi1[()]


def bessel_b(j, rho, lam):
    """Spherical-Bessel-type fundamental pair in the arctanh variable.

    With a = i(1-lam) and phi = arctanh(rho),
        b1 = sqrt(1-rho^2) (cos(a phi) - sin(a phi)/(a phi))
        b2 = sqrt(1-rho^2) (sin(a phi) + cos(a phi)/(a phi))
    so that W(b1, b2) = i(1-lam).  b1 vanishes at rho = 0 (series branch);
    lam = 1 degenerates (a = 0) and is rejected.
    """
    lam = complex(lam)
    if lam == 1.0:
        raise ValueError("bessel pair degenerates at lam = 1")
    rho = np.asarray(rho, dtype=float)
    x = 1j * (1.0 - lam) * _atanh(rho)
    pre = np.sqrt(1.0 - rho * rho)
    if j == 1:
        # cos(x) - sin(x)/x = sum_{k>=1} (-1)^k x^(2k) 2k/(2k+1)!
        x2 = x * x
        series = x2 * (-1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 / 45360.0)))
        small = np.abs(x) < _SERIES_CUT
        safe = np.where(small, 1.0, x)
        val = np.where(small, series, np.cos(safe) - np.sin(safe) / safe)
    elif j == 2:
        val = np.sin(x) + np.cos(x) / x
    else:
        raise ValueError("j must be 1 or 2")
    return (pre * val)[()]


def free_w(j, rho, lam):
    """Pure-power fundamental pair of w'' + (2 lam - lam^2)/(1-rho^2)^2 w = 0.

    w_{1,2} = sqrt(1-rho^2) ((1 -/+ rho)/(1 +/- rho))^((1-lam)/2), evaluated
    as exp(-/+ (1-lam) arctanh(rho)) to stay accurate near rho = 1.
    W(w1, w2) = 2(1-lam).
    """
    lam = complex(lam)
    rho = np.asarray(rho, dtype=float)
    phi = _atanh(rho)
    pre = np.sqrt(1.0 - rho * rho)
    if j == 1:
        val = np.exp(-(1.0 - lam) * phi)
    elif j == 2:
        val = np.exp((1.0 - lam) * phi)
    else:
        raise ValueError("j must be 1 or 2")
    return (pre * val)[()]


def potential_V(rho):
    """Linearization potential -16/(1+rho^2)^2."""
    rho = np.asarray(rho, dtype=float)
    return (-16.0 / (1.0 + rho * rho) ** 2)[()]


def potential_VN(rho):
    """Weighted potential -16(1-rho^2)/(1+rho^2)^2 bounding the nonlinearity.

    Computed literally as potential_V(rho) * (1 - rho^2) so the algebraic
    relation between the two potentials holds to the last bit.
    """
    rho = np.asarray(rho, dtype=float)
    return (potential_V(rho) * (1.0 - rho * rho))[()]


def _n_direct(u, rho):
    A = 4.0 * np.arctan(rho)
    x = 2.0 * rho * u
    return (np.sin(A + x) - x - np.sin(A)) / rho**3 + 16.0 * u / (1.0 + rho * rho) ** 2


def _n_series(u, rho):
    # exact Taylor-with-integral-remainder form: the quadratic term carries
    # half the weighted potential, the rest is an entire series in x = 2 rho u
    A = 4.0 * np.arctan(rho)
    x = 2.0 * rho * u
    r2 = rho * rho
    quad = -8.0 * (1.0 - r2) / (1.0 + r2) ** 2 * u * u
    cosA = np.cos(A)
    sinA = np.sin(A)
    cyc = (cosA, -sinA, -cosA, sinA)  # cos(A + k pi/2)
    xpow = np.ones_like(x)  # x^k / k!
    total = np.zeros_like(x)
    for k in range(64):
        contrib = cyc[k % 4] * xpow * (2.0 / ((k + 1) * (k + 2) * (k + 3)))
        total = total + contrib
        if np.all(np.abs(contrib) <= 1e-16 * (np.abs(total) + 1e-300)):
            break
        xpow = xpow * x / (k + 1)
    return quad - 4.0 * u**3 * total


def nonlinearity_N(u, rho, form="auto"):
    """Quadratic-and-higher remainder of the sine term around the profile.

    Direct form:
        [sin(4 arctan rho + 2 rho u) - 2 rho u - sin(4 arctan rho)]/rho^3
            + 16 u/(1+rho^2)^2
    which cancels to O(u^2); the series form expands the same expression as
    -8 (1-rho^2)/(1+rho^2)^2 u^2 minus an entire series in 2 rho u, so it is
    the accurate branch when 2 rho |u| is small (in particular at rho = 0,
    where N(u, 0) = -8 u^2 - (4/3) u^3).

    form: "auto" switches branches at the cancellation cut; "direct" or
    "series" force one branch (both are exact, only roundoff differs).
    """
    u = np.asarray(u, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or np.any(rho > 1.0):
        raise ValueError("nonlinearity_N is defined on rho in [0, 1]")
    u, rho = np.broadcast_arrays(u, rho)
    if form == "direct":
        return _n_direct(u, rho)[()]
    if form == "series":
        return _n_series(u, rho)[()]
    if form != "auto":
        raise ValueError("form must be 'auto', 'direct' or 'series'")
    small = np.abs(2.0 * rho * u) < _SERIES_CUT
    safe = np.where(small, 0.5, rho)
    out = np.where(small, _n_series(u, rho), _n_direct(u, safe))
    return out[()]

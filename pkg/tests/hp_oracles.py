"""High-precision oracles shared by the test suite.

Independent mpmath re-implementations of the closed forms plus residual
evaluators that apply the second-order operators with mp.diff derivatives.
Agreement between these and the package's float64 implementations is a
genuine cross-check because no code is shared.
"""

import mpmath as mp

DPS = 30


def _mpf(x):
    return mp.mpmathify(x)


# closed forms -------------------------------------------------------------

def g1_mp(rho):
    return 1 / (1 + rho * rho)


def gtilde1_mp(rho):
    r2 = rho * rho
    return (12 * rho * r2 * mp.atanh(rho) - 9 * r2 - 1) / (rho * r2 * (r2 + 1))


def psi0_mp(rho):
    return (mp.atanh(rho) - rho) / rho**3


def psi1_mp(rho):
    return rho**-3


def b1_mp(rho, lam):
    x = 1j * (1 - lam) * mp.atanh(rho)
    return mp.sqrt(1 - rho * rho) * (mp.cos(x) - mp.sin(x) / x)


def b2_mp(rho, lam):
    x = 1j * (1 - lam) * mp.atanh(rho)
    return mp.sqrt(1 - rho * rho) * (mp.sin(x) + mp.cos(x) / x)


def w1_mp(rho, lam):
    return mp.sqrt(1 - rho * rho) * mp.exp(-(1 - lam) * mp.atanh(rho))


def w2_mp(rho, lam):
    return mp.sqrt(1 - rho * rho) * mp.exp((1 - lam) * mp.atanh(rho))


def psi_star1_mp(rho):
    return 2 * mp.atan(rho) / rho


def nonlin_direct_mp(u, rho):
    A = 4 * mp.atan(rho)
    x = 2 * rho * u
    return (mp.sin(A + x) - x - mp.sin(A)) / rho**3 + 16 * u / (1 + rho * rho) ** 2


# operator residuals -------------------------------------------------------

def spectral_residual(f, rho, lam):
    """(rho^2-1) f'' + (2(lam+2) rho - 4/rho) f' + (lam+2)(lam+1) f - 16 f/(1+rho^2)^2."""
    with mp.workdps(DPS):
        rho = _mpf(rho)
        lam = _mpf(lam)
        u = f(rho)
        du = mp.diff(f, rho)
        d2u = mp.diff(f, rho, 2)
        return complex(
            (rho**2 - 1) * d2u
            + (2 * (lam + 2) * rho - 4 / rho) * du
            + (lam + 2) * (lam + 1) * u
            - 16 * u / (1 + rho**2) ** 2
        )


def free_residual(f, rho, lam):
    """Same operator with the potential switched off."""
    with mp.workdps(DPS):
        rho = _mpf(rho)
        lam = _mpf(lam)
        u = f(rho)
        du = mp.diff(f, rho)
        d2u = mp.diff(f, rho, 2)
        return complex(
            (rho**2 - 1) * d2u
            + (2 * (lam + 2) * rho - 4 / rho) * du
            + (lam + 2) * (lam + 1) * u
        )


def bessel_residual(f, rho, lam):
    """v'' + [(2 lam - lam^2)/(1-rho^2)^2 - 2/(arctanh(rho)^2 (1-rho^2)^2)] v."""
    with mp.workdps(DPS):
        rho = _mpf(rho)
        lam = _mpf(lam)
        v = f(rho)
        d2v = mp.diff(f, rho, 2)
        pot = (2 * lam - lam**2) / (1 - rho**2) ** 2 - 2 / (
            mp.atanh(rho) ** 2 * (1 - rho**2) ** 2
        )
        return complex(d2v + pot * v)


def pure_power_residual(f, rho, lam):
    """w'' + (2 lam - lam^2)/(1-rho^2)^2 w."""
    with mp.workdps(DPS):
        rho = _mpf(rho)
        lam = _mpf(lam)
        v = f(rho)
        d2v = mp.diff(f, rho, 2)
        return complex(d2v + (2 * lam - lam**2) / (1 - rho**2) ** 2 * v)


def wronskian_mp(f, g, rho):
    """f g' - f' g with mp.diff derivatives."""
    with mp.workdps(DPS):
        rho = _mpf(rho)
        return complex(f(rho) * mp.diff(g, rho) - mp.diff(f, rho) * g(rho))


def eval_mp(f, *args):
    """Evaluate an mp closed form at float arguments, back to complex/float."""
    with mp.workdps(DPS):
        val = f(*[_mpf(a) for a in args])
        val = complex(val)
    return val.real if val.imag == 0.0 else val

"""Energy inner products, the linearized grid operator, and norm monitors.

The two energy forms E1 and E2 control the linearized similarity flow: the
free part of the linearization is dissipative up to the shift +1/2 in E1 and
strictly dissipative in E2.  Those inequalities, the eigenrelation for the
symmetry mode, and the Hardy-type weighted inequalities are exposed here as
seedable sampled property checks that return small JSON-ready reports.

All ball integrals drop the constant angular factor: every norm is the
one-dimensional rho^4 d(rho) realization, so ratios and rates are unaffected.
"""

import numpy as np

from .grid import Grid, RadialField, StatePair, derivative, quadrature, second_derivative

__all__ = [
    "apply_L0tilde",
    "apply_L",
    "energy_E1",
    "energy_E2",
    "energy_norm",
    "dissipativity_check",
    "sobolev_norm",
    "lp_norm",
    "w1p_seminorm",
    "h32_proxy",
    "hardy_checks",
    "random_even_state",
]


def apply_L0tilde(s: StatePair) -> StatePair:
    """Free part of the linearized flow.

    (u1, u2) -> (-rho u1' - u1 + u2, u1'' + (4/rho) u1' - rho u2' - 2 u2),
    with the origin limit (4/rho) u1' -> 4 u1''(0) for even fields.
    """
    rho = s.grid.nodes
    u1, u2 = s.psi1.values, s.psi2.values
    d1u1 = derivative(s.psi1).values
    d2u1 = second_derivative(s.psi1).values
    d1u2 = derivative(s.psi2).values
    out1 = -rho * d1u1 - u1 + u2
    lap_term = np.empty_like(d2u1)
    lap_term[1:] = 4.0 * d1u1[1:] / rho[1:]
    lap_term[0] = 4.0 * d2u1[0]
    out2 = d2u1 + lap_term - rho * d1u2 - 2.0 * u2
    return StatePair.from_values(s.grid, out1, out2, s.tau)


def apply_L(s: StatePair) -> StatePair:
    """Full linearization: the free part plus the potential term.

    The perturbation enters only the second slot, +16/(1+rho^2)^2 u1; the
    symmetry mode (1/(1+rho^2), 2/(1+rho^2)^2) is its eigenvector with
    eigenvalue one.
    """
    rho = s.grid.nodes
    base = apply_L0tilde(s)
    out2 = base.psi2.values + 16.0 / (1.0 + rho * rho) ** 2 * s.psi1.values
    return StatePair.from_values(s.grid, base.psi1.values, out2, s.tau)


def _prod(grid: Grid, a: np.ndarray, b: np.ndarray, weight: int):
    return quadrature(RadialField(grid, a * np.conj(b)), weight)


def energy_E1(u: StatePair, v: StatePair):
    """First energy form: derivative term, velocity term, boundary trace.

    E1(u, v) = int u1' conj(v1') rho^4 + int u2 conj(v2) rho^4
               + u1(1) conj(v1(1)).
    """
    g = u.grid
    du1 = derivative(u.psi1).values
    dv1 = derivative(v.psi1).values
    val = _prod(g, du1, dv1, 4)
    val = val + _prod(g, u.psi2.values, v.psi2.values, 4)
    val = val + u.psi1.values[-1] * np.conj(v.psi1.values[-1])
    return complex(val)


def energy_E2(u: StatePair, v: StatePair):
    """Second energy form (strict dissipativity holds in this one).

    E2(u, v) = 8 int u1'' conj(v1'') rho^4 + 32 int u1' conj(v1') rho^2
               + 8 int u2' conj(v2') rho^4 + u1(1) conj(v1(1))
               + u2(1) conj(v2(1)).

    The weight 8 on the u2' term is forced: the drift operator's quadratic
    form in this metric only telescopes (the u1''u2'' and u1'u2' cross
    integrals cancel) when both second-order integrals carry equal weight,
    and that cancellation is what yields the -1/2 contraction bound.
    """
    g = u.grid
    d2u1 = second_derivative(u.psi1).values
    d2v1 = second_derivative(v.psi1).values
    du1 = derivative(u.psi1).values
    dv1 = derivative(v.psi1).values
    du2 = derivative(u.psi2).values
    dv2 = derivative(v.psi2).values
    val = 8.0 * _prod(g, d2u1, d2v1, 4)
    val = val + 32.0 * _prod(g, du1, dv1, 2)
    val = val + 8.0 * _prod(g, du2, dv2, 4)
    val = val + u.psi1.values[-1] * np.conj(v.psi1.values[-1])
    val = val + u.psi2.values[-1] * np.conj(v.psi2.values[-1])
    return complex(val)


_FORMS = {"E1": energy_E1, "E2": energy_E2}


def energy_norm(s: StatePair, form: str = "E1") -> float:
    val = _FORMS[form](s, s)
    return float(np.sqrt(max(val.real, 0.0)))


def random_even_state(grid: Grid, rng, degree: int = 8) -> StatePair:
    """Random even-polynomial pair, coefficients uniform in [-1, 1]."""
    powers = np.arange(0, degree + 1, 2)
    rho = grid.nodes
    basis = rho[None, :] ** powers[:, None]
    c1 = rng.uniform(-1.0, 1.0, powers.size)
    c2 = rng.uniform(-1.0, 1.0, powers.size)
    return StatePair.from_values(grid, c1 @ basis, c2 @ basis)


def dissipativity_check(form: str = "E1", samples: int = 1000, seed: int = 0, n: int = 257) -> dict:
    """Sampled check of the energy inequalities for the free operator.

    In E1: Re(L0~ u, u) <= +1/2 ||u||^2; in E2: Re(L0~ u, u) <= -1/2 ||u||^2.
    Draws random even-polynomial pairs and reports the minimum inequality
    margin (right side minus left side); margins below -1e-10 count as
    violations.
    """
    if form not in _FORMS:
        raise ValueError("form must be 'E1' or 'E2'")
    if samples < 1:
        raise ValueError("need at least one sample")
    energy = _FORMS[form]
    shift = 0.5 if form == "E1" else -0.5
    grid = Grid(n)
    rng = np.random.default_rng(seed)
    min_margin = np.inf
    violations = 0
    for _ in range(samples):
        u = random_even_state(grid, rng)
        lhs = energy(apply_L0tilde(u), u).real
        rhs = shift * energy(u, u).real
        margin = rhs - lhs
        min_margin = min(min_margin, margin)
        if margin < -1e-10:
            violations += 1
    return {
        "check": f"dissipativity_{form}",
        "samples": samples,
        "seed": seed,
        "n": n,
        "min_margin": float(min_margin),
        "violations": violations,
        "pass": bool(violations == 0),
    }


def _deriv_j(f: RadialField, j: int) -> RadialField:
    if j == 0:
        return f
    if j == 1:
        return derivative(f)
    if j == 2:
        return second_derivative(f)
    if j == 3:
        return derivative(second_derivative(f))
    raise ValueError("derivative order must be 0..3")


def sobolev_norm(s: StatePair, level: int = 1) -> float:
    """Integer Sobolev norm of the pair: H^level x H^(level-1), rho^4 weight."""
    if level not in (1, 2, 3):
        raise ValueError("level must be 1, 2 or 3")
    total = 0.0
    for j in range(level + 1):
        d = _deriv_j(s.psi1, j).values
        total += _prod(s.grid, d, d, 4).real
    for j in range(level):
        d = _deriv_j(s.psi2, j).values
        total += _prod(s.grid, d, d, 4).real
    return float(np.sqrt(max(total, 0.0)))


def lp_norm(f: RadialField, p: float) -> float:
    """(int |f|^p rho^4 d rho)^(1/p); p = inf is the max over nodes."""
    if np.isinf(p):
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError("p must be >= 1")
    val = quadrature(RadialField(f.grid, np.abs(f.values) ** p), 4)
    return float(val ** (1.0 / p))


def w1p_seminorm(f: RadialField, p: float) -> float:
    """Same integral applied to the FD derivative of the field."""
    return lp_norm(derivative(f), p)


def h32_proxy(s: StatePair) -> float:
    """Interpolation proxy between the two integer levels.

    Geometric mean sqrt(||s||_H1 ||s||_H2); a monitor, not a fractional norm.
    """
    return float(np.sqrt(sobolev_norm(s, 1) * sobolev_norm(s, 2)))


def hardy_checks(samples: int = 1000, seed: int = 0, n: int = 257) -> dict:
    """Sampled Hardy-type ratios for even polynomials.

    r1 = ||f/rho||_L2 / ||f||_H1, r2 = ||f/rho^2||_L2 / ||f||_H2,
    r3 = ||f'/rho||_L2 / ||f||_H2, all against the rho^4 measure.  Only
    finiteness and stability of the max ratios are asserted anywhere; the
    constants are artifact observations.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    grid = Grid(n)
    rng = np.random.default_rng(seed)
    powers = np.arange(0, 9, 2)
    rho = grid.nodes
    basis = rho[None, :] ** powers[:, None]
    max_r = [0.0, 0.0, 0.0]
    for _ in range(samples):
        c = rng.uniform(-1.0, 1.0, powers.size)
        f = RadialField(grid, c @ basis)
        df = derivative(f)
        d2f = second_derivative(f)
        l2_over_rho = np.sqrt(quadrature(RadialField(grid, f.values**2), 2))
        l2_over_rho2 = np.sqrt(quadrature(RadialField(grid, f.values**2), 0))
        l2_df_over_rho = np.sqrt(quadrature(RadialField(grid, df.values**2), 2))
        h1 = np.sqrt(
            quadrature(RadialField(grid, f.values**2), 4)
            + quadrature(RadialField(grid, df.values**2), 4)
        )
        h2 = np.sqrt(
            h1**2 + quadrature(RadialField(grid, d2f.values**2), 4)
        )
        max_r[0] = max(max_r[0], l2_over_rho / h1)
        max_r[1] = max(max_r[1], l2_over_rho2 / h2)
        max_r[2] = max(max_r[2], l2_df_over_rho / h2)
    return {
        "check": "hardy_ratios",
        "samples": samples,
        "seed": seed,
        "n": n,
        "max_ratio_inv1": float(max_r[0]),
        "max_ratio_inv2": float(max_r[1]),
        "max_ratio_dinv1": float(max_r[2]),
        "pass": bool(all(np.isfinite(max_r))),
    }

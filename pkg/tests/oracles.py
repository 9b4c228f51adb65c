"""Reference computations that share no code with the package.

Each oracle reaches its answer by a different route than the implementation
it checks: sympy on an undetermined function, Gauss-Hermite quadrature, exact
characteristics, or an ODE solver.
"""

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

q_, p_ = sp.symbols("q p", real=True)
hbar_ = sp.Symbol("hbar", positive=True)
f_ = sp.Function("f")(q_, p_)


def sympy_of(poly) -> sp.Expr:
    """PolyPhaseFn -> sympy expression via its string form."""
    return sp.sympify(str(poly).replace("^", "**"), locals={"q": q_, "p": p_})


def sym_vanhove(F: sp.Expr, g: sp.Expr) -> sp.Expr:
    """O_F acting on g: (F - p F_p) g + i hbar (F_q g_p - F_p g_q)."""
    return (F - p_ * sp.diff(F, p_)) * g + sp.I * hbar_ * (sp.diff(F, q_) * sp.diff(g, p_)
                                                            - sp.diff(F, p_) * sp.diff(g, q_))


def sym_bracket(F, G):
    return sp.diff(F, q_) * sp.diff(G, p_) - sp.diff(F, p_) * sp.diff(G, q_)


def sym_isomorphism_residual(F: sp.Expr, G: sp.Expr) -> sp.Expr:
    """[O_F, O_G] f - i hbar O_{F,G} f for an undetermined f(q, p)."""
    lhs = sym_vanhove(F, sym_vanhove(G, f_)) - sym_vanhove(G, sym_vanhove(F, f_))
    return sp.expand(lhs - sp.I * hbar_ * sym_vanhove(sym_bracket(F, G), f_))


# -- correlated Gaussian family -------------------------------------------------------
def lambda_family_energies(lam: float, m: float = 1.0, hbar: float = 1.0, nodes: int = 40) -> dict:
    """Q_EPS and Q_ECS of rho ~ exp(-(q^2+p^2+x^2) - lam p x) by Gauss-Hermite quadrature.

    d_x log rho = -2x - lam p; integrating p out leaves P(q, x) ~ exp(-q^2 - (1 - lam^2/4) x^2).
    """
    z, w = np.polynomial.hermite.hermgauss(nodes)
    P, X = np.meshgrid(z, z, indexing="ij")
    W = np.outer(w, w) * np.exp(-lam * P * X)  # q integrates out of both
    norm = W.sum()
    c = hbar**2 / (8 * m)
    q_eps = c * np.sum(W * (2 * X + lam * P) ** 2) / norm
    a = 1 - lam**2 / 4
    q_ecs = c * np.sum(W * (2 * a * X) ** 2) / norm
    return {"Q_EPS": q_eps, "Q_ECS": q_ecs, "difference": q_eps - q_ecs}


# frozen from lambda_family_energies(0.4) with hbar = m = 1
LAMBDA_04_DIFFERENCE = 0.01


# -- exact transport -----------------------------------------------------------------
def free_fall_density(q, p, t, centre, width, M=1.0, g=1.0):
    """Liouville transport of a product Gaussian under H = p^2/2M + M g q, by characteristics."""
    p0 = p + M * g * t
    q0 = q - p0 * t / M + 0.5 * g * t**2
    r = np.exp(-0.5 * ((q0 - centre[0]) / width[0]) ** 2 - 0.5 * ((p0 - centre[1]) / width[1]) ** 2)
    return r / (2 * np.pi * width[0] * width[1])


def ecs_mean_q(q0s, weights, dSdq, force, t, M=1.0):
    """<q>(t) by integrating each characteristic q' = p/M, p' = -V'(q) from (q0, S'(q0))."""
    y0 = np.concatenate([q0s, dSdq(q0s)])
    n = q0s.size

    def rhs(_t, y):
        return np.concatenate([y[n:] / M, -force(y[:n])])

    sol = solve_ivp(rhs, (0, t), y0, rtol=1e-11, atol=1e-12)
    return float(np.sum(weights * sol.y[:n, -1]) / np.sum(weights))


def free_gaussian_variance(s0, m, hbar, t):
    """Spreading of a free real Gaussian wave packet."""
    return s0**2 + (hbar * t / (2 * m * s0)) ** 2

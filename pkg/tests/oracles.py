"""Independent reference implementations used only to check the library.

These deliberately take different numerical routes from the package:
the incomplete beta uses a Lentz continued fraction, least squares goes
through the normal equations, and code lengths are recomputed term by
term with plain Python floats.
"""

import math

import numpy as np

MACHEP = 1.1102230246251565e-16


def lgamma(x):
    return math.lgamma(x)


def betainc_cf(a, b, x):
    """Regularized incomplete beta I_x(a, b) via Lentz's continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        lgamma(a + b) - lgamma(a) - lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _lentz(a, b, x) / a
    return 1.0 - betainc_cf(b, a, 1.0 - x)


def _lentz(a, b, x):
    tiny = 1e-300
    f, c, d = 1.0, 1.0, 0.0
    for m in range(0, 300):
        if m == 0:
            numerator = 1.0
        elif m % 2 == 0:
            k = m // 2
            numerator = k * (b - k) * x / ((a + 2.0 * k - 1.0) * (a + 2.0 * k))
        else:
            k = (m - 1) // 2
            numerator = -(a + k) * (a + b + k) * x / ((a + 2.0 * k) * (a + 2.0 * k + 1.0))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        d = 1.0 / d
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        f *= c * d
        if abs(1.0 - c * d) < 8.0 * MACHEP:
            return f - 1.0
    return f - 1.0


def f_cdf_oracle(x, d1, d2):
    """F distribution CDF through the continued-fraction beta."""
    if x <= 0:
        return 0.0
    z = d1 * x / (d1 * x + d2)
    return betainc_cf(d1 / 2.0, d2 / 2.0, z)


def normal_equations_fit(design, response):
    """Least squares via the normal equations (Cholesky-ish solve)."""
    xtx = design.T @ design
    xty = design.T @ response
    coef = np.linalg.solve(xtx, xty)
    resid = response - design @ coef
    return coef, float(resid @ resid)


def gaussian_loglik_by_sum(residuals):
    """Per-sample Gaussian log-density summed directly at the MLE variance."""
    m = len(residuals)
    s2 = float(np.dot(residuals, residuals)) / m
    return sum(
        -0.5 * math.log(2.0 * math.pi * s2) - r * r / (2.0 * s2) for r in residuals
    )


def code_length_by_terms(coefficients, rss, m, n_total, scale_floor=1.0):
    """Term-by-term two-part code length in plain Python arithmetic."""
    delta = 1.0 / math.sqrt(n_total)
    sigma2 = rss / m
    data = m * math.log(math.sqrt(2.0 * math.pi) * math.sqrt(sigma2)) + rss / (2.0 * sigma2)
    param = 0.0
    for xi in [sigma2] + [float(c) for c in coefficients]:
        priced = max(abs(xi), scale_floor)
        param += max(0.0, math.log(priced / delta))
    order = math.log(len(list(coefficients)) + 1)
    return data + param + order, data, param, order


def ar2_autocovariance0(a1, a2, noise_var):
    """Stationary variance of x_t = a1 x_{t-1} + a2 x_{t-2} + noise."""
    # solve the Yule-Walker system for gamma0, gamma1, gamma2
    # gamma0 = a1 g1 + a2 g2 + s2; g1 = a1 g0 + a2 g1; g2 = a1 g1 + a2 g0
    rho1 = a1 / (1.0 - a2)
    g0 = noise_var / (1.0 - a1 * rho1 - a2 * (a1 * rho1 + a2))
    return g0

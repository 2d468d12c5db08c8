"""Special functions the error-probability bounds are built from.

The three primitives are the Gaussian tail Q(x), the log-Gamma function and
the modified Bessel function of the second kind K_nu with half-integer or
integer order.  On top of them sit the chi-square-difference density, its
tail bound, and the Psi term that appears in every pairwise error bound:

    Psi(l, lam) = sqrt(2) / (2^l Gamma(l/2))
                  * (eta0 lam)^((l-1)/2) * K_((l-1)/2)(eta0 lam / 2)

Bound arguments reach the thousands in high-SNR sweeps, where K_nu underflows
double precision, so every composite here also has an ``ln_``-prefixed
log-space variant computed through the exponentially scaled Bessel function.
Probability-like outputs are exponentiated once at the very end.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .exceptions import DomainError

_LN_SQRT_PI = 0.5 * math.log(math.pi)
_LN_2 = math.log(2.0)


def gaussian_q(x: float) -> float:
    """Upper tail probability of the standard normal distribution."""
    return 0.5 * _sp.erfc(float(x) / math.sqrt(2.0))


def ln_gaussian_q(x: float) -> float:
    """log Q(x), stable far into the tail where Q underflows."""
    return float(_sp.log_ndtr(-float(x)))


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return float(_sp.gammaln(x))


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function K_nu(x) for x > 0.

    Orders arising in the bounds are the half-integers (l - 1) / 2; the
    symmetry K_nu = K_{-nu} is applied so negative orders are accepted.
    Returns +inf when the value overflows (x near zero at large order).
    """
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    with np.errstate(over="ignore"):
        return float(_sp.kv(abs(float(nu)), x))


def ln_bessel_k(nu: float, x: float) -> float:
    """log K_nu(x), via the exponentially scaled function exp(x) K_nu(x)."""
    x = float(x)
    if x <= 0.0:
        raise DomainError(f"ln_bessel_k requires x > 0, got {x}")
    with np.errstate(over="ignore"):
        return float(np.log(_sp.kve(abs(float(nu)), x))) - x


def _check_dof(l: int) -> int:
    if int(l) != l or l < 1:
        raise DomainError(f"degrees-of-freedom count must be an integer >= 1, got {l}")
    return int(l)


def ln_chi2_diff_tail_bound(l: int, delta: float) -> float:
    """log of the analytic upper bound on Pr(x1 - x2 > delta).

    x1 and x2 are independent central chi-square variables with l degrees of
    freedom each; the bound is

        sqrt(2) / (2^(l+1) Gamma(l/2)) * delta^((l-1)/2) * K_((l-1)/2)(delta/2).
    """
    l = _check_dof(l)
    delta = float(delta)
    if delta <= 0.0:
        raise DomainError(f"tail bound requires delta > 0, got {delta}")
    nu = 0.5 * (l - 1)
    return (
        0.5 * _LN_2
        - (l + 1) * _LN_2
        - float(_sp.gammaln(0.5 * l))
        + nu * math.log(delta)
        + ln_bessel_k(nu, 0.5 * delta)
    )


def chi2_diff_tail_bound(l: int, delta: float) -> float:
    """Upper bound on Pr(x1 - x2 > delta) for iid chi-square_l x1, x2."""
    return math.exp(ln_chi2_diff_tail_bound(l, delta))


def ln_psi_term(l: int, lam: float, eta0: float) -> float:
    """log Psi(l, lam); identically log of 2x the tail bound at eta0 * lam."""
    lam = float(lam)
    if lam <= 0.0:
        raise DomainError(f"psi_term requires lambda > 0, got {lam}")
    if not 0.0 < eta0 < 0.5:
        raise DomainError(f"psi_term requires 0 < eta0 < 1/2, got {eta0}")
    return _LN_2 + ln_chi2_diff_tail_bound(l, eta0 * lam)


def psi_term(l: int, lam: float, eta0: float) -> float:
    """Bessel-tail term of the pairwise subspace-selection error bound.

    Strictly decreasing in ``lam`` for fixed ``l``.  Equal to twice the
    chi-square-difference tail bound evaluated at delta = eta0 * lam, which
    is how the bound arises: the probability that the chi-square difference
    statistic exceeds the threshold in either direction.
    """
    return math.exp(ln_psi_term(l, lam, eta0))


def chi2_diff_pdf(l: int, w: float) -> float:
    """Density of x1 - x2 at w, for independent chi-square_l x1 and x2.

        f(w) = |w|^((l-1)/2) K_((l-1)/2)(|w|/2) / (sqrt(pi) 2^l Gamma(l/2))

    Symmetric around zero.  At w = 0 the l = 1 density has an integrable
    singularity and +inf is returned; for l >= 2 the finite limit
    Gamma((l-1)/2) / (4 sqrt(pi) Gamma(l/2)) is returned.
    """
    l = _check_dof(l)
    aw = abs(float(w))
    if aw == 0.0:
        if l == 1:
            return math.inf
        return math.exp(
            float(_sp.gammaln(0.5 * (l - 1)))
            - 2.0 * _LN_2
            - _LN_SQRT_PI
            - float(_sp.gammaln(0.5 * l))
        )
    nu = 0.5 * (l - 1)
    ln_f = (
        nu * math.log(aw)
        + ln_bessel_k(nu, 0.5 * aw)
        - _LN_SQRT_PI
        - l * _LN_2
        - float(_sp.gammaln(0.5 * l))
    )
    return math.exp(ln_f)

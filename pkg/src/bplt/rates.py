"""Closed-form lower-tail rates for approximately regular, tree-like hypergraphs.

G(n,p) model, p ~ c Δ^{−1/(k−1)}:

    Δ^{1/(k−1)} |V|^{−1} log P(X ≤ η E X) → x* + (x*)^k ζ (1 − 1/k) − log(1−ζ) η c^k / k − c

with ζ from (1−ζ)(x*)^k = η c^k and x* = x*_k(c, ζ). G(n,m) model, m ~ b |V| Δ^{−1/(k−1)}:

    → −b^k (1 − η + η log η) / k.
"""

import logging
from math import exp, log

from scipy.special import xlogy

from .bp import solve_zeta_regular, thresholds, x_star_regular
from .exceptions import ValidationError

__all__ = ["rate_gnp", "rate_gnm", "rate_gnm_via_gnp", "gnp_range_message"]

logger = logging.getLogger(__name__)


def _check_k_eta(k: int, eta: float) -> None:
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if not 0 <= eta < 1:
        raise ValidationError(f"eta must lie in [0, 1), got {eta}")


def gnp_range_message(k: int, eta: float) -> str:
    bound = thresholds(k, eta).c_bar
    if eta == 0:
        return f"c < (e/{k - 1})^(1/{k - 1}) = {bound:.10g}"
    return f"c < c_bar_{k}({eta}) = {bound:.10g}"


def _bethe_rate(k: int, c: float, zeta: float, eta_ck: float) -> float:
    """x* + (x*)^k ζ (1 − 1/k) − log(1−ζ) η c^k / k − c, given η c^k."""
    x = x_star_regular(k, c, zeta)
    tail = 0.0 if eta_ck == 0 else -log(1 - zeta) * eta_ck / k
    return x + x**k * zeta * (1 - 1 / k) + tail - c


def rate_gnp(k: int, c: float, eta: float) -> float:
    _check_k_eta(k, eta)
    if not 0 < c < thresholds(k, eta).c_bar:
        raise ValidationError(f"c = {c} is outside the admissible range 0 < {gnp_range_message(k, eta)}")
    zeta = solve_zeta_regular(k, c, eta).zeta
    return _bethe_rate(k, c, zeta, eta * c**k)


def _check_gnm(k: int, b: float, eta: float) -> None:
    _check_k_eta(k, eta)
    if not b > 0:
        raise ValidationError(f"b must be > 0, got {b}")
    if not (k - 1) * b ** (k - 1) * (1 - eta) < 1:
        raise ValidationError(
            f"b = {b} is outside the admissible range (k-1) b^(k-1) (1-eta) < 1 "
            f"(k={k}, eta={eta}: b < {((1 / ((k - 1) * (1 - eta))) ** (1 / (k - 1))):.10g})"
        )


def rate_gnm(k: int, b: float, eta: float) -> float:
    _check_gnm(k, b, eta)
    return -(b**k) * (1 - eta + float(xlogy(eta, eta))) / k


def rate_gnm_via_gnp(k: int, b: float, eta: float) -> float:
    """The G(n,m) rate through the G(n,p) Bethe formula.

    At ζ = 1 − η and c = b e^{ζ b^{k−1}} the regular fixed point is x* = b. The G(n,p)
    lower-tail rate at this point, minus the rate (1−η) b^k + b − c of the binomial
    subset size landing on m, gives the G(n,m) rate.
    """
    _check_gnm(k, b, eta)
    zeta = 1 - eta
    c = b * exp(zeta * b ** (k - 1))
    size_rate = (1 - eta) * b**k + b - c
    return _bethe_rate(k, c, zeta, eta * b**k) - size_rate

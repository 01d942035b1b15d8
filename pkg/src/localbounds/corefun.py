"""Entropic scalar functions and the generic clipping lower-bound combinator.

Everything here works in nats. The combinators take already evaluated
functional values, so the same code serves distributions and density
operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

LN2 = math.log(2.0)

# below this x, -x ln x is indistinguishable from 0 and 0*log(0) would give nan
_ETA_FLOOR = 1e-300


def eta(x):
    """Return ``-x ln x`` with ``eta(0) = 0``.

    Accepts a scalar or an array; arrays are evaluated elementwise.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"eta is defined on [0, inf), got {x!r}")
    safe = np.where(arr > _ETA_FLOOR, arr, 1.0)
    out = np.where(arr > _ETA_FLOOR, -safe * np.log(safe), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def _eta_one_minus(p: float) -> float:
    # eta(1 - p) without cancellation for small p
    return -(1.0 - p) * math.log1p(-p)


def binary_entropy(p: float, variant: str = "plain") -> float:
    """Binary entropy ``h2(p) = eta(p) + eta(1 - p)``.

    ``variant="truncated"`` gives the nondecreasing concave modification that
    equals ``h2`` on ``[0, 1/2]`` and ``ln 2`` on ``(1/2, 1]``.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy needs p in [0, 1], got {p!r}")
    if variant == "truncated":
        if p > 0.5:
            return LN2
    elif variant != "plain":
        raise ValueError(f"unknown variant {variant!r}")
    if p > 0.5:
        p = 1.0 - p  # exact for p >= 1/2
    if p == 0.0:
        return 0.0
    return -p * math.log(p) + _eta_one_minus(p)


def h2(p: float) -> float:
    return binary_entropy(p, "plain")


def h2_tilde(p: float) -> float:
    return binary_entropy(p, "truncated")


def g_fun(x: float) -> float:
    """``g(x) = (x+1) ln(x+1) - x ln x``, the oscillator max-entropy function."""
    x = float(x)
    if x < 0 or math.isnan(x):
        raise DomainError(f"g is defined on [0, inf), got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < 1e-300:
        # 1/x overflows; x ln(1 + 1/x) = -x ln x + O(x^2)
        return -x * math.log(x) + x
    # rearranged as x ln(1 + 1/x) + ln(1 + x): no cancellation near 0 or at large x
    return x * math.log1p(1.0 / x) + math.log1p(x)


def homogeneous_binary_entropy(x: float, y: float) -> float:
    """``H({x, y}) = eta(x) + eta(y) - eta(x + y)`` on the positive quadrant."""
    return eta(x) + eta(y) - eta(x + y)


@dataclass(frozen=True)
class LAAProfile:
    """Concavity defects ``a_f = a_coeff * h2`` and ``b_f = b_coeff * h2``."""

    a_coeff: float = 0.0
    b_coeff: float = 0.0

    def __post_init__(self):
        if self.a_coeff < 0 or self.b_coeff < 0:
            raise PreconditionError("profile coefficients must be nonnegative")

    def a_f(self, p: float) -> float:
        return self.a_coeff * h2(p) if self.a_coeff else 0.0

    def b_f(self, p: float) -> float:
        return self.b_coeff * h2(p) if self.b_coeff else 0.0


ENTROPY_PROFILE = LAAProfile(0, 1)
CONDITIONAL_ENTROPY_PROFILE = LAAProfile(0, 1)
DIVERGENCE_PROFILE = LAAProfile(1, 0)
MUTUAL_INFORMATION_PROFILE = LAAProfile(1, 1)
AFFINE_PROFILE = LAAProfile(0, 0)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps must lie in (0, 1], got {eps!r}")
    return eps


def laa_corrections(profile: LAAProfile, eps: float) -> tuple[float, float]:
    """Return ``(D_f(eps), a_tilde_f(eps))`` for a profile.

    ``D_f(eps) = (1+eps) (a_f + b_f)(eps / (1+eps))`` and ``a_tilde_f`` is
    ``a_f`` frozen at its value in 1/2 for ``eps > 1/2``.
    """
    eps = _check_eps(eps)
    s = eps / (1.0 + eps)
    d_f = (1.0 + eps) * (profile.a_f(s) + profile.b_f(s))
    a_tilde = profile.a_f(min(eps, 0.5))
    return d_f, a_tilde


def laa_lower_bound_A(f_at_p: float, f_tilde_at_clip: float,
                      profile: LAAProfile, eps: float) -> float:
    """``f(p) - f~(p ^ eps) - D_f(eps) - a~_f(eps)``, unclamped."""
    if not math.isfinite(f_at_p):
        raise PreconditionError("the bound needs a finite value f(p) at the center")
    d_f, a_tilde = laa_corrections(profile, eps)
    return f_at_p - f_tilde_at_clip - d_f - a_tilde


def laa_lower_bound_B(f_tilde_at_cut: float, r_eps: float,
                      profile: LAAProfile, eps: float) -> float:
    """``f~([p - eps]_+) - D_f(eps) - a~_f(eps) - a_f(1 - r_eps)``, unclamped."""
    r_eps = float(r_eps)
    # r_eps is a sum of clipped entries; allow accumulated rounding above 1
    if not -1e-12 <= r_eps <= 1.0 + 1e-12:
        raise PreconditionError(f"r_eps must lie in [0, 1], got {r_eps!r}")
    r_eps = min(max(r_eps, 0.0), 1.0)
    d_f, a_tilde = laa_corrections(profile, eps)
    return f_tilde_at_cut - d_f - a_tilde - profile.a_f(1.0 - r_eps)

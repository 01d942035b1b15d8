"""Energy spectra, the inverse-temperature equation and max-entropy functions.

A spectrum is a nondecreasing list of nonnegative levels. Infinite families
(the oscillator ``0, 1, 2, ...``) are stored truncated at a cap together with
a certified upper bound on the neglected part of the partition sum; every
max-entropy value computed from such a spectrum carries a tail error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .corefun import g_fun
from .errors import PreconditionError, RangeError


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    """Nondecreasing nonnegative energy levels ``E_0 <= E_1 <= ...``.

    ``tail`` (if set) maps ``beta`` to an upper bound on
    ``sum_{k >= len(levels)} exp(-beta E_k)`` for the infinite family the
    levels were cut from.
    """

    levels: np.ndarray
    family: Optional[str] = None
    tail: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        lv = np.array(self.levels, dtype=float).ravel()
        if lv.size == 0:
            raise PreconditionError("an energy spectrum needs at least one level")
        if not np.all(np.isfinite(lv)) or lv[0] < 0:
            raise PreconditionError("energy levels must be finite and nonnegative")
        if np.any(np.diff(lv) < 0):
            raise PreconditionError("energy levels must be nondecreasing")
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_levels(cls, levels) -> "EnergySpectrum":
        return cls(np.asarray(levels, dtype=float))

    @classmethod
    def oscillator(cls, cap: int) -> "EnergySpectrum":
        """Number-operator levels ``0..cap-1`` with the geometric tail bound."""
        cap = int(cap)
        if cap < 2:
            raise PreconditionError("oscillator cap must be at least 2")

        def tail(beta: float, _cap=cap) -> float:
            if beta <= 0:
                return math.inf
            return math.exp(-beta * _cap) / -math.expm1(-beta)

        return cls(np.arange(cap, dtype=float), family="oscillator", tail=tail)

    @property
    def size(self) -> int:
        return int(self.levels.size)

    @property
    def ground(self) -> float:
        return float(self.levels[0])

    @property
    def is_truncated(self) -> bool:
        return self.tail is not None

    def ground_multiplicity(self) -> int:
        return int(np.count_nonzero(self.levels == self.levels[0]))

    def upper_energy(self) -> float:
        """Supremum of attainable mean energies (``inf`` for generated families)."""
        return math.inf if self.is_truncated else float(self.levels.mean())

    def head(self, n: int) -> np.ndarray:
        """First ``n`` levels, for pairing with an ``n``-dimensional state."""
        if n > self.size:
            raise PreconditionError(
                f"spectrum has {self.size} levels but {n} are needed; raise the cap")
        return self.levels[:n]

    def to_dict(self) -> dict:
        if self.family == "oscillator":
            return {"family": "oscillator", "cap": self.size}
        return {"levels": self.levels.tolist()}


@dataclass(frozen=True)
class GibbsSolution:
    """Root of the mean-energy equation and the resulting max entropy."""

    beta: float
    log_Z: float
    F_value: float
    E_target: float
    residual: float
    tail_error: float = 0.0

    def weights(self, spectrum: EnergySpectrum) -> np.ndarray:
        return np.exp(-self.beta * spectrum.levels - self.log_Z)


def _mean_excess(beta: float, shifted: np.ndarray) -> float:
    # mean energy above the ground level, log-sum-exp stabilised
    w = np.exp(-beta * shifted)
    return float(np.dot(shifted, w) / w.sum())


def solve_beta(spectrum: EnergySpectrum, E: float) -> GibbsSolution:
    """Solve ``sum E_i e^{-beta E_i} = E sum e^{-beta E_i}`` for ``beta > 0``.

    Raises:
        RangeError: if ``E`` is not inside the open interval of attainable
            mean energies ``(E_0, mean of levels)`` (for a generated family the
            upper end is the mean of the stored levels; raise the cap).
    """
    E = float(E)
    lv = spectrum.levels
    e0 = spectrum.ground
    hi_lim = float(lv.mean())
    if not e0 < E < hi_lim:
        what = "increase the cap" if spectrum.is_truncated else "no root"
        raise RangeError(
            f"E={E!r} is outside the attainable interval ({e0!r}, {hi_lim!r}): {what}")
    shifted = lv - e0
    target = E - e0

    def f(beta):
        return _mean_excess(beta, shifted) - target

    beta_hi = 1.0 / target
    while f(beta_hi) > 0:
        beta_hi *= 2.0
        if beta_hi > 1e300:
            raise RangeError(f"E={E!r} too close to the ground level {e0!r}")
    beta = brentq(f, 0.0, beta_hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    # Newton polish: d(mean)/d(beta) = -variance
    for _ in range(3):
        w = np.exp(-beta * shifted)
        w /= w.sum()
        m = float(np.dot(shifted, w))
        var = float(np.dot((shifted - m) ** 2, w))
        if var <= 0:
            break
        step = (m - target) / var
        if not math.isfinite(step) or beta + step <= 0:
            break
        beta += step
    residual = abs(f(beta))
    log_z = -beta * e0 + float(logsumexp(-beta * shifted))
    tail_error = 0.0
    if spectrum.tail is not None:
        # F_inf(E) <= beta E + ln(Z_trunc + tail(beta)) by duality
        tail_error = math.log1p(spectrum.tail(beta) * math.exp(-log_z))
    return GibbsSolution(beta=beta, log_Z=log_z, F_value=beta * E + log_z,
                         E_target=E, residual=residual, tail_error=tail_error)


def F_lambda(spectrum: EnergySpectrum, E: float, with_error: bool = False):
    """Maximal Shannon entropy of distributions with mean energy at most ``E``.

    Returns ``ln m(E_0)`` at the ground level and ``ln(#levels)`` once ``E``
    reaches the unconstrained maximum of a finite list. With
    ``with_error=True`` returns ``(F, tail_error)``.
    """
    E = float(E)
    e0 = spectrum.ground
    if E < e0:
        raise RangeError(f"no distribution has mean energy {E!r} below E_0={e0!r}")
    if E == e0:
        out = (math.log(spectrum.ground_multiplicity()), 0.0)
    elif not spectrum.is_truncated and E >= spectrum.upper_energy():
        out = (math.log(spectrum.size), 0.0)
    else:
        sol = solve_beta(spectrum, E)
        out = (sol.F_value, sol.tail_error)
    return out if with_error else out[0]


def F_H(spectrum: EnergySpectrum, E: float, with_error: bool = False):
    """Operator form of :func:`F_lambda`; a Hamiltonian enters only through its spectrum."""
    return F_lambda(spectrum, E, with_error)


def gibbs_state(spectrum: EnergySpectrum, E: float, dim_cap: int):
    """Diagonal Gibbs state at mean energy ``E``, cut to ``dim_cap`` levels.

    The kept weights are renormalised; the discarded mass is returned by
    :func:`gibbs_tail_mass`. Cutting lowers the mean energy, so the entropy of
    the returned state never exceeds ``F(E)``.
    """
    from .quantum import DensityOperator

    sol = solve_beta(spectrum, E)
    n = min(int(dim_cap), spectrum.size)
    w = sol.weights(spectrum)[:n]
    return DensityOperator.from_spectrum(w / w.sum())


def gibbs_tail_mass(spectrum: EnergySpectrum, E: float, dim_cap: int) -> float:
    sol = solve_beta(spectrum, E)
    w = sol.weights(spectrum)
    kept = float(w[: int(dim_cap)].sum())
    extra = 0.0
    if spectrum.tail is not None:
        extra = spectrum.tail(sol.beta) * math.exp(-sol.log_Z)
    return max(0.0, 1.0 - kept) + extra


def energy_eps(spectrum: EnergySpectrum, eigvals, eps: float) -> float:
    """``sum_k E_k min(lambda_k, eps)`` with levels paired to eigenvalues.

    ``eigvals`` must be sorted non-increasing; the smallest level is paired
    with the largest eigenvalue.
    """
    lam = np.asarray(eigvals, dtype=float).ravel()
    if lam.size and np.any(np.diff(lam) > 1e-15):
        raise PreconditionError("eigenvalues must be sorted non-increasing")
    lv = spectrum.head(lam.size)
    return float(np.dot(lv, np.minimum(lam, eps)))


def mean_energy(spectrum: EnergySpectrum, probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    return float(np.dot(spectrum.head(p.size), p))


@dataclass(frozen=True)
class OscillatorForms:
    """Closed-form quantities for the thermal oscillator state with mean ``N``."""

    N: float
    eps: float
    branch: str  # "small" when eps (N+1) < 1, else "large"
    n_eps: Optional[int]
    R_N: Optional[float]
    bound_value: float
    coarse_bound_value: float
    E_eps: float
    E_eps_tail_error: float
    E_eps_closed_form: Optional[float]


def oscillator_eigenvalues(N: float, tol: float = 1e-16) -> tuple[np.ndarray, float]:
    """Spectrum ``(1-q) q^k`` of the thermal state, cut where the energy tail is below ``tol``.

    Returns the eigenvalues and the neglected energy ``sum_{k>=K} k (1-q) q^k``.
    """
    q = N / (N + 1.0)

    def energy_tail(K):
        return q ** K * (K + q / (1.0 - q))

    K = 8
    while energy_tail(K) > tol:
        K *= 2
    k = np.arange(K, dtype=float)
    return (1.0 - q) * q ** k, energy_tail(K)


def oscillator_example_forms(N: float, eps: float) -> OscillatorForms:
    """Entropy bound for the thermal oscillator state via the max-entropy route.

    ``E_eps`` is always evaluated from its definition by direct summation.
    ``E_eps_closed_form`` reproduces the published closed-form display for
    the small-eps branch and is informational only.
    """
    N = float(N)
    eps = float(eps)
    if N <= 0:
        raise PreconditionError("N must be positive")
    if not 0 < eps <= 1:
        raise PreconditionError("eps must lie in (0, 1]")
    q = N / (N + 1.0)
    lam, tail_err = oscillator_eigenvalues(N)
    levels = EnergySpectrum.from_levels(np.arange(lam.size, dtype=float))
    e_eps = energy_eps(levels, lam, eps)
    g_n = g_fun(N)
    coarse = g_n - eps * g_fun(N / eps) - g_fun(eps)
    if eps * (N + 1.0) < 1.0:
        log_q = math.log(eps * (N + 1.0)) / math.log(q)
        n_eps = int(math.floor(log_q)) + 1
        a_n = log_q + 1.0
        r_n = a_n ** 2 / 2.0 + (N + 1.0) ** 2 * (a_n + N)
        closed = (eps * n_eps * (n_eps - 1) / 2.0 + q ** n_eps * n_eps / (1.0 - q)
                  + q ** (n_eps + 1) / (1.0 - q) ** 2)
        bound = g_n - eps * g_fun(r_n) - g_fun(eps)
        return OscillatorForms(N, eps, "small", n_eps, r_n, bound, coarse,
                               e_eps, tail_err, closed)
    return OscillatorForms(N, eps, "large", None, None, coarse, coarse,
                           e_eps, tail_err, None)

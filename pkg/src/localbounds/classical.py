"""Discrete distributions, their entropic functionals and local lower bounds.

Arrays are 1- or 2-variate. Subnormalized arrays (total mass below one) show
up as the pieces of a clipped distribution; every functional is extended to
them homogeneously, ``f~(p) = |p| f(p / |p|)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corefun import (
    AFFINE_PROFILE,
    CONDITIONAL_ENTROPY_PROFILE,
    DIVERGENCE_PROFILE,
    ENTROPY_PROFILE,
    MUTUAL_INFORMATION_PROFILE,
    _check_eps,
    eta,
    g_fun,
    h2,
    h2_tilde,
    laa_corrections,
)
from .errors import InvalidStateError, PreconditionError, SupportError
from .gibbs import EnergySpectrum, F_lambda, energy_eps
from .reports import BoundReport, make_report

log = logging.getLogger(__name__)

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProbArray:
    """Nonnegative 1- or 2-variate array with total mass at most one.

    ``tail_mass`` records probability that was cut off when an infinite
    distribution was truncated; it counts towards normalization.
    """

    entries: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim not in (1, 2) or a.size == 0:
            raise InvalidStateError(f"expected a nonempty 1- or 2-variate array, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise InvalidStateError("entries must be finite and nonnegative")
        if a.sum() + self.tail_mass > 1.0 + MASS_TOL:
            raise InvalidStateError(f"total mass {a.sum() + self.tail_mass!r} exceeds 1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "_mass", float(math.fsum(a.ravel())))

    @property
    def mass(self) -> float:
        return self._mass

    @property
    def shape(self) -> tuple:
        return self.entries.shape

    @property
    def ndim(self) -> int:
        return self.entries.ndim

    @property
    def is_distribution(self) -> bool:
        return abs(self.mass + self.tail_mass - 1.0) <= MASS_TOL

    def support_size(self) -> int:
        return int(np.count_nonzero(self.entries))

    def marginal(self, k: int) -> "ProbArray":
        """Marginal of ``X_k`` (``k=1`` sums out columns, ``k=2`` sums out rows)."""
        if self.ndim != 2:
            raise PreconditionError("marginals are defined for 2-variate arrays")
        if k not in (1, 2):
            raise ValueError("k must be 1 or 2")
        return ProbArray(self.entries.sum(axis=2 - k))

    def __repr__(self):
        return f"ProbArray(shape={self.shape}, mass={self.mass:.12g})"


@dataclass(frozen=True)
class ClipPair:
    """Split ``p = low + high`` with ``low = min(p, eps)`` and ``high = max(p - eps, 0)``."""

    low: ProbArray
    high: ProbArray
    r_eps: float


def as_prob(p) -> ProbArray:
    return p if isinstance(p, ProbArray) else ProbArray(np.asarray(p, dtype=float))


def _require_distribution(p: ProbArray, name: str = "p"):
    if not p.is_distribution:
        raise PreconditionError(f"{name} must be a probability distribution (mass {p.mass!r})")


def tv_distance(p, q) -> float:
    """Total variation distance ``1/2 sum |p - q|``."""
    p, q = as_prob(p), as_prob(q)
    if p.shape != q.shape:
        raise PreconditionError(f"shape mismatch {p.shape} vs {q.shape}")
    return 0.5 * math.fsum(np.abs(p.entries - q.entries).ravel())


def clip(p, eps: float) -> ClipPair:
    p = as_prob(p)
    eps = _check_eps(eps)
    low = np.minimum(p.entries, eps)
    high = np.maximum(p.entries - eps, 0.0)
    high_arr = ProbArray(high)
    return ClipPair(ProbArray(low), high_arr, high_arr.mass)


# ---------------------------------------------------------------- functionals

def shannon_entropy_ext(p) -> float:
    """Homogeneously extended Shannon entropy ``sum eta(p_i) - eta(|p|)``."""
    p = as_prob(p)
    m = p.mass
    if m == 0.0:
        return 0.0
    nz = p.entries[p.entries > 0]
    return math.fsum(eta(nz)) - eta(m)


def equivocation(p) -> float:
    """Conditional entropy ``H(X1|X2) = sum p_ij ln(p2_j / p_ij)``, extended to mass < 1."""
    p = as_prob(p)
    if p.ndim != 2:
        raise PreconditionError("equivocation needs a 2-variate array")
    a = p.entries
    col = a.sum(axis=0)
    mask = a > 0
    ratio = np.broadcast_to(col, a.shape)[mask] / a[mask]
    return max(0.0, math.fsum(a[mask] * np.log(ratio)))


def kl_divergence(p, q) -> float:
    """``D_KL(p || q)``; ``p`` may be subnormalized (homogeneous extension)."""
    p, q = as_prob(p), as_prob(q)
    if p.shape != q.shape:
        raise PreconditionError(f"shape mismatch {p.shape} vs {q.shape}")
    m = p.mass
    if m == 0.0:
        return 0.0
    pe, qe = p.entries.ravel(), q.entries.ravel()
    mask = pe > 0
    if np.any(qe[mask] == 0):
        return math.inf
    return math.fsum(pe[mask] * np.log(pe[mask] / (m * qe[mask])))


def mutual_information(p) -> float:
    """``I(X1:X2) = D_KL(p || p1 x p2)``, extended to mass < 1."""
    p = as_prob(p)
    if p.ndim != 2:
        raise PreconditionError("mutual information needs a 2-variate array")
    a = p.entries
    m = p.mass
    if m == 0.0:
        return 0.0
    rows, cols = a.sum(axis=1), a.sum(axis=0)
    mask = a > 0
    prod = np.outer(rows, cols)[mask]
    return max(0.0, math.fsum(a[mask] * np.log(a[mask] * m / prod)))


def _energy_levels(spectrum, n: int) -> np.ndarray:
    if isinstance(spectrum, EnergySpectrum):
        return spectrum.head(n)
    lv = np.asarray(spectrum, dtype=float).ravel()
    if lv.size < n or np.any(lv[:n] < 0):
        raise PreconditionError("need at least one nonnegative energy per outcome")
    return lv[:n]


def _require_ground_zero(spectrum: EnergySpectrum):
    if spectrum.ground != 0.0:
        raise PreconditionError("energy bounds need a spectrum with E_0 = 0")


def _eps_F(spectrum: EnergySpectrum, energy: float, eps: float) -> tuple[float, float]:
    value, tail = F_lambda(spectrum, energy / eps, with_error=True)
    return eps * value, eps * tail


# ------------------------------------------------------------------- bounds

def _lemma_b_terms(f_cut: float, r_eps: float, profile, eps: float, prefix: str = "f_cut") -> dict:
    d_f, a_tilde = laa_corrections(profile, eps)
    terms = {prefix: f_cut, "-D_f": -d_f}
    if profile.a_coeff:
        terms["-a_tilde"] = -a_tilde
        terms["-a_f(1-r)"] = -profile.a_f(min(max(1.0 - r_eps, 0.0), 1.0))
    return terms


def _lemma_a_terms(f_center: float, f_clip: float, profile, eps: float) -> dict:
    d_f, a_tilde = laa_corrections(profile, eps)
    terms = {"f_center": f_center, "-f_clip": -f_clip, "-D_f": -d_f}
    if profile.a_coeff:
        terms["-a_tilde"] = -a_tilde
    return terms


def entropy_lower_bound(p, eps: float) -> BoundReport:
    """Universal bound ``H([p - eps]_+) - g(eps)`` on the minimal entropy in the TV ball."""
    p = as_prob(p)
    eps = _check_eps(eps)
    if p.ndim != 1:
        raise PreconditionError("entropy bounds take a 1-variate distribution")
    _require_distribution(p)
    cp = clip(p, eps)
    aux = {"r_eps": cp.r_eps, "support_cut": cp.high.support_size()}
    note = ""
    if p.tail_mass > eps:
        # omitted atoms could exceed eps; dropping them only lowers the bound
        aux["tail_mass"] = p.tail_mass
        note = "truncated input: bound is conservative"
    return make_report("B-lb-3+c", eps, _lemma_b_terms(shannon_entropy_ext(cp.high), cp.r_eps,
                                                        ENTROPY_PROFILE, eps),
                       aux=aux, note=note)


def entropy_lower_bounds(p, eps: float, *, spectrum: Optional[EnergySpectrum] = None,
                         energy: Optional[float] = None) -> list[BoundReport]:
    """All entropy bounds for a finite distribution.

    Besides the universal bound this emits the clipped-remainder form, the
    support-size bound (when ``eps <= 1 - 1/|p|``) and, given a spectrum with
    ``E_0 = 0`` paired to the entries sorted non-increasing, the max-entropy
    form.
    """
    p = as_prob(p)
    eps = _check_eps(eps)
    out = [entropy_lower_bound(p, eps)]
    h = shannon_entropy_ext(p)
    cp = clip(p, eps)
    out.append(make_report("B-lb-3++c", eps,
                           _lemma_a_terms(h, shannon_entropy_ext(cp.low), ENTROPY_PROFILE, eps),
                           aux={"r_eps": cp.r_eps}))
    rank = p.support_size()
    if rank >= 2 and eps <= 1.0 - 1.0 / rank:
        out.append(make_report("B-lb-1c", eps, {
            "f_center": h, "-eps*ln(rank-1)": -eps * math.log(rank - 1), "-h2(eps)": -h2(eps)},
            aux={"rank": rank}))
    else:
        log.debug("B-lb-1c omitted: needs eps <= 1 - 1/rank (rank=%d)", rank)
    if spectrum is not None:
        lam = np.sort(p.entries.ravel())[::-1]
        out.append(_max_entropy_report("B-lb-2+c", h, lam, spectrum, energy, eps))
    return out


def _max_entropy_report(bound_id: str, f_center: float, lam: np.ndarray,
                        spectrum: EnergySpectrum, energy: Optional[float], eps: float,
                        target: str = "L") -> BoundReport:
    _require_ground_zero(spectrum)
    total = float(np.dot(spectrum.head(lam.size), lam))
    if energy is not None and total > energy * (1 + 1e-12):
        raise PreconditionError(f"mean energy {total!r} exceeds the bound E={energy!r}")
    e_eps = energy_eps(spectrum, lam, eps)
    eps_f, tail = _eps_F(spectrum, e_eps, eps)
    return make_report(bound_id, eps, {
        "f_center": f_center, "-eps*F(E_eps/eps)": -eps_f, "-g(eps)": -g_fun(eps)},
        aux={"E": total, "E_eps": e_eps, "F_value": eps_f / eps, "tail_error": tail},
        target=target)


def affine_functional_lower_bound(p, spectrum, eps: float) -> BoundReport:
    """``sum_{p_i > eps} E_i (p_i - eps)`` for the mean of a nonnegative sequence."""
    p = as_prob(p)
    eps = _check_eps(eps)
    if p.ndim != 1:
        raise PreconditionError("affine functionals take a 1-variate distribution")
    _require_distribution(p)
    levels = _energy_levels(spectrum, p.shape[0])
    cp = clip(p, eps)
    f_cut = float(np.dot(levels, cp.high.entries))
    return make_report("H-LB+c", eps, _lemma_b_terms(f_cut, cp.r_eps, AFFINE_PROFILE, eps),
                       aux={"r_eps": cp.r_eps})


def equivocation_lower_bounds(p, eps: float, *, support_size: Optional[int] = None,
                              energy: Optional[tuple] = None) -> list[BoundReport]:
    """Lower bounds on the minimal conditional entropy ``H(X1|X2)`` in the TV ball.

    Args:
        support_size: override for ``|p_1|``; defaults to the number of
            nonzero entries of the ``X1`` marginal.
        energy: optional ``(EnergySpectrum, E)`` with ``sum E_i [p_1]_i <= E``.
    """
    p = as_prob(p)
    eps = _check_eps(eps)
    if p.ndim != 2:
        raise PreconditionError("equivocation bounds take a 2-variate distribution")
    _require_distribution(p)
    h = equivocation(p)
    g = g_fun(eps)
    cp = clip(p, eps)
    out = []
    n1 = support_size if support_size is not None else p.marginal(1).support_size()
    out.append(make_report("CE-LB-c-1", eps, {
        "f_center": h, "-eps*ln|p1|": -eps * math.log(n1), "-g(eps)": -g},
        aux={"support_size": n1}))
    if energy is not None:
        spectrum, e_bound = energy
        _require_ground_zero(spectrum)
        p1 = p.marginal(1).entries
        mean = float(np.dot(spectrum.head(p1.size), p1))
        if mean > e_bound * (1 + 1e-12):
            raise PreconditionError(f"marginal mean energy {mean!r} exceeds E={e_bound!r}")
        eps_f, tail = _eps_F(spectrum, e_bound, eps)
        out.append(make_report("CE-LB-c-2", eps, {
            "f_center": h, "-eps*F(E/eps)": -eps_f, "-g(eps)": -g},
            aux={"E": e_bound, "F_value": eps_f / eps, "tail_error": tail}))
    out.append(make_report("CE-LB++c", eps,
                           _lemma_b_terms(equivocation(cp.high), cp.r_eps,
                                          CONDITIONAL_ENTROPY_PROFILE, eps),
                           aux={"r_eps": cp.r_eps}))
    out.append(make_report("CE-LB+c", eps,
                           _lemma_a_terms(h, equivocation(cp.low), CONDITIONAL_ENTROPY_PROFILE, eps),
                           aux={"r_eps": cp.r_eps}))
    return out


def _check_support(p: ProbArray, q: ProbArray):
    if np.any((p.entries > 0) & (q.entries == 0)):
        raise SupportError("relative entropy is +inf on a neighborhood: supp p is not inside supp q")


def kl_lower_bounds(p, q, eps: float, d: Optional[int] = None) -> list[BoundReport]:
    """Lower bounds on the minimal ``D_KL(. || q)`` over the TV ball around ``p``.

    With ``d`` the support-restricted bound is added; it bounds the infimum
    over distributions with at most ``d`` atoms (target ``L^d``).

    Raises:
        SupportError: if ``supp p`` is not inside ``supp q``.
    """
    p, q = as_prob(p), as_prob(q)
    eps = _check_eps(eps)
    if p.ndim != 1 or p.shape != q.shape:
        raise PreconditionError("KL bounds take two 1-variate arrays of equal length")
    _require_distribution(p)
    _require_distribution(q, "q")
    _check_support(p, q)
    cp = clip(p, eps)
    out = [make_report("KLD-LB+", eps,
                       _lemma_b_terms(kl_divergence(cp.high, q), cp.r_eps, DIVERGENCE_PROFILE, eps),
                       aux={"c_eps": cp.r_eps})]
    if d is not None:
        d = int(d)
        if d < 2:
            raise PreconditionError("d must be at least 2")
        if eps <= 1.0 - 1.0 / d:
            hi = cp.high.entries
            mask = hi > 0
            cross = math.fsum(-np.log(q.entries[mask]) * hi[mask])
            out.append(make_report("KLD-LB+d", eps, {
                "cross_cut": cross, "-H(p)": -shannon_entropy_ext(p),
                "-eps*ln(d-1)": -eps * math.log(d - 1), "-h2(eps)": -h2(eps)},
                aux={"d": d}, target="L^d"))
        else:
            log.debug("KLD-LB+d omitted: eps > 1 - 1/d")
    return out


def mi_lower_bounds(p, eps: float, *, support: Optional[int] = None,
                    energy: Optional[tuple] = None) -> list[BoundReport]:
    """Lower bounds on the minimal mutual information over the TV ball.

    Args:
        support: override for ``min(|p_1|, |p_2|)``.
        energy: optional ``(EnergySpectrum, E, axis)``; ``axis`` is 1 or 2
            and names the marginal obeying ``sum E_i [p_axis]_i <= E``.
    """
    p = as_prob(p)
    eps = _check_eps(eps)
    if p.ndim != 2:
        raise PreconditionError("mutual information bounds take a 2-variate distribution")
    _require_distribution(p)
    mi = mutual_information(p)
    two_g = 2.0 * g_fun(eps)
    cp = clip(p, eps)
    out = []
    n = support if support is not None else min(p.marginal(1).support_size(),
                                                p.marginal(2).support_size())
    out.append(make_report("I-LB-c-1", eps, {
        "f_center": mi, "-eps*ln(min support)": -eps * math.log(n), "-2g(eps)": -two_g},
        aux={"support_size": n}))
    if energy is not None:
        spectrum, e_bound, axis = energy
        _require_ground_zero(spectrum)
        marg = p.marginal(axis).entries
        mean = float(np.dot(spectrum.head(marg.size), marg))
        if mean > e_bound * (1 + 1e-12):
            raise PreconditionError(f"marginal mean energy {mean!r} exceeds E={e_bound!r}")
        eps_f, tail = _eps_F(spectrum, e_bound, eps)
        out.append(make_report("I-LB-c-2", eps, {
            "f_center": mi, "-eps*F(E/eps)": -eps_f, "-2g(eps)": -two_g},
            aux={"E": e_bound, "axis": axis, "F_value": eps_f / eps, "tail_error": tail}))
    out.append(make_report("I-LB++", eps,
                           _lemma_b_terms(mutual_information(cp.high), cp.r_eps,
                                          MUTUAL_INFORMATION_PROFILE, eps),
                           aux={"r_eps": cp.r_eps}))
    out.append(make_report("I-LB+", eps,
                           _lemma_a_terms(mi, mutual_information(cp.low),
                                          MUTUAL_INFORMATION_PROFILE, eps),
                           aux={"r_eps": cp.r_eps}))
    return out


# ------------------------------------------------------- heavy-tailed example

def heavy_tail_distribution(n_terms: int = 10 ** 6) -> tuple[ProbArray, float]:
    """Distribution ``1 / (c k ln^2 k)``, ``k >= 5``, cut after ``n_terms`` atoms.

    The normalizer ``c`` adds the integral estimate of the neglected sum; the
    returned array records the neglected probability as ``tail_mass``.
    Returns ``(array, c)``.
    """
    k = np.arange(5, 5 + int(n_terms), dtype=float)
    w = 1.0 / (k * np.log(k) ** 2)
    last = 5 + int(n_terms)
    # sum_{k >= last} 1/(k ln^2 k) ~ integral from last - 1/2 (midpoint rule)
    tail = 1.0 / math.log(last - 0.5)
    c = math.fsum(w) + tail
    probs = w / c
    return ProbArray(probs, tail_mass=max(0.0, 1.0 - math.fsum(probs))), c


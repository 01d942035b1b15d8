"""Finite-dimensional density operators and quantum local lower bounds.

Operators are dense complex Hermitian matrices with trace at most one.
Spectral quantities are cached on first use; eigenvalues are kept in
non-increasing order throughout, which is the pairing convention of every
bound below.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .corefun import (
    AFFINE_PROFILE,
    CONDITIONAL_ENTROPY_PROFILE,
    DIVERGENCE_PROFILE,
    ENTROPY_PROFILE,
    _check_eps,
    eta,
    g_fun,
    h2,
    h2_tilde,
    laa_corrections,
)
from .errors import InvalidStateError, PreconditionError, SupportError
from .gibbs import EnergySpectrum, F_H, energy_eps
from .reports import BoundReport, make_report

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
NEG_EIG_TOL = 1e-10
TRACE_TOL = 1e-10
RANK_TOL = 1e-12
# eigenvalues of omega at or below this are treated as its kernel
KERNEL_TOL = 1e-14
SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian PSD matrix with trace at most one (a state or a clipped piece)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise InvalidStateError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        vals = self.eigvals_raw
        if vals.size and vals.min() < -NEG_EIG_TOL:
            raise InvalidStateError(f"matrix is not positive semidefinite (eigenvalue {vals.min():.3g})")
        if self.trace > 1.0 + TRACE_TOL:
            raise InvalidStateError(f"trace {self.trace!r} exceeds 1")

    @classmethod
    def from_spectrum(cls, values, basis: Optional[np.ndarray] = None) -> "DensityOperator":
        """``V diag(values) V^dagger``; the standard basis when ``basis`` is None."""
        v = np.asarray(values, dtype=float).ravel()
        if basis is None:
            return cls(np.diag(v).astype(complex))
        b = np.asarray(basis, dtype=complex)
        return cls((b * v) @ b.conj().T)

    @cached_property
    def _eigh(self):
        # the matrix is immutable; a racing recomputation yields the same result
        w, v = np.linalg.eigh(self.matrix)
        order = np.argsort(w, kind="stable")[::-1]
        return w[order], v[:, order]

    @property
    def eigvals_raw(self) -> np.ndarray:
        return self._eigh[0]

    @cached_property
    def eigvals(self) -> np.ndarray:
        """Eigenvalues in non-increasing order, tiny negatives clamped to zero."""
        out = np.maximum(self._eigh[0], 0.0)
        out.setflags(write=False)
        return out

    @property
    def eigvecs(self) -> np.ndarray:
        """Orthonormal eigenvectors as columns, matching :attr:`eigvals`."""
        return self._eigh[1]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def trace(self) -> float:
        return float(math.fsum(np.maximum(self._eigh[0], 0.0)))

    def rank(self, tol: float = RANK_TOL) -> int:
        return int(np.count_nonzero(self.eigvals > tol))

    def diagonal_in(self, basis: Optional[np.ndarray] = None) -> np.ndarray:
        """``<tau_k| rho |tau_k>`` for the columns ``tau_k`` of ``basis``."""
        if basis is None:
            return np.real(np.diag(self.matrix)).copy()
        b = np.asarray(basis, dtype=complex)
        return np.real(np.einsum("ik,ij,jk->k", b.conj(), self.matrix, b))

    def __add__(self, other: "DensityOperator") -> "DensityOperator":
        return DensityOperator(self.matrix + other.matrix)

    def __repr__(self):
        return f"DensityOperator(dim={self.dim}, trace={self.trace:.12g})"


@dataclass(frozen=True)
class OperatorClipPair:
    """``rho = low + high`` with ``low = rho ^ eps I`` and ``high = [rho - eps I]_+``."""

    low: DensityOperator
    high: DensityOperator
    r_eps: float


class QCEnsemble:
    """Ensemble ``{p_k, rho_k}`` encoding the q-c state ``sum p_k rho_k (x) |k><k|``."""

    def __init__(self, weights, states: Sequence[DensityOperator]):
        w = np.asarray(weights, dtype=float).ravel()
        states = [as_density(s) for s in states]
        if w.size != len(states) or w.size == 0:
            raise PreconditionError("need one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise PreconditionError("weights must form a probability vector")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise PreconditionError("all ensemble states must share one dimension")
        for s in states:
            if abs(s.trace - 1.0) > 1e-10:
                raise InvalidStateError("every ensemble member must have unit trace")
        self.weights = w
        self.states = tuple(states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self):
        return len(self.states)

    def blocks(self) -> list[DensityOperator]:
        return [DensityOperator(p * s.matrix) for p, s in zip(self.weights, self.states)]

    def average_state(self) -> DensityOperator:
        return DensityOperator(sum(p * s.matrix for p, s in zip(self.weights, self.states)))

    @classmethod
    def from_blocks(cls, blocks) -> "QCEnsemble":
        mats = [np.asarray(b.matrix if isinstance(b, DensityOperator) else b, dtype=complex)
                for b in blocks]
        traces = np.array([np.real(np.trace(m)) for m in mats])
        traces = np.maximum(traces, 0.0)
        w = traces / traces.sum()
        d = mats[0].shape[0]
        states = [DensityOperator(m / t) if t > 0 else DensityOperator(np.eye(d) / d)
                  for m, t in zip(mats, traces)]
        return cls(w, states)


def as_density(x) -> DensityOperator:
    return x if isinstance(x, DensityOperator) else DensityOperator(np.asarray(x))


def embed(p) -> DensityOperator:
    """Diagonal operator carrying the (flattened) entries of a classical array."""
    entries = p.entries if hasattr(p, "entries") else np.asarray(p, dtype=float)
    return DensityOperator.from_spectrum(np.ravel(entries))


def _same_dim(a: DensityOperator, b: DensityOperator):
    if a.dim != b.dim:
        raise PreconditionError(f"dimension mismatch {a.dim} vs {b.dim}")


def trace_norm(a: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def trace_distance(rho, sigma) -> float:
    """``1/2 ||rho - sigma||_1``."""
    rho, sigma = as_density(rho), as_density(sigma)
    _same_dim(rho, sigma)
    return 0.5 * trace_norm(rho.matrix - sigma.matrix)


def von_neumann_entropy_ext(rho) -> float:
    """``Tr eta(rho) - eta(Tr rho)``; the plain entropy at unit trace, 0 at zero."""
    rho = as_density(rho)
    lam = rho.eigvals
    t = math.fsum(lam)
    if t == 0.0:
        return 0.0
    return math.fsum(eta(lam[lam > 0])) - eta(t)


def operator_clip(rho, eps: float) -> OperatorClipPair:
    rho = as_density(rho)
    eps = _check_eps(eps)
    lam, vec = rho.eigvals, rho.eigvecs
    low = DensityOperator.from_spectrum(np.minimum(lam, eps), vec)
    hi_vals = np.maximum(lam - eps, 0.0)
    high = DensityOperator.from_spectrum(hi_vals, vec)
    return OperatorClipPair(low, high, math.fsum(hi_vals))


def _ext_entropy_of_values(vals: np.ndarray) -> float:
    t = math.fsum(vals)
    if t == 0.0:
        return 0.0
    return math.fsum(eta(vals[vals > 0])) - eta(t)


def _require_state(rho: DensityOperator, name: str = "rho"):
    if abs(rho.trace - 1.0) > TRACE_TOL:
        raise PreconditionError(f"{name} must have unit trace (got {rho.trace!r})")


def _require_ground_zero(spectrum: EnergySpectrum):
    if spectrum.ground != 0.0:
        raise PreconditionError("energy bounds need a spectrum with E_0 = 0")


# ------------------------------------------------------------------ entropy

def entropy_lower_bounds(rho, eps: float, *, spectrum: Optional[EnergySpectrum] = None,
                         energy: Optional[float] = None,
                         finite_rank: bool = True) -> list[BoundReport]:
    """Lower bounds on the minimal von Neumann entropy in the trace-norm ball.

    Emits the universal clipped bound, the center-minus-clip bound, the rank
    bound (finite rank and ``eps <= 1 - 1/rank``) and, when ``spectrum`` is
    given, the max-entropy bound with the levels paired to the eigenvalues
    sorted non-increasing.
    """
    rho = as_density(rho)
    eps = _check_eps(eps)
    _require_state(rho)
    lam = rho.eigvals
    g = g_fun(eps)
    s_rho = _ext_entropy_of_values(lam)
    low, high = np.minimum(lam, eps), np.maximum(lam - eps, 0.0)
    r_eps = math.fsum(high)
    d_f, _ = laa_corrections(ENTROPY_PROFILE, eps)
    out = [
        make_report("B-lb-3+", eps, {"f_cut": _ext_entropy_of_values(high), "-D_f": -d_f},
                    aux={"r_eps": r_eps, "rank_cut": int(np.count_nonzero(high))}),
        make_report("B-lb-3++", eps, {"f_center": s_rho, "-f_clip": -_ext_entropy_of_values(low),
                                      "-D_f": -d_f},
                    aux={"r_eps": r_eps}),
    ]
    rank = rho.rank()
    if finite_rank and rank >= 2 and eps <= 1.0 - 1.0 / rank:
        out.append(make_report("B-lb-1", eps, {
            "f_center": s_rho, "-eps*ln(rank-1)": -eps * math.log(rank - 1), "-h2(eps)": -h2(eps)},
            aux={"rank": rank}))
    else:
        log.debug("B-lb-1 omitted: needs finite rank >= 2 and eps <= 1 - 1/rank (rank=%d)", rank)
    if spectrum is not None:
        _require_ground_zero(spectrum)
        total = float(np.dot(spectrum.head(lam.size), lam))
        if energy is not None and total > energy * (1 + 1e-12):
            raise PreconditionError(f"mean energy {total!r} exceeds the bound E={energy!r}")
        e_eps = energy_eps(spectrum, lam, eps)
        f_val, tail = F_H(spectrum, e_eps / eps, with_error=True)
        out.append(make_report("B-lb-2+", eps, {
            "f_center": s_rho, "-eps*F(E_eps/eps)": -eps * f_val, "-g(eps)": -g},
            aux={"E": total, "E_eps": e_eps, "F_value": f_val, "tail_error": eps * tail}))
    return out


class ConvIneq(NamedTuple):
    lhs: float
    rhs: float
    applicable: bool


def conv_ineq_check(rho, eps: float) -> ConvIneq:
    """Both sides of the estimate of ``S([rho - eps I]_+)`` through the large eigenvalues.

    ``applicable`` is False when ``eps |I_eps| > 1`` (then ``rhs`` is nan).
    """
    rho = as_density(rho)
    eps = float(eps)
    if not 0 < eps < rho.trace:
        raise PreconditionError("eps must lie in (0, Tr rho)")
    lam = rho.eigvals
    big = lam[lam > eps]
    n = big.size
    lhs = _ext_entropy_of_values(np.maximum(lam - eps, 0.0))
    x = eps * n
    if x > 1.0:
        return ConvIneq(lhs, math.nan, False)
    rhs = (math.fsum(eta(big)) - eta(math.fsum(big))
           - (x * math.log(n) if n else 0.0) - h2(x))
    return ConvIneq(lhs, rhs, True)


# ---------------------------------------------------------- energy functional

def energy_lower_bound(rho, spectrum, eps: float,
                       basis: Optional[np.ndarray] = None) -> BoundReport:
    """``sum_{k in I_eps} E_k (<tau_k|rho|tau_k> - eps)`` for ``H = sum E_k |tau_k><tau_k|``.

    ``basis`` holds the eigenvectors ``tau_k`` as columns (standard basis by
    default); ``I_eps`` collects the diagonal entries above ``eps``.
    """
    rho = as_density(rho)
    eps = _check_eps(eps)
    _require_state(rho)
    levels = spectrum.head(rho.dim) if isinstance(spectrum, EnergySpectrum) \
        else np.asarray(spectrum, dtype=float)[: rho.dim]
    diag = rho.diagonal_in(basis)
    cut = np.maximum(diag - eps, 0.0)
    d_f, _ = laa_corrections(AFFINE_PROFILE, eps)
    return make_report("H-LB+", eps, {"f_cut": float(np.dot(levels, cut)), "-D_f": -d_f},
                       aux={"r_eps": math.fsum(cut)})


def energy(rho, spectrum, basis: Optional[np.ndarray] = None) -> float:
    rho = as_density(rho)
    levels = spectrum.head(rho.dim) if isinstance(spectrum, EnergySpectrum) \
        else np.asarray(spectrum, dtype=float)[: rho.dim]
    return float(np.dot(levels, rho.diagonal_in(basis)))


# --------------------------------------------------------- relative entropy

def _support_ok(rho: DensityOperator, omega: DensityOperator) -> bool:
    ker = omega.eigvecs[:, omega.eigvals <= KERNEL_TOL]
    if ker.shape[1] == 0:
        return True
    overlap = np.real(np.trace(ker.conj().T @ rho.matrix @ ker))
    return overlap < SUPPORT_TOL


def _cross_term(x: DensityOperator, omega: DensityOperator) -> float:
    # Tr x (-ln omega) restricted to supp omega
    diag = x.diagonal_in(omega.eigvecs)
    lam = omega.eigvals
    keep = lam > KERNEL_TOL
    return math.fsum(-np.log(lam[keep]) * diag[keep])


def relative_entropy_ext(x, omega) -> float:
    """``Tr x (ln x - ln omega) - Tr x ln Tr x``, the homogeneous extension in ``x``."""
    x, omega = as_density(x), as_density(omega)
    _same_dim(x, omega)
    if x.trace == 0.0:
        return 0.0
    if not _support_ok(x, omega):
        return math.inf
    return _cross_term(x, omega) - von_neumann_entropy_ext(x)


def relative_entropy(rho, omega) -> float:
    """Quantum relative entropy ``D(rho || omega)``; ``+inf`` unless ``supp rho`` is inside ``supp omega``."""
    rho, omega = as_density(rho), as_density(omega)
    _same_dim(rho, omega)
    return relative_entropy_ext(rho, omega)


def relative_entropy_lower_bounds(rho, omega, eps: float, *, d: Optional[int] = None,
                                  energy: Optional[tuple] = None,
                                  variant: str = "statement") -> list[BoundReport]:
    """Lower bounds on ``inf D(sigma || omega)`` over balls around ``rho``.

    Reports are labelled by the infimum they bound:

    * ``RE-LB+D`` -- the full ball (``L``). Faithful only when ``rho`` and
      ``omega`` commute with ``omega`` diagonal in the eigenbasis of ``rho``;
      otherwise it tends to the divergence from the pinched ``omega``.
      ``variant="proof"`` subtracts ``h2(1 - r_eps)`` instead of
      ``eta(1 - r_eps)``, a weaker value by ``eta(r_eps)``.
    * ``RE-LB+A`` -- states of rank at most ``d`` (``L^d``).
    * ``RE-LB+C`` -- states commuting with ``rho`` (``L^com``).
    * ``RE-LB+B`` -- states with ``Tr H sigma <= E`` (``L^energy``); pass
      ``energy=(EnergySpectrum, E)``.

    Raises:
        SupportError: if ``supp rho`` is not inside ``supp omega``.
    """
    rho, omega = as_density(rho), as_density(omega)
    eps = _check_eps(eps)
    _require_state(rho)
    _require_state(omega, "omega")
    _same_dim(rho, omega)
    if not _support_ok(rho, omega):
        raise SupportError("relative entropy is +inf on a neighborhood: supp rho is not inside supp omega")
    if variant not in ("statement", "proof"):
        raise ValueError(f"unknown variant {variant!r}")
    lam, phi = rho.eigvals, rho.eigvecs
    g = g_fun(eps)
    ht = h2_tilde(eps)
    high = np.maximum(lam - eps, 0.0)
    r_eps = math.fsum(high)
    out = []

    # full ball, through the pinching onto the eigenbasis of rho
    w_diag = omega.diagonal_in(phi)
    idx = high > 0
    partial = math.fsum(high[idx] * (np.log(high[idx]) - np.log(w_diag[idx])))
    last = eta(1.0 - r_eps) if variant == "statement" else h2(min(1.0, max(0.0, 1.0 - r_eps)))
    w_in_phi = phi.conj().T @ omega.matrix @ phi
    off = w_in_phi - np.diag(np.diag(w_in_phi))
    faithful_d = bool(np.max(np.abs(off)) < 1e-9) if off.size else True
    out.append(make_report("RE-LB+D", eps, {
        "sum_cut": partial, "-g(eps)": -g, "-h2~(eps)": -ht,
        ("-eta(1-r)" if variant == "statement" else "-h2(1-r)"): -last},
        aux={"r_eps": r_eps}, faithful=faithful_d,
        note="" if faithful_d else "tends to D(rho || pinched omega) as eps -> 0"))

    s_rho = None
    if d is not None:
        d = int(d)
        if d < 2:
            raise PreconditionError("d must be at least 2")
        if eps <= 1.0 - 1.0 / d:
            s_rho = von_neumann_entropy_ext(rho)
            out.append(make_report("RE-LB+A", eps, {
                "cross_cut": _diag_cross(rho, omega, eps), "-S(rho)": -s_rho,
                "-eps*ln(d-1)": -eps * math.log(d - 1), "-h2(eps)": -h2(eps)},
                aux={"d": d}, target="L^d"))
        else:
            log.debug("RE-LB+A omitted: eps > 1 - 1/d")

    cut = DensityOperator.from_spectrum(high, phi)
    rd = relative_entropy_ext(cut, omega) if r_eps > 0 else 0.0
    d_f, a_tilde = laa_corrections(DIVERGENCE_PROFILE, eps)
    out.append(make_report("RE-LB+C", eps, {
        "f_cut": rd, "-D_f": -d_f, "-a_tilde": -a_tilde,
        "-a_f(1-r)": -DIVERGENCE_PROFILE.a_f(min(1.0, max(0.0, 1.0 - r_eps)))},
        aux={"r_eps": r_eps}, target="L^com"))

    if energy is not None:
        spectrum, e_bound = energy[0], float(energy[1])
        _require_ground_zero(spectrum)
        if e_bound <= 0:
            raise PreconditionError("the energy bound E must be positive")
        if s_rho is None:
            s_rho = von_neumann_entropy_ext(rho)
        f_val, tail = F_H(spectrum, e_bound / eps, with_error=True)
        out.append(make_report("RE-LB+B", eps, {
            "cross_cut": _diag_cross(rho, omega, eps), "-S(rho)": -s_rho,
            "-eps*F(E/eps)": -eps * f_val, "-g(eps)": -g},
            aux={"E": e_bound, "F_value": f_val, "tail_error": eps * tail}, target="L^energy"))
    return out


def _diag_cross(rho: DensityOperator, omega: DensityOperator, eps: float) -> float:
    # sum over J_eps of (-ln lambda_k^omega)(<psi_k|rho|psi_k> - eps)
    diag = rho.diagonal_in(omega.eigvecs)
    lam = omega.eigvals
    sel = diag > eps
    if np.any(lam[sel] <= KERNEL_TOL):
        raise SupportError("relative entropy is +inf on a neighborhood: supp rho is not inside supp omega")
    return math.fsum(-np.log(lam[sel]) * (diag[sel] - eps))


# ------------------------------------------------------ conditional entropy

def qce_blocks(blocks: Sequence[DensityOperator]) -> float:
    """Homogeneous conditional entropy of block-diagonal ``sum X_k (x) |k><k|``: ``sum_k S(X_k)``."""
    return math.fsum(von_neumann_entropy_ext(b) for b in blocks)


def qce(ensemble: QCEnsemble) -> float:
    """Conditional entropy of the q-c state, i.e. the average entropy ``sum p_k S(rho_k)``."""
    return qce_blocks(ensemble.blocks())


def ensemble_distance(a: Sequence, b: Sequence) -> float:
    """``1/2 sum_k ||A_k - B_k||_1`` between two block lists."""
    if len(a) != len(b):
        raise PreconditionError("ensembles must have the same number of blocks")
    return 0.5 * math.fsum(trace_norm(as_density(x).matrix - as_density(y).matrix)
                           for x, y in zip(a, b))


def qce_lower_bounds(ensemble: QCEnsemble, eps: float, *, rank: Optional[int] = None,
                     energy: Optional[tuple] = None) -> list[BoundReport]:
    """Lower bounds on the minimal conditional entropy over q-c states near the ensemble.

    Args:
        rank: override for ``rank rho_A``; computed from the average state
            by default.
        energy: optional ``(EnergySpectrum, E)`` or ``(EnergySpectrum, E,
            basis)`` with ``Tr H rho_A <= E``.
    """
    eps = _check_eps(eps)
    blocks = ensemble.blocks()
    g = g_fun(eps)
    d_f, _ = laa_corrections(CONDITIONAL_ENTROPY_PROFILE, eps)
    f_center = qce(ensemble)
    low_vals, high_vals = [], []
    for b in blocks:
        lam = b.eigvals
        low_vals.append(np.minimum(lam, eps))
        high_vals.append(np.maximum(lam - eps, 0.0))
    f_cut = math.fsum(_ext_entropy_of_values(v) for v in high_vals)
    f_clip = math.fsum(_ext_entropy_of_values(v) for v in low_vals)
    r_eps = math.fsum(float(v.sum()) for v in high_vals)
    out = [
        make_report("CE-LB-3+", eps, {"f_cut": f_cut, "-D_f": -d_f},
                    aux={"r_eps": r_eps}, target="L^qc"),
        make_report("CE-LB-3++", eps, {"f_center": f_center, "-f_clip": -f_clip, "-D_f": -d_f},
                    aux={"r_eps": r_eps}, target="L^qc"),
    ]
    rho_a = ensemble.average_state()
    rk = rank if rank is not None else rho_a.rank()
    out.append(make_report("CE-LB-1", eps, {
        "f_center": f_center, "-eps*ln(rank rho_A)": -eps * math.log(rk), "-g(eps)": -g},
        aux={"rank": rk}, target="L^qc"))
    if energy is not None:
        spectrum, e_bound = energy[0], float(energy[1])
        basis = energy[2] if len(energy) > 2 else None
        _require_ground_zero(spectrum)
        levels = spectrum.head(ensemble.dim)
        e_total = float(np.dot(levels, rho_a.diagonal_in(basis)))
        if e_total > e_bound * (1 + 1e-12):
            raise PreconditionError(f"Tr H rho_A = {e_total!r} exceeds E={e_bound!r}")
        e_qc = 0.0
        for b, lv in zip(blocks, low_vals):
            clipped = DensityOperator.from_spectrum(lv, b.eigvecs)
            e_qc += float(np.dot(levels, clipped.diagonal_in(basis)))
        f_val, tail = F_H(spectrum, e_qc / eps, with_error=True)
        coarse_f = F_H(spectrum, e_bound / eps)
        out.append(make_report("CE-LB-2", eps, {
            "f_center": f_center, "-eps*F(E_qc/eps)": -eps * f_val, "-g(eps)": -g},
            aux={"E": e_bound, "E_qc_eps": e_qc, "F_value": f_val, "tail_error": eps * tail,
                 "coarse_value": f_center - eps * coarse_f - g},
            target="L^qc"))
    return out


# ---------------------------------------------------------------- utilities

def mirsky_gap(a, b) -> tuple[float, float]:
    """``(sum_i |lambda_i(a) - lambda_i(b)|, ||a - b||_1)`` for Hermitian ``a``, ``b``.

    Both spectra are sorted the same way; accepts density operators or
    plain Hermitian matrices.
    """
    a = a.matrix if isinstance(a, DensityOperator) else np.asarray(a)
    b = b.matrix if isinstance(b, DensityOperator) else np.asarray(b)
    if a.shape != b.shape:
        raise PreconditionError(f"shape mismatch {a.shape} vs {b.shape}")
    lhs = math.fsum(np.abs(np.linalg.eigvalsh(a) - np.linalg.eigvalsh(b)))
    return lhs, trace_norm(a - b)


def pinch(rho, basis: Optional[np.ndarray] = None) -> DensityOperator:
    """Dephase ``rho`` in ``basis`` (standard basis by default)."""
    rho = as_density(rho)
    return DensityOperator.from_spectrum(rho.diagonal_in(basis), basis)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Ginibre-distributed state of the given rank (full rank by default)."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ g.conj().T
    return DensityOperator(m / np.real(np.trace(m)))

"""Brute-force search over epsilon-balls.

Any feasible point gives an upper estimate of the infimum of a functional
over the ball, so the values found here can refute a claimed lower bound
but never certify one is tight. Entropy (and energy around a center that
commutes with the Hamiltonian) are minimized exactly by greedy transport;
everything else uses structured candidates, random restarts and a
stochastic local search that only accepts feasible improving moves.

Points are raw arrays: a probability array, a density matrix, or a tuple of
blocks ``p_k rho_k`` for an ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .classical import ProbArray, as_prob
from .errors import PreconditionError
from .gibbs import EnergySpectrum
from .quantum import DensityOperator, QCEnsemble
from .reports import BoundReport

FEAS_TOL = 1e-9
CONSTRAINTS = ("none", "commuting", "rank", "energy", "ensemble")
TARGET_FOR_CONSTRAINT = {"none": "L", "commuting": "L^com", "rank": "L^d",
                         "energy": "L^energy", "ensemble": "L^qc"}


# ------------------------------------------------------------ point algebra

def _axpy(c, x, t):
    """``c + t (x - c)`` for arrays or block tuples."""
    if isinstance(c, tuple):
        return tuple(ci + t * (xi - ci) for ci, xi in zip(c, x))
    return c + t * (x - c)


def _trace_norm(a) -> float:
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def _hermitian_eigh(x):
    return np.linalg.eigh(0.5 * (x + x.conj().T))


def _psd_ok(x) -> bool:
    return bool(np.linalg.eigvalsh(0.5 * (x + x.conj().T)).min() >= -1e-10)


# ---------------------------------------------------------------- ball spec

@dataclass(frozen=True, eq=False)
class BallSpec:
    """An epsilon-ball around ``center``, optionally cut by a constraint.

    ``constraint`` is one of ``none``, ``commuting`` (with the center),
    ``rank`` (rank or support at most ``d``), ``energy`` (mean energy at most
    ``E`` for ``spectrum`` in ``basis``) and ``ensemble`` (q-c states around
    an ensemble center; selected automatically for ensembles).
    """

    center: object
    eps: float
    constraint: str = "none"
    d: Optional[int] = None
    spectrum: Optional[EnergySpectrum] = None
    E: Optional[float] = None
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        center = self.center
        if isinstance(center, QCEnsemble):
            kind = "ensemble"
            raw = tuple(b.matrix for b in center.blocks())
            if self.constraint == "none":
                object.__setattr__(self, "constraint", "ensemble")
        elif isinstance(center, DensityOperator):
            kind = "quantum"
            raw = center.matrix
        else:
            center = as_prob(center)
            object.__setattr__(self, "center", center)
            kind = "classical"
            raw = np.array(center.entries)
        eps = float(self.eps)
        if not 0 < eps <= 1:
            raise PreconditionError(f"eps must lie in (0, 1], got {eps!r}")
        object.__setattr__(self, "eps", eps)
        c = self.constraint
        if c not in CONSTRAINTS:
            raise PreconditionError(f"unknown constraint {c!r}")
        if (kind == "ensemble") != (c == "ensemble"):
            raise PreconditionError("the ensemble constraint goes with ensemble centers only")
        if c == "commuting" and kind != "quantum":
            raise PreconditionError("the commuting constraint needs a quantum center")
        if c == "rank":
            if self.d is None or int(self.d) < 1:
                raise PreconditionError("the rank constraint needs d >= 1")
            object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "_kind", kind)
        object.__setattr__(self, "_raw", raw)
        if c == "energy":
            if self.spectrum is None or self.E is None:
                raise PreconditionError("the energy constraint needs a spectrum and E")
            if self.spectrum.ground != 0.0:
                raise PreconditionError("the energy constraint needs E_0 = 0")
            if kind == "classical" and center.ndim != 1:
                raise PreconditionError("classical energy constraints need a 1-variate center")
            if self.energy_of(raw) > float(self.E) + FEAS_TOL:
                raise PreconditionError("the center violates the energy constraint")

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def raw_center(self):
        return self._raw

    @property
    def dim(self) -> int:
        if self.kind == "classical":
            return int(self._raw.size)
        if self.kind == "quantum":
            return int(self._raw.shape[0])
        return int(self._raw[0].shape[0])

    def distance(self, x) -> float:
        c = self._raw
        if self.kind == "classical":
            return 0.5 * math.fsum(np.abs(np.asarray(x) - c).ravel())
        if self.kind == "quantum":
            return 0.5 * _trace_norm(x - c)
        return 0.5 * math.fsum(_trace_norm(a - b) for a, b in zip(x, c))

    def energy_of(self, x) -> float:
        levels = self.spectrum.head(self.dim)
        if self.kind == "classical":
            return float(np.dot(levels, np.ravel(x)))
        return float(np.dot(levels, _diag_in(x, self.basis)))

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        """Distance at most ``eps + tol``, a valid state, and the constraint holds."""
        if not self._valid_state(x):
            return False
        if self.distance(x) > self.eps + tol:
            return False
        c = self.constraint
        if c == "commuting":
            comm = x @ self._raw - self._raw @ x
            return bool(np.linalg.norm(comm) < 1e-9)
        if c == "rank":
            return _rank(self.kind, x) <= self.d
        if c == "energy":
            return self.energy_of(x) <= float(self.E) + tol
        return True

    def _valid_state(self, x) -> bool:
        if self.kind == "classical":
            x = np.asarray(x)
            return bool(x.min() >= -1e-12 and abs(x.sum() - 1.0) <= 1e-9)
        if self.kind == "quantum":
            return _psd_ok(x) and abs(np.real(np.trace(x)) - 1.0) <= 1e-9
        return (all(_psd_ok(b) for b in x)
                and abs(sum(np.real(np.trace(b)) for b in x) - 1.0) <= 1e-9)


def _rank(kind: str, x) -> int:
    if kind == "classical":
        return int(np.count_nonzero(np.asarray(x) > 1e-9))
    return int(np.count_nonzero(np.linalg.eigvalsh(0.5 * (x + x.conj().T)) > 1e-9))


def _diag_in(x, basis) -> np.ndarray:
    if basis is None:
        return np.real(np.diag(x))
    b = np.asarray(basis, dtype=complex)
    return np.real(np.einsum("ik,ij,jk->k", b.conj(), x, b))


@dataclass(frozen=True)
class OracleResult:
    min_value: float
    argmin: object
    samples_used: int
    method: str
    seed: int
    converged: bool = True


# ------------------------------------------------------------- functionals

@dataclass(frozen=True)
class Functional:
    """A functional evaluated on raw points of one kind."""

    name: str
    kind: str
    evaluate: Callable
    ref: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return self.evaluate(x)


def _eta_sum(v) -> float:
    v = v[v > 0]
    return float(-np.dot(v, np.log(v)))


def _spectrum_entropy_ext(x) -> float:
    lam = np.maximum(np.linalg.eigvalsh(0.5 * (x + x.conj().T)), 0.0)
    t = lam.sum()
    if t <= 0:
        return 0.0
    return _eta_sum(lam) + t * math.log(t)


def functional_for(name: str, kind: str = "classical", *, q=None, omega=None,
                   spectrum: Optional[EnergySpectrum] = None, basis=None) -> Functional:
    """Build a raw-point evaluator.

    ``name`` is one of ``entropy``, ``equivocation``, ``mi``, ``kl`` (needs
    ``q``), ``energy`` (needs ``spectrum``), ``relative_entropy`` (needs
    ``omega``) or ``qce``. These are written independently of the bound
    modules so the oracle does not share code with what it checks.
    """
    ref = {"q": q, "omega": omega, "spectrum": spectrum, "basis": basis}
    f = _build_functional(name, kind, q, omega, spectrum, basis)
    return Functional(f.name, f.kind, f.evaluate, {k: v for k, v in ref.items() if v is not None})


def _build_functional(name, kind, q, omega, spectrum, basis) -> Functional:
    if name == "entropy":
        if kind == "classical":
            return Functional(name, kind, lambda x: _eta_sum(np.ravel(x)))
        if kind == "quantum":
            return Functional(name, kind, _spectrum_entropy_ext)
    elif name == "equivocation":
        def cond(x):
            col = x.sum(axis=0)
            m = x > 0
            return float(np.sum(x[m] * np.log(np.broadcast_to(col, x.shape)[m] / x[m])))
        return Functional(name, "classical", cond)
    elif name == "mi":
        def mi(x):
            prod = np.outer(x.sum(axis=1), x.sum(axis=0))
            m = x > 0
            return float(np.sum(x[m] * np.log(x[m] / prod[m])))
        return Functional(name, "classical", mi)
    elif name == "kl":
        if q is None:
            raise PreconditionError("the kl functional needs q")
        qv = np.ravel(as_prob(q).entries)

        def kl(x):
            x = np.ravel(x)
            m = x > 0
            if np.any(qv[m] == 0):
                return math.inf
            return float(np.sum(x[m] * np.log(x[m] / qv[m])))
        return Functional(name, "classical", kl)
    elif name == "energy":
        if spectrum is None:
            raise PreconditionError("the energy functional needs a spectrum")
        if kind == "classical":
            return Functional(name, kind,
                              lambda x: float(np.dot(spectrum.head(np.size(x)), np.ravel(x))))
        if kind == "quantum":
            return Functional(name, kind,
                              lambda x: float(np.dot(spectrum.head(x.shape[0]), _diag_in(x, basis))))
    elif name == "relative_entropy":
        if omega is None:
            raise PreconditionError("the relative entropy functional needs omega")
        w_mat = omega.matrix if isinstance(omega, DensityOperator) else np.asarray(omega)
        lam_w, vec_w = _hermitian_eigh(w_mat)
        ker = lam_w <= 1e-14
        neg_log = np.where(ker, 0.0, -np.log(np.where(ker, 1.0, lam_w)))

        def rel(x):
            diag = np.real(np.einsum("ik,ij,jk->k", vec_w.conj(), x, vec_w))
            if np.any(diag[ker] > 1e-12):
                return math.inf
            return float(np.dot(neg_log, diag)) - _spectrum_entropy_ext(x)
        return Functional(name, "quantum", rel)
    elif name == "qce":
        return Functional(name, "ensemble",
                          lambda blocks: float(sum(_spectrum_entropy_ext(b) for b in blocks)))
    raise PreconditionError(f"no {kind} functional named {name!r}")


# ----------------------------------------------------- structured candidates

def _transport(v: np.ndarray, amount: float, k: int, donors_ascending: bool) -> np.ndarray:
    """Move ``amount`` of mass onto entry ``k``, draining donors in the given order."""
    w = v.astype(float).copy()
    order = np.argsort(v, kind="stable")
    if not donors_ascending:
        order = order[::-1]
    left = min(amount, float(w.sum() - w[k]))
    for i in order:
        if left <= 0:
            break
        if i == k:
            continue
        take = min(w[i], left)
        w[i] -= take
        w[k] += take
        left -= take
    return w


def greedy_min_entropy_vector(v: np.ndarray, eps: float) -> np.ndarray:
    """Most majorizing vector within TV ``eps``: add to the largest entry, drain the smallest."""
    v = np.asarray(v, dtype=float)
    return _transport(v, eps, int(np.argmax(v)), donors_ascending=True)


def greedy_min_energy_vector(v: np.ndarray, levels: np.ndarray, eps: float) -> np.ndarray:
    """Move ``eps`` of mass from the costliest occupied levels to level 0."""
    w = np.asarray(v, dtype=float).copy()
    left = eps
    for i in range(w.size - 1, 0, -1):
        if left <= 0:
            break
        if levels[i] <= levels[0]:
            break
        take = min(w[i], left)
        w[i] -= take
        w[0] += take
        left -= take
    return w


def _spectral_frame(spec: BallSpec):
    """Center as a vector of weights plus a map from weight vectors back to points."""
    c = spec.raw_center
    if spec.kind == "classical":
        shape = c.shape
        return c.ravel().copy(), lambda w: np.reshape(w, shape)
    if spec.kind == "quantum":
        lam, vec = _hermitian_eigh(c)
        lam = np.maximum(lam, 0.0)

        def back(w, vec=vec):
            return (vec * w) @ vec.conj().T
        return lam, back
    parts = [_hermitian_eigh(b) for b in c]
    sizes = [p[0].size for p in parts]
    v = np.concatenate([np.maximum(p[0], 0.0) for p in parts])

    def back_blocks(w, parts=parts, sizes=sizes):
        out, pos = [], 0
        for (lam, vec), n in zip(parts, sizes):
            out.append((vec * w[pos:pos + n]) @ vec.conj().T)
            pos += n
        return tuple(out)
    return v, back_blocks


def _to_boundary(spec: BallSpec, x, frac: float = 1.0):
    """Pull ``x`` toward the center until it sits in the ball (on the sphere when ``frac=1``)."""
    dist = spec.distance(x)
    if dist <= spec.eps * frac:
        return x
    return _axpy(spec.raw_center, x, spec.eps * frac / dist)


def _ground_point(spec: BallSpec):
    n = spec.dim
    if spec.kind == "classical":
        g = np.zeros(n)
        g[0] = 1.0
        return g
    if spec.basis is None:
        e = np.zeros(n, dtype=complex)
        e[0] = 1.0
    else:
        e = np.asarray(spec.basis, dtype=complex)[:, 0]
    return np.outer(e, e.conj())


def _fix_energy(spec: BallSpec, x):
    # mixing with the ground state lowers the energy linearly (E_0 = 0)
    e = spec.energy_of(x)
    if e <= spec.E:
        return x
    s = 1.0 - spec.E / e
    return _axpy(x, _ground_point(spec), s)


def _structured(spec: BallSpec) -> list:
    v, back = _spectral_frame(spec)
    eps = spec.eps
    n = v.size
    vecs = [v.copy(), greedy_min_entropy_vector(v, eps)]
    for k in range(min(n, 64)):
        vecs.append(_transport(v, eps, k, True))
        vecs.append(_transport(v, eps, k, False))
    r = np.maximum(v - eps, 0.0)
    if r.sum() > 0:
        vecs.append(r / r.sum())
    vecs.append(np.full(n, 1.0 / n))
    for k in range(min(n, 64)):
        e = np.zeros(n)
        e[k] = 1.0
        vecs.append(e)
    if spec.constraint == "energy":
        vecs.append(greedy_min_energy_vector(v, spec.spectrum.head(n), eps)
                    if spec.kind == "classical" else v)
    pts = []
    for w in vecs:
        x = back(w)
        if spec.constraint == "energy":
            x = _fix_energy(spec, x)
        pts.append(_to_boundary(spec, x))
    return pts


# ----------------------------------------------------------- random points

def _random_state(spec: BallSpec, rng: np.random.Generator):
    n = spec.dim
    if spec.kind == "classical":
        alpha = rng.choice([0.1, 0.5, 1.0, 3.0])
        return rng.dirichlet(np.full(n, alpha)).reshape(spec.raw_center.shape)
    if spec.kind == "quantum":
        if spec.constraint == "commuting":
            lam, vec = _hermitian_eigh(spec.raw_center)
            w = rng.dirichlet(np.full(n, rng.choice([0.2, 1.0, 3.0])))
            return (vec * w) @ vec.conj().T
        return _ginibre(n, int(rng.integers(1, n + 1)), rng)
    k = len(spec.raw_center)
    weights = rng.dirichlet(np.ones(k))
    return tuple(p * _ginibre(n, int(rng.integers(1, n + 1)), rng) for p in weights)


def _ginibre(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    m = g @ g.conj().T
    return m / np.real(np.trace(m))


def _rank_anchor(spec: BallSpec, rng: np.random.Generator):
    """A rank-``d`` anchor inside the ball, and a sampler for points sharing its range."""
    c = spec.raw_center
    d = spec.d
    if spec.kind == "classical":
        flat = c.ravel()
        order = np.argsort(flat, kind="stable")[::-1]
        if rng.random() < 0.5 or flat.size <= d:
            keep = order[:d]
        else:
            keep = rng.choice(flat.size, size=d, replace=False)
        a = np.zeros_like(flat)
        a[keep] = flat[keep]
        a[keep[np.argmax(flat[keep])]] += 1.0 - a.sum()

        def draw(keep=keep):
            x = np.zeros_like(flat)
            x[keep] = rng.dirichlet(np.full(keep.size, rng.choice([0.3, 1.0, 3.0])))
            return x.reshape(c.shape)
        return a.reshape(c.shape), draw
    lam, vec = _hermitian_eigh(c)
    lam, vec = lam[::-1], vec[:, ::-1]
    top = np.maximum(lam[:d], 0.0).copy()
    top[0] += 1.0 - top.sum()
    v_d = vec[:, :d]
    a = (v_d * top) @ v_d.conj().T

    def draw(v_d=v_d):
        s = _ginibre(v_d.shape[1], int(rng.integers(1, v_d.shape[1] + 1)), rng)
        return v_d @ s @ v_d.conj().T
    return a, draw


def _random_unitary_near(n: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    k = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    k = 0.5 * (k + k.conj().T)
    k /= max(np.linalg.norm(k, 2), 1e-300)
    w, u = np.linalg.eigh(k)
    return (u * np.exp(1j * theta * w)) @ u.conj().T


def _random_point(spec: BallSpec, rng: np.random.Generator):
    frac = 1.0 if rng.random() < 0.5 else rng.random()
    if spec.constraint == "rank":
        a, draw = _rank_anchor(spec, rng)
        da = spec.distance(a)
        if da > spec.eps + FEAS_TOL:
            return None
        x = draw()
        dx = spec.distance(x)
        slack = max(spec.eps * frac - da, 0.0)
        t = 1.0 if dx <= da + slack else slack / (dx - da)
        y = _axpy(a, x, t)
        if spec.kind == "quantum" and rng.random() < 0.5:
            theta = rng.random()
            for _ in range(12):
                u = _random_unitary_near(spec.dim, theta, rng)
                z = u @ y @ u.conj().T
                if spec.distance(z) <= spec.eps:
                    return z
                theta *= 0.5
        return y
    x = _random_state(spec, rng)
    if spec.constraint == "energy":
        x = _fix_energy(spec, x)
    return _to_boundary(spec, x, frac)


def sample_ball(spec: BallSpec, count: int, seed: int = 0) -> list:
    """Feasible points of the ball: structured candidates first, then seeded random ones.

    Random points lie on the boundary sphere about half of the time.
    Infeasible proposals (possible only under the rank constraint) are
    redrawn; an empty intersection raises :class:`PreconditionError`.
    """
    if count < 1:
        raise PreconditionError("count must be at least 1")
    rng = np.random.default_rng(seed)
    out = [x for x in _structured(spec) if spec.is_feasible(x)][:count]
    return out + _random_feasible(spec, count - len(out), rng)


def _random_feasible(spec: BallSpec, count: int, rng: np.random.Generator) -> list:
    out, misses = [], 0
    while len(out) < count:
        x = _random_point(spec, rng)
        if x is not None and spec.is_feasible(x):
            out.append(x)
            misses = 0
        else:
            misses += 1
            if misses > 200:
                raise PreconditionError("no feasible point found: the constrained ball looks empty")
    return out


# -------------------------------------------------------------- minimizers

def minimize_entropy_ball(p, eps: float) -> OracleResult:
    """Exact minimal Shannon entropy over the TV ball (greedy transport)."""
    p = as_prob(p)
    eps = float(eps)
    if eps < 0:
        raise PreconditionError("eps must be nonnegative")
    if p.ndim != 1 or p.shape[0] > 64:
        raise PreconditionError("entropy minimization takes a 1-variate array with at most 64 cells")
    x = greedy_min_entropy_vector(p.entries, eps) if eps > 0 else np.array(p.entries)
    return OracleResult(_eta_sum(x), x, 1, "greedy-transport", 0, True)


def _exact_candidate(spec: BallSpec, f: Functional):
    # greedy transports are exact whenever they satisfy the constraint
    if f.name == "entropy" and spec.kind in ("classical", "quantum"):
        if spec.kind == "classical" and spec.raw_center.ndim != 1:
            return None
        v, back = _spectral_frame(spec)
        return back(greedy_min_entropy_vector(v, spec.eps))
    if f.name == "energy" and spec.kind in ("classical", "quantum"):
        levels = f.ref["spectrum"].head(spec.dim)
        c = spec.raw_center
        if spec.kind == "classical":
            if c.ndim != 1:
                return None
            return greedy_min_energy_vector(c, levels, spec.eps)
        basis = f.ref.get("basis")
        b = np.eye(spec.dim, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
        in_b = b.conj().T @ c @ b
        # exact only when the center is diagonal in the energy basis
        if np.max(np.abs(in_b - np.diag(np.diag(in_b)))) > 1e-12:
            return None
        w = greedy_min_energy_vector(np.real(np.diag(in_b)), levels, spec.eps)
        return (b * w) @ b.conj().T
    return None


def _propose(spec: BallSpec, x, step: float, rng: np.random.Generator):
    kind = spec.kind
    if kind == "classical":
        flat = np.ravel(x).copy()
        occ = np.flatnonzero(flat > 0)
        i = int(rng.choice(occ))
        if spec.constraint == "rank" and occ.size >= spec.d:
            j = int(rng.choice(occ))
        else:
            j = int(rng.integers(flat.size))
        if i == j:
            return None
        amt = min(flat[i], step * rng.random())
        flat[i] -= amt
        flat[j] += amt
        return flat.reshape(np.shape(x))
    if kind == "quantum":
        move = rng.integers(3) if spec.constraint != "commuting" else 0
        if move == 0:
            if spec.constraint == "commuting":
                lam, vec = _hermitian_eigh(spec.raw_center)
                w = np.real(_diag_in(x, vec))
            else:
                w, vec = _hermitian_eigh(x)
                w = np.maximum(w, 0.0)
            occ = np.flatnonzero(w > 1e-15)
            i = int(rng.choice(occ))
            j = int(rng.choice(occ)) if (spec.constraint == "rank" and occ.size >= spec.d) \
                else int(rng.integers(w.size))
            if i == j:
                return None
            amt = min(w[i], step * rng.random())
            w = w.copy()
            w[i] -= amt
            w[j] += amt
            return (vec * w) @ vec.conj().T
        if move == 1:
            u = _random_unitary_near(spec.dim, step * rng.random(), rng)
            return u @ x @ u.conj().T
        if spec.constraint == "rank":
            return None
        psi = rng.standard_normal(spec.dim) + 1j * rng.standard_normal(spec.dim)
        psi /= np.linalg.norm(psi)
        return _axpy(x, np.outer(psi, psi.conj()), step * rng.random())
    blocks = list(x)
    if rng.random() < 0.5:
        parts = [_hermitian_eigh(b) for b in blocks]
        sizes = [p[0].size for p in parts]
        w = np.concatenate([np.maximum(p[0], 0.0) for p in parts])
        occ = np.flatnonzero(w > 1e-15)
        i, j = int(rng.choice(occ)), int(rng.integers(w.size))
        if i == j:
            return None
        amt = min(w[i], step * rng.random())
        w[i] -= amt
        w[j] += amt
        out, pos = [], 0
        for (lam, vec), n in zip(parts, sizes):
            out.append((vec * w[pos:pos + n]) @ vec.conj().T)
            pos += n
        return tuple(out)
    k = int(rng.integers(len(blocks)))
    u = _random_unitary_near(spec.dim, step * rng.random(), rng)
    blocks[k] = u @ blocks[k] @ u.conj().T
    return tuple(blocks)


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        if self.used >= self.limit:
            return False
        self.used += 1
        return True


def _descend(spec, f, x, v, rng, iters, budget):
    step = spec.eps / 2
    fails = 0
    for _ in range(iters):
        if budget.used >= budget.limit:
            return x, v, False
        y = _propose(spec, x, step, rng)
        if y is not None and spec.is_feasible(y):
            budget.spend()
            fy = f(y)
            if fy < v:
                x, v = y, fy
                step = min(step * 1.5, 1.0)
                fails = 0
                continue
        fails += 1
        if fails >= 12:
            step *= 0.5
            fails = 0
            if step < 1e-9:
                break
    return x, v, True


def _functional_targets(spec: BallSpec, f: Functional) -> list:
    c = spec.raw_center
    ref = f.ref
    targets = []
    if f.name == "kl" and "q" in ref:
        targets.append(np.reshape(as_prob(ref["q"]).entries, c.shape))
    if f.name == "mi":
        targets.append(np.outer(c.sum(axis=1), c.sum(axis=0)))
    if f.name == "equivocation":
        t = np.zeros_like(c)
        cols = c.sum(axis=0)
        t[np.argmax(c, axis=0), np.arange(c.shape[1])] = cols
        targets.append(t)
    if f.name == "relative_entropy" and "omega" in ref:
        om = ref["omega"]
        om = om.matrix if isinstance(om, DensityOperator) else np.asarray(om)
        targets.append(om)
        lam, vec = _hermitian_eigh(c)
        targets.append((vec * _diag_in(om, vec)) @ vec.conj().T)
    if f.name == "energy":
        targets.append(_ground_point(spec))
    if f.name == "qce":
        pure = []
        for b in c:
            lam, vec = _hermitian_eigh(b)
            top = vec[:, -1]
            pure.append(lam.sum() * np.outer(top, top.conj()))
        targets.append(tuple(pure))
    out = []
    for t in targets:
        if spec.constraint == "energy":
            t = _fix_energy(spec, t)
        out.append(_to_boundary(spec, t))
    return out


def minimize_functional_ball(spec: BallSpec, functional, budget: int = 20000, seed: int = 0,
                             *, restarts: int = 64, iters: int = 500, **ref) -> OracleResult:
    """Upper estimate of ``inf f`` over the ball.

    ``functional`` is a :class:`Functional` or a name for
    :func:`functional_for`, in which case ``ref`` supplies ``q``, ``omega``,
    ``spectrum`` or ``basis``. ``budget`` caps functional evaluations; when
    it runs out the best point so far is returned with ``converged=False``.
    """
    if isinstance(functional, str):
        f = functional_for(functional, spec.kind, **ref)
    else:
        f = functional
    if f.kind != spec.kind:
        raise PreconditionError(f"functional {f.name!r} acts on {f.kind} points, the ball is {spec.kind}")
    exact = _exact_candidate(spec, f)
    if exact is not None and spec.is_feasible(exact):
        return OracleResult(f(exact), exact, 1, "greedy-transport", seed, True)

    rng = np.random.default_rng(seed)
    budget_ = _Budget(int(budget))
    cands = [x for x in _structured(spec) + _functional_targets(spec, f) if spec.is_feasible(x)]
    try:
        cands += _random_feasible(spec, restarts, rng)
    except PreconditionError:
        if not cands:
            raise
    scored = []
    for x in cands:
        if not budget_.spend():
            break
        v = f(x)
        if math.isfinite(v):
            scored.append((v, len(scored), x))
    if not scored:
        return OracleResult(math.inf, None, budget_.used, "random-restart", seed, False)
    scored.sort(key=lambda t: (t[0], t[1]))
    best_v, _, best_x = scored[0]
    method = "random-restart"
    converged = True
    n_starts = max(1, min(len(scored), restarts // 16))
    for v0, _, x0 in scored[:n_starts]:
        x, v, ok = _descend(spec, f, x0, v0, rng, iters, budget_)
        converged = converged and ok
        if v < best_v:
            best_v, best_x, method = v, x, "projected-descent"
        if not ok:
            break
    return OracleResult(best_v, best_x, budget_.used, method, seed, converged)


def certify_bound(bound: BoundReport, spec: BallSpec, functional, budget: int = 20000,
                  seed: int = 0, **ref) -> dict:
    """Compare a bound with the oracle minimum over the matching ball.

    Returns ``{"sound", "slack", "oracle"}`` with ``sound`` meaning
    ``bound.value <= oracle min + 1e-9`` and ``slack = oracle min - bound.value``.
    """
    want = TARGET_FOR_CONSTRAINT[spec.constraint]
    if bound.target != want:
        raise PreconditionError(f"bound {bound.bound_id} targets {bound.target}, the ball gives {want}")
    if abs(bound.epsilon - spec.eps) > 1e-15:
        raise PreconditionError("bound and ball use different eps")
    res = minimize_functional_ball(spec, functional, budget, seed, **ref)
    slack = res.min_value - bound.value
    return {"sound": bool(bound.value <= res.min_value + 1e-9), "slack": slack, "oracle": res}

"""Unperturbed self-adjoint models: eigenvalues, eigenfunctions and the
semiclassical quantities of single-well potentials.

Index conventions
-----------------
Model indices ``k`` start at 0 for the Neumann interval, the harmonic
oscillator and single wells (``psi_0`` is the ground state). Matrices and the
subordination bound use 1-based *positions* ``p = k + 1``, so that weights
like ``p**alpha`` are finite. A ``DiagonalSequence`` is given directly by its
positions ``mu_1, mu_2, ...``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .airy import airy_ai
from .errors import DomainError, ParameterError, QuadratureError, RootFindingError
from .quadrature import gauss_legendre, integrate, integrate_sqrt_right
from .roots import bisect, grow_bracket

LOW_INDEX_THRESHOLD = 10
ENVELOPE_FLOOR = 1e-14
GAP_FIT_RANGE = 2000


# ---------------------------------------------------------------------------
# potentials


class WellPotential:
    """Even single-well potential ``Q`` given by a callable on ``x >= 0``.

    ``Q`` must vanish at 0 and increase on (0, inf). ``dq`` defaults to a
    central difference.
    """

    beta: float | None = None

    def __init__(self, q: Callable[[np.ndarray], np.ndarray], dq: Callable[[np.ndarray], np.ndarray] | None = None):
        self._q = q
        self._dq = dq

    def __call__(self, x):
        return self._q(np.abs(np.asarray(x, dtype=float)))

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self._dq is not None:
            return np.sign(x) * self._dq(np.abs(x))
        h = 1e-6 * np.maximum(np.abs(x), 1.0)
        return (self(x + h) - self(x - h)) / (2 * h)

    def below(self, mu: float, x_mu: float, d):
        """``mu - Q(x_mu - d)`` for ``0 <= d <= x_mu``."""
        return mu - self(x_mu - np.asarray(d, dtype=float))

    def above(self, mu: float, x_mu: float, d):
        """``Q(x_mu + d) - mu`` for ``d >= 0``."""
        return self(x_mu + np.asarray(d, dtype=float)) - mu


class PowerWell(WellPotential):
    """``Q(x) = |x|**beta``; differences near the turning point avoid cancellation."""

    def __init__(self, beta: float):
        if not beta > 1:
            raise ParameterError("β must exceed 1")
        self.beta = float(beta)
        super().__init__(lambda x: x**self.beta, lambda x: self.beta * x ** (self.beta - 1))

    def below(self, mu, x_mu, d):
        r = np.asarray(d, dtype=float) / x_mu
        with np.errstate(divide="ignore"):
            return -mu * np.expm1(self.beta * np.log1p(-np.minimum(r, 1.0)))

    def above(self, mu, x_mu, d):
        r = np.asarray(d, dtype=float) / x_mu
        return mu * np.expm1(self.beta * np.log1p(r))

    def __repr__(self):
        return f"PowerWell(beta={self.beta})"


# ---------------------------------------------------------------------------
# model specification


@dataclass(frozen=True)
class NeumannInterval:
    l: float


@dataclass(frozen=True)
class SingleWell:
    beta: float


@dataclass(frozen=True)
class HarmonicExact:
    pass


@dataclass(frozen=True)
class DiagonalSequence:
    mu: tuple[float, ...]


ModelKind = Union[NeumannInterval, SingleWell, HarmonicExact, DiagonalSequence]


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    gap_gamma: float
    gap_kappa: float
    gap_N0: int

    @property
    def name(self) -> str:
        return {
            NeumannInterval: "neumann",
            SingleWell: "single_well",
            HarmonicExact: "harmonic_exact",
            DiagonalSequence: "diagonal",
        }[type(self.kind)]

    @property
    def has_eigenfunctions(self) -> bool:
        return not isinstance(self.kind, DiagonalSequence)


def neumann_model(l: float = 1.0) -> ModelSpec:
    if not l > 0:
        raise ParameterError("interval half-length l must be positive")
    kind = NeumannInterval(float(l))
    kappa, n0 = fit_gap_params(eigenvalues(kind, GAP_FIT_RANGE), 2.0)
    return ModelSpec(kind, 2.0, kappa, n0)


def harmonic_model() -> ModelSpec:
    return ModelSpec(HarmonicExact(), 1.0, 2.0, 1)


def single_well_model(beta: float) -> ModelSpec:
    if not beta > 1:
        raise ParameterError("β must exceed 1")
    kind = SingleWell(float(beta))
    gamma = 2 * beta / (beta + 2)
    kappa, n0 = fit_gap_params(eigenvalues(kind, GAP_FIT_RANGE), gamma)
    return ModelSpec(kind, gamma, kappa, n0)


def diagonal_model(mu, gamma: float) -> ModelSpec:
    mu = tuple(float(v) for v in mu)
    if len(mu) < 4:
        raise ParameterError("diagonal model needs at least 4 entries")
    kappa, n0 = fit_gap_params(np.array(mu), gamma)
    return ModelSpec(DiagonalSequence(mu), float(gamma), kappa, n0)


def eigenvalues(model: ModelSpec | ModelKind, M: int) -> np.ndarray:
    """Unperturbed eigenvalues at positions 1..M."""
    kind = model.kind if isinstance(model, ModelSpec) else model
    k = np.arange(M, dtype=float)
    if isinstance(kind, NeumannInterval):
        return (k * np.pi / (2 * kind.l)) ** 2
    if isinstance(kind, HarmonicExact):
        return 2 * k + 1
    if isinstance(kind, SingleWell):
        om, _ = omega_constants(kind.beta)
        return ((k + 0.5) * np.pi / om) ** (2 * kind.beta / (kind.beta + 2))
    if isinstance(kind, DiagonalSequence):
        if M > len(kind.mu):
            raise ParameterError(f"diagonal model has only {len(kind.mu)} entries, {M} requested")
        return np.array(kind.mu[:M])
    raise TypeError(f"unknown model kind {kind!r}")


def eigenfunctions(model: ModelSpec | ModelKind, M: int, x) -> np.ndarray:
    """``(M, len(x))`` table of psi at positions 1..M."""
    kind = model.kind if isinstance(model, ModelSpec) else model
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(kind, NeumannInterval):
        k = np.arange(M)
        return neumann_psi(kind.l, k[:, None], x[None, :])
    if isinstance(kind, HarmonicExact):
        return hermite_table(M, x)
    if isinstance(kind, SingleWell):
        Q = PowerWell(kind.beta)
        mus = eigenvalues(kind, M)
        out = np.empty((M, x.size))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowIndexWarning)
            for k in range(M):
                out[k] = wkb_psi(wkb_state(Q, mus[k], k), Q, x)
        return out
    raise ParameterError("diagonal models carry no eigenfunctions")


def eigenfunction(model: ModelSpec | ModelKind, k: int, x) -> np.ndarray:
    """Single eigenfunction psi_k (model index ``k``, position ``k + 1``)."""
    kind = model.kind if isinstance(model, ModelSpec) else model
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(kind, NeumannInterval):
        return neumann_psi(kind.l, k, x)
    if isinstance(kind, HarmonicExact):
        return hermite_table(k + 1, x)[k]
    if isinstance(kind, SingleWell):
        Q = PowerWell(kind.beta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LowIndexWarning)
            return wkb_psi(wkb_state(Q, bs_eigenvalue(kind.beta, k), k), Q, x)
    raise ParameterError("diagonal models carry no eigenfunctions")


def is_symmetric(model: ModelSpec | ModelKind) -> bool:
    """psi_k(-x) = (-1)**k psi_k(x) holds for every model with eigenfunctions."""
    kind = model.kind if isinstance(model, ModelSpec) else model
    return not isinstance(kind, DiagonalSequence)


def domain(model: ModelSpec | ModelKind) -> tuple[float, float]:
    kind = model.kind if isinstance(model, ModelSpec) else model
    if isinstance(kind, NeumannInterval):
        return (-kind.l, kind.l)
    return (-math.inf, math.inf)


def envelope_window(model: ModelSpec | ModelKind, M: int, floor: float = ENVELOPE_FLOOR) -> tuple[float, float]:
    """Symmetric window outside of which every psi_k (k < M) is below ``floor``."""
    kind = model.kind if isinstance(model, ModelSpec) else model
    if isinstance(kind, NeumannInterval):
        return (-kind.l, kind.l)
    if isinstance(kind, DiagonalSequence):
        raise ParameterError("diagonal models carry no eigenfunctions")
    Q = PowerWell(2.0 if isinstance(kind, HarmonicExact) else kind.beta)
    mu = float(eigenvalues(kind, M)[-1])
    x_mu, _ = turning_point(Q, mu)
    target = -math.log(floor) + 2.0
    f = lambda d: float(phase_zeta(Q, mu, x_mu + d)) - target
    lo, hi = grow_bracket(f, 0.0, 1.0)
    d = bisect(f, lo, hi, rtol=1e-6)
    return (-(x_mu + d), x_mu + d)


# ---------------------------------------------------------------------------
# exact eigenpairs


def cospi(r):
    """cos(pi r) with exact zeros at half-integers and exact +-1 at integers."""
    r = np.asarray(r, dtype=float)
    red = np.mod(r, 2.0)
    out = np.cos(np.pi * red)
    out = np.where(red == 0.5, 0.0, out)
    out = np.where(red == 1.5, 0.0, out)
    out = np.where(red == 1.0, -1.0, out)
    return np.where(red == 0.0, 1.0, out)


def neumann_psi(l: float, k, x):
    k = np.asarray(k)
    x = np.asarray(x, dtype=float)
    if np.any(x < -l) or np.any(x > l):
        raise DomainError(f"x outside [-{l}, {l}]")
    vals = cospi(k * (x + l) / (2 * l)) / math.sqrt(l)
    return np.where(k == 0, 1.0 / math.sqrt(2 * l), vals)


def neumann_eigenpair(l: float, k: int, x):
    """``(mu_k, psi_k(x))`` for -psi'' on [-l, l] with psi'(+-l) = 0."""
    if not l > 0:
        raise ParameterError("l must be positive")
    if k < 0:
        raise ParameterError("k must be non-negative")
    mu = (k * math.pi / (2 * l)) ** 2
    psi = neumann_psi(l, k, x)
    return mu, (float(psi) if np.ndim(psi) == 0 else psi)


def hermite_table(K: int, x) -> np.ndarray:
    """Orthonormal Hermite functions psi_0..psi_{K-1} at ``x``, shape (K, len(x)).

    The recurrence runs on rescaled values with a per-point log offset so
    that ``exp(-x**2/2)`` never underflows before the oscillatory growth.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((K, x.size))
    if K == 0:
        return out
    log_off = -0.5 * x * x - 0.25 * math.log(math.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(log_off)
    big = 1e150
    for k in range(K - 1):
        nxt = x * math.sqrt(2.0 / (k + 1)) * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        mag = np.abs(cur)
        scale = mag > big
        if scale.any():
            cur = np.where(scale, cur / big, cur)
            prev = np.where(scale, prev / big, prev)
            log_off = np.where(scale, log_off + math.log(big), log_off)
        with np.errstate(under="ignore", over="ignore"):
            out[k + 1] = cur * np.exp(np.minimum(log_off, 700.0))
    return out


def hermite_psi(k: int, x):
    if k < 0:
        raise ParameterError("k must be non-negative")
    vals = hermite_table(k + 1, x)[k]
    return float(vals[0]) if np.ndim(x) == 0 else vals


# ---------------------------------------------------------------------------
# single-well semiclassics


def omega_constants(beta: float, tol: float = 1e-12) -> tuple[float, float]:
    """``(2 int_0^1 (1-t^b)^{1/2} dt, 2 int_0^1 (1-t^b)^{-1/2} dt)``."""
    if math.isinf(beta):
        return 2.0, 2.0
    if not beta > 0:
        raise ParameterError("β must be positive")
    # 1 - (1 - s^2)^beta, accurate for small s
    one_minus = lambda s: -np.expm1(beta * np.log1p(-s * s))
    # t = 1 - s^2 for both; the second integrand is then smooth
    om = integrate(lambda s: 2 * s * np.sqrt(one_minus(s)), 0.0, 1.0, tol=tol, panels=4)
    # Gauss nodes never touch s = 0, where the integrand tends to 2/sqrt(beta)
    omp = integrate(lambda s: 2 * s / np.sqrt(one_minus(s)), 0.0, 1.0, tol=tol, panels=4)
    return 2 * float(om), 2 * float(omp)


def turning_point(Q: WellPotential, mu: float, rtol: float = 1e-12) -> tuple[float, float]:
    """``(x_mu, a_mu)`` with ``Q(x_mu) = mu`` and ``a_mu = Q'(x_mu)``."""
    if not mu > 0:
        raise ParameterError("mu must be positive")
    if Q.beta is not None:
        x_mu = mu ** (1.0 / Q.beta)
    else:
        f = lambda x: float(Q(x)) - mu
        lo, hi = grow_bracket(f, 0.0, 1.0)
        x_mu = bisect(f, lo, hi, rtol=rtol)
    return x_mu, float(Q.deriv(x_mu))


def _sqrt_sub_integral(g: Callable[[np.ndarray], np.ndarray], L: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised ``int_0^{L_i} g(s) ds`` by composite Gauss-Legendre with doubling."""
    L = np.asarray(L, dtype=float)
    t, w = gauss_legendre(20)
    u = 0.5 * (t + 1.0)

    def estimate(panels: int) -> np.ndarray:
        edges = np.arange(panels) / panels
        nodes = (edges[:, None] + u[None, :] / panels).ravel()
        weights = np.tile(0.5 * w / panels, panels)
        s = L[..., None] * nodes
        return L * np.sum(g(s) * weights, axis=-1)

    panels = 2
    prev = estimate(panels)
    for _ in range(12):
        panels *= 2
        cur = estimate(panels)
        if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
            return cur
        prev = cur
    raise QuadratureError("phase integral did not converge")


def phase_zeta(Q: WellPotential, mu: float, x, tol: float = 1e-11, x_mu: float | None = None):
    """Phase integral from ``x`` to the turning point.

    For ``0 <= x < x_mu`` returns ``int_x^{x_mu} (mu - Q)^{1/2}``; for
    ``x > x_mu`` returns the forbidden-region magnitude
    ``int_{x_mu}^x (Q - mu)^{1/2}`` (the phase itself is ``i`` times it).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("phase_zeta needs x >= 0")
    if x_mu is None:
        x_mu, _ = turning_point(Q, mu)
    flat = np.atleast_1d(x).ravel()
    out = np.zeros_like(flat)
    d = flat - x_mu
    osc = d < 0
    forb = d > 0
    if osc.any():
        L = np.sqrt(-d[osc])
        out[osc] = _sqrt_sub_integral(lambda s: 2 * s * np.sqrt(np.maximum(Q.below(mu, x_mu, s * s), 0.0)), L, tol)
    if forb.any():
        L = np.sqrt(d[forb])
        out[forb] = _sqrt_sub_integral(lambda s: 2 * s * np.sqrt(np.maximum(Q.above(mu, x_mu, s * s), 0.0)), L, tol)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def bs_eigenvalue(model: ModelSpec | SingleWell | float, k: int) -> float:
    """Bohr-Sommerfeld eigenvalue of ``|x|**beta`` (closed form)."""
    beta = _beta_of(model)
    if k < 0:
        raise ParameterError("k must be non-negative")
    om, _ = omega_constants(beta)
    return ((k + 0.5) * math.pi / om) ** (2 * beta / (beta + 2))


def bs_eigenvalue_quad(Q: WellPotential, k: int, rtol: float = 1e-12, tol: float = 1e-12) -> float:
    """Bohr-Sommerfeld eigenvalue by root-finding on the phase integral
    ``int_{-x_mu}^{x_mu} (mu - Q)^{1/2} = (k + 1/2) pi`` (any monotone well)."""
    target = (k + 0.5) * math.pi

    def action(mu: float) -> float:
        x_mu, _ = turning_point(Q, mu)
        return 2 * float(integrate_sqrt_right(lambda x: np.sqrt(np.maximum(mu - Q(x), 0.0)), 0.0, x_mu, tol=tol)) - target

    try:
        lo, hi = grow_bracket(action, 1e-8, 1.0)
    except RootFindingError as exc:
        raise RootFindingError(f"Bohr-Sommerfeld bracketing failed for k={k}") from exc
    return bisect(action, lo, hi, rtol=rtol)


def _beta_of(model) -> float:
    if isinstance(model, ModelSpec):
        model = model.kind
    if isinstance(model, SingleWell):
        return model.beta
    if isinstance(model, HarmonicExact):
        return 2.0
    if isinstance(model, (int, float)):
        if not model > 1:
            raise ParameterError("β must exceed 1")
        return float(model)
    raise ParameterError(f"{model!r} is not a single-well model")


class LowIndexWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WkbState:
    mu: float
    x_mu: float
    a_mu: float
    delta: float
    delta1: float
    u_norm_sq: float
    k: int | None = None
    low_index: bool = False
    delta_clamped: bool = field(default=False)


def wkb_state(Q: WellPotential, mu: float, k: int | None = None, rtol: float = 1e-12, threshold: int = LOW_INDEX_THRESHOLD) -> WkbState:
    x_mu, a_mu = turning_point(Q, mu)
    f_left = lambda d: float(phase_zeta(Q, mu, x_mu - d, x_mu=x_mu)) - 1.0
    clamped = f_left(x_mu) < 0
    if clamped:
        delta = x_mu
    else:
        delta = bisect(f_left, 0.0, x_mu, rtol=rtol)
    f_right = lambda d: float(phase_zeta(Q, mu, x_mu + d, x_mu=x_mu)) - 1.0
    lo, hi = grow_bracket(f_right, 0.0, max(a_mu ** (-1.0 / 3.0), 1e-8))
    delta1 = bisect(f_right, lo, hi, rtol=rtol)
    norm_sq, _ = _u_norm(Q, mu, x_mu)
    low = k is not None and k < threshold
    if low:
        warnings.warn(f"WKB eigenfunction for k={k} < {threshold} is unreliable", LowIndexWarning, stacklevel=2)
    return WkbState(mu, x_mu, a_mu, delta, delta1, norm_sq, k, low, clamped)


def _u_norm(Q: WellPotential, mu: float, x_mu: float, tol: float = 1e-11) -> tuple[float, float | None]:
    quad = 2 * math.pi * float(integrate_sqrt_right(lambda x: 1.0 / np.sqrt(np.maximum(mu - Q(x), 1e-300)), 0.0, x_mu, tol=tol))
    asym = None
    if Q.beta is not None:
        _, omp = omega_constants(Q.beta)
        asym = math.pi * omp * mu ** ((2 - Q.beta) / (2 * Q.beta))
    return quad, asym


def u_norm_sq(state: WkbState, Q: WellPotential) -> tuple[float, float | None]:
    """Main term of ``||u||^2`` over the real line, and its power-law closed form."""
    return _u_norm(Q, state.mu, state.x_mu)


def wkb_u(state: WkbState, Q: WellPotential, x) -> np.ndarray:
    """Unnormalised WKB function ``u(x)`` for ``x >= 0``.

    Real form: ``u = pi sqrt(2) (Z / (Q - mu))**(1/4) Ai(Z)`` with
    ``(2/3)|Z|**1.5`` the phase magnitude and ``sign Z = sign(x - x_mu)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu, x_mu, a_mu = state.mu, state.x_mu, state.a_mu
    S = np.atleast_1d(phase_zeta(Q, mu, x, x_mu=x_mu))
    d = x - x_mu
    Z = np.sign(d) * (1.5 * S) ** (2.0 / 3.0)
    qm = np.where(d < 0, -Q.below(mu, x_mu, np.maximum(-d, 0.0)), Q.above(mu, x_mu, np.maximum(d, 0.0)))
    near = np.abs(d) <= 1e-7 * x_mu
    safe_qm = np.where(near | (qm == 0), 1.0, qm)
    ratio = np.where(near | (qm == 0), a_mu ** (-2.0 / 3.0), Z / safe_qm)
    return math.pi * math.sqrt(2.0) * ratio**0.25 * airy_ai(Z)


def wkb_psi(state: WkbState, Q: WellPotential, x):
    """``u / ||u||``, extended to ``x < 0`` by the parity of ``state.k``."""
    xa = np.asarray(x, dtype=float)
    vals = wkb_u(state, Q, np.abs(xa)) / math.sqrt(state.u_norm_sq)
    if state.k is not None and state.k % 2 == 1:
        xs = np.atleast_1d(xa)
        vals = np.where(xs < 0, -vals, np.where(xs == 0, 0.0, vals))
    return float(vals[0]) if xa.ndim == 0 else vals.reshape(xa.shape)


def single_well_state(beta: float, k: int) -> tuple[WkbState, PowerWell]:
    Q = PowerWell(beta)
    return wkb_state(Q, bs_eigenvalue(beta, k), k), Q


# ---------------------------------------------------------------------------
# gap assumption and auxiliary scales


def sigma(omega: float, gamma: float, n):
    """``n**(1-omega-gamma) log(e n)`` for omega <= 1, ``n**-gamma`` otherwise."""
    if not omega + gamma > 1:
        raise ParameterError("sigma needs omega + gamma > 1")
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ParameterError("sigma needs n >= 1")
    if omega <= 1:
        out = n ** (1 - omega - gamma) * (1 + np.log(n))
    else:
        out = n ** (-gamma)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GapFit:
    kappa: float
    N0: int
    ok: bool = True

    def __iter__(self):
        return iter((self.kappa, self.N0))


def fit_gap_params(mu, gamma: float) -> GapFit:
    """Largest kappa with ``mu_{k+1} - mu_k >= kappa k**(gamma-1)`` for all
    ``N0 < k < K``, at the smallest admissible ``N0 >= 1`` (positions 1..K)."""
    mu = np.asarray(mu, dtype=float)
    K = mu.size
    if K < 4:
        raise ParameterError("need at least 4 eigenvalues")
    k = np.arange(1, K)
    ratio = np.diff(mu) / k ** (gamma - 1)  # ratio[k-1] belongs to position k
    # suffix minima over positions k > N0
    suffix = np.minimum.accumulate(ratio[::-1])[::-1]
    for n0 in range(1, K // 2):
        kappa = suffix[n0]
        if kappa > 0:
            return GapFit(float(kappa), n0, True)
    return GapFit(float("nan"), K // 2, False)


def sum_dist_bound(kappa: float, gamma: float, k, j):
    """Lower bound ``(kappa/gamma)((k-1)**gamma - j**gamma)`` on ``mu_k - mu_j``."""
    k = np.asarray(k, dtype=float)
    j = np.asarray(j, dtype=float)
    return kappa / gamma * ((k - 1) ** gamma - j**gamma)

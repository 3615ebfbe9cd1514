"""Perturbation forms b, their matrices b(psi_m, psi_n), and the local
form-subordination exponents.

``b(f, g) = <B f, g>`` is linear in its first argument. Matrix positions are
1-based (see :mod:`rieszlab.models`); ``FormMatrix.entries[m-1, n-1]`` holds
``b(psi_m, psi_n)``, so the operator matrix of ``B`` is ``entries.T``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import models as mdl
from .errors import DegenerateError, DomainError, ParameterError
from .quadrature import panel_nodes, refine_breaks

NOISE_FLOOR = 1e-12
QUAD_TOL = 1e-10
ASSEMBLY_ORDER = 10
GAUSS_TAIL = 9.0  # exp(-81/2) ~ 2.6e-18


# ---------------------------------------------------------------------------
# parts


@dataclass(frozen=True)
class FunctionalPotential:
    """Multiplication potential ``V``.

    ``catalog`` is one of ``gaussian`` (params: sigma, center; integral equals
    the amplitude), ``box`` (params: x1, x2), ``powerDecay`` (params: eps;
    ``V = a (1 + x^2)^(-(1+eps)/2)``) or ``sampled`` (``grid`` holds nodes and
    values; linear interpolation, zero outside).
    """

    catalog: str
    amplitude: complex = 1.0
    params: tuple[float, ...] = ()
    grid: tuple[tuple[float, ...], tuple[complex, ...]] | None = None
    window: tuple[float, float] | None = None
    decay: tuple[float, float] | None = None  # (p, tau) tag

    def __post_init__(self):
        if self.catalog not in ("gaussian", "box", "powerDecay", "sampled"):
            raise ParameterError(f"unknown potential catalog id {self.catalog!r}")
        if self.catalog == "sampled" and self.grid is None:
            raise ParameterError("sampled potential needs a grid")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a = complex(self.amplitude)
        if self.catalog == "gaussian":
            sig, c = self.params[0], (self.params[1] if len(self.params) > 1 else 0.0)
            v = a * np.exp(-0.5 * ((x - c) / sig) ** 2) / (sig * math.sqrt(2 * math.pi))
        elif self.catalog == "box":
            x1, x2 = self.params
            v = np.where((x >= x1) & (x <= x2), a, 0.0 + 0.0j)
        elif self.catalog == "powerDecay":
            eps = self.params[0]
            v = a * (1.0 + x * x) ** (-(1.0 + eps) / 2)
        else:
            xs = np.asarray(self.grid[0], dtype=float)
            vs = np.asarray(self.grid[1], dtype=complex)
            v = a * (np.interp(x, xs, vs.real, left=0.0, right=0.0) + 1j * np.interp(x, xs, vs.imag, left=0.0, right=0.0))
        v = np.asarray(v, dtype=complex)
        if self.window is not None:
            v = np.where((x >= self.window[0]) & (x <= self.window[1]), v, 0.0)
        return v

    def support(self) -> tuple[float, float]:
        if self.catalog == "gaussian":
            sig, c = self.params[0], (self.params[1] if len(self.params) > 1 else 0.0)
            lo, hi = c - GAUSS_TAIL * sig, c + GAUSS_TAIL * sig
        elif self.catalog == "box":
            lo, hi = self.params
        elif self.catalog == "powerDecay":
            lo, hi = -math.inf, math.inf
        else:
            lo, hi = self.grid[0][0], self.grid[0][-1]
        if self.window is not None:
            lo, hi = max(lo, self.window[0]), min(hi, self.window[1])
        return lo, hi

    def breakpoints(self) -> list[float]:
        pts: list[float] = []
        if self.catalog == "box":
            pts += list(self.params)
        elif self.catalog == "sampled":
            pts += list(self.grid[0])
        if self.window is not None:
            pts += list(self.window)
        return pts

    @property
    def is_even(self) -> bool:
        if self.window is not None and self.window[0] != -self.window[1]:
            return False
        if self.catalog == "gaussian":
            return len(self.params) < 2 or self.params[1] == 0.0
        if self.catalog == "box":
            return self.params[0] == -self.params[1]
        if self.catalog == "powerDecay":
            return True
        xs = np.asarray(self.grid[0])
        vs = np.asarray(self.grid[1], dtype=complex)
        return bool(np.allclose(xs, -xs[::-1], rtol=0, atol=0) and np.array_equal(vs, vs[::-1]))

    @property
    def is_real(self) -> bool:
        if complex(self.amplitude).imag != 0:
            return False
        if self.catalog == "sampled":
            return bool(np.all(np.asarray(self.grid[1], dtype=complex).imag == 0))
        return True

    def scaled(self, c: complex) -> "FunctionalPotential":
        return replace(self, amplitude=complex(self.amplitude) * c)


def gaussian(a: complex = 1.0, sigma: float = 1.0, center: float = 0.0, **kw) -> FunctionalPotential:
    if not sigma > 0:
        raise ParameterError("gaussian width must be positive")
    return FunctionalPotential("gaussian", complex(a), (float(sigma), float(center)), **kw)


def box(a: complex, x1: float, x2: float, **kw) -> FunctionalPotential:
    if not x2 > x1:
        raise ParameterError("box needs x1 < x2")
    return FunctionalPotential("box", complex(a), (float(x1), float(x2)), **kw)


def power_decay(a: complex = 1.0, eps: float = 0.5, **kw) -> FunctionalPotential:
    if not eps > 0:
        raise ParameterError("powerDecay needs eps > 0")
    return FunctionalPotential("powerDecay", complex(a), (float(eps),), **kw)


def sampled(xs: Sequence[float], vs: Sequence[complex], a: complex = 1.0, **kw) -> FunctionalPotential:
    xs = tuple(float(v) for v in xs)
    if any(b <= a_ for a_, b in zip(xs[:-1], xs[1:])):
        raise ParameterError("sampled grid must be strictly increasing")
    return FunctionalPotential("sampled", complex(a), (), (xs, tuple(complex(v) for v in vs)), **kw)


@dataclass(frozen=True)
class DeltaSum:
    """``sum_k nu_k delta(x - x_k)``; ``pairs`` holds ``(nu_k, x_k)``."""

    pairs: tuple[tuple[complex, float], ...]
    tail_tol: float = 1e-12

    def __post_init__(self):
        nus = np.abs([complex(p[0]) for p in self.pairs])
        if not np.all(np.isfinite(nus)):
            raise ParameterError("delta couplings must be finite")

    @property
    def l1_norm(self) -> float:
        return float(sum(abs(complex(nu)) for nu, _ in self.pairs))

    def scaled(self, c: complex) -> "DeltaSum":
        return DeltaSum(tuple((complex(nu) * c, x) for nu, x in self.pairs), self.tail_tol)


@dataclass(frozen=True)
class RobinBoundary:
    """``nu_plus |psi(l)|^2 - nu_minus |psi(-l)|^2`` on the Neumann interval."""

    nu_plus: complex
    nu_minus: complex

    def scaled(self, c: complex) -> "RobinBoundary":
        return RobinBoundary(complex(self.nu_plus) * c, complex(self.nu_minus) * c)


@dataclass(frozen=True, eq=False)
class ExplicitMatrix:
    """Operator matrix of ``B`` in the unperturbed basis (``B[m-1, n-1] = <B e_n, e_m>``).

    Either a fixed ``matrix`` or a band generator with
    ``b_k^(j) = scale * k**omega`` on the diagonals ``j`` in ``offsets``
    (``k`` the row position of the upper entry).
    """

    matrix: np.ndarray | None = None
    omega: float | None = None
    scale: complex = 1.0
    offsets: tuple[int, ...] = (-1, 0, 1)

    def operator_block(self, M: int) -> np.ndarray:
        if self.matrix is not None:
            mat = np.asarray(self.matrix, dtype=complex)
            if M > mat.shape[0]:
                raise ParameterError(f"explicit matrix has size {mat.shape[0]}, {M} requested")
            return mat[:M, :M].copy()
        out = np.zeros((M, M), dtype=complex)
        for j in self.offsets:
            length = M - abs(j)
            if length <= 0:
                continue
            k = np.arange(1, length + 1, dtype=float)
            vals = complex(self.scale) * k ** self.omega
            out += np.diag(vals, j)
        return out

    def scaled(self, c: complex) -> "ExplicitMatrix":
        if self.matrix is not None:
            return ExplicitMatrix(matrix=np.asarray(self.matrix) * c)
        return ExplicitMatrix(omega=self.omega, scale=complex(self.scale) * c, offsets=self.offsets)


def band_matrix(omega: float, scale: complex = 1.0, offsets: tuple[int, ...] = (-1, 0, 1)) -> ExplicitMatrix:
    return ExplicitMatrix(omega=float(omega), scale=complex(scale), offsets=tuple(offsets))


Part = Union[FunctionalPotential, DeltaSum, RobinBoundary, ExplicitMatrix]


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    parts: tuple[Part, ...]

    def __init__(self, parts: Sequence[Part] | Part):
        if not isinstance(parts, (list, tuple)):
            parts = (parts,)
        object.__setattr__(self, "parts", tuple(parts))

    def scaled(self, c: complex) -> "PerturbationSpec":
        return PerturbationSpec([p.scaled(c) for p in self.parts])

    @property
    def is_zero(self) -> bool:
        return len(self.parts) == 0


# ---------------------------------------------------------------------------
# assembly


def _functional_interval(model, V: FunctionalPotential, kmax: int) -> tuple[float, float]:
    lo, hi = V.support()
    dlo, dhi = mdl.domain(model)
    if isinstance(mdl_kind(model), mdl.NeumannInterval):
        lo, hi = max(lo, dlo), min(hi, dhi)
    else:
        wlo, whi = mdl.envelope_window(model, kmax + 1)
        lo, hi = max(lo, wlo), min(hi, whi)
    return lo, hi


def mdl_kind(model):
    return model.kind if isinstance(model, mdl.ModelSpec) else model


def _max_frequency(model, kmax: int) -> float:
    mu = float(mdl.eigenvalues(model, kmax + 1)[-1])
    return 2.0 * math.sqrt(max(mu, 1.0))


def _oscillation_breaks(lo: float, hi: float, freq: float, extra: Sequence[float]) -> np.ndarray:
    """Panel edges no wider than a quarter of the period ``2 pi / freq``."""
    width = 0.25 * 2 * math.pi / freq
    edges = sorted({lo, hi, *[p for p in extra if lo < p < hi]})
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((b - a) / width)))
        pieces.append(np.linspace(a, b, n + 1)[:-1])
    pieces.append(np.array([hi]))
    return np.concatenate(pieces)


def _check_model(model, part):
    if isinstance(part, RobinBoundary) and not isinstance(mdl_kind(model), mdl.NeumannInterval):
        raise DomainError("Robin boundary parts need the Neumann interval model")
    if isinstance(part, (FunctionalPotential, DeltaSum, RobinBoundary)) and not mdl.ModelSpec.has_eigenfunctions.fget(_as_spec(model)):
        raise DomainError("diagonal models only accept explicit-matrix perturbations")
    if isinstance(part, DeltaSum):
        lo, hi = mdl.domain(model)
        for _, x in part.pairs:
            if not lo <= x <= hi:
                raise DomainError(f"delta location {x} outside the model domain")


def _as_spec(model):
    if isinstance(model, mdl.ModelSpec):
        return model
    return mdl.ModelSpec(model, 1.0, 1.0, 1)


def form_entry(model, pert: PerturbationSpec | Part, m: int, n: int, tol: float = QUAD_TOL) -> complex:
    """``b(psi_m, psi_n)`` at 1-based positions ``m, n``."""
    if m < 1 or n < 1:
        raise ParameterError("positions start at 1")
    if not isinstance(pert, PerturbationSpec):
        pert = PerturbationSpec(pert)
    km, kn = m - 1, n - 1
    total = 0j
    for part in pert.parts:
        _check_model(model, part)
        if isinstance(part, FunctionalPotential):
            kmax = max(km, kn)
            lo, hi = _functional_interval(model, part, kmax)
            if hi <= lo:
                continue
            if mdl.is_symmetric(model) and part.is_even and (km + kn) % 2 == 1:
                continue
            freq = _max_frequency(model, kmax)
            breaks = _oscillation_breaks(lo, hi, freq, part.breakpoints())
            f = lambda x: part(x) * mdl.eigenfunction(model, km, x) * mdl.eigenfunction(model, kn, x)
            total += _integrate_on_breaks(f, breaks, tol)
        elif isinstance(part, DeltaSum):
            for nu, x in part.pairs:
                total += complex(nu) * float(mdl.eigenfunction(model, km, x)[0]) * float(mdl.eigenfunction(model, kn, x)[0])
        elif isinstance(part, RobinBoundary):
            l = mdl_kind(model).l
            pm = mdl.eigenfunction(model, km, [l, -l])
            pn = mdl.eigenfunction(model, kn, [l, -l])
            total += complex(part.nu_plus) * pm[0] * pn[0] - complex(part.nu_minus) * pm[1] * pn[1]
        elif isinstance(part, ExplicitMatrix):
            M = max(m, n)
            total += part.operator_block(M)[n - 1, m - 1]
        else:
            raise ParameterError(f"unknown perturbation part {part!r}")
    return complex(total)


def _integrate_on_breaks(f, breaks: np.ndarray, tol: float, order: int = ASSEMBLY_ORDER) -> complex:
    x, w = panel_nodes(breaks, order)
    prev = np.sum(w * f(x))
    for _ in range(8):
        breaks = refine_breaks(breaks)
        x, w = panel_nodes(breaks, order)
        cur = np.sum(w * f(x))
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    from .errors import QuadratureError

    raise QuadratureError("form entry quadrature did not converge")


@dataclass
class FormMatrix:
    M: int
    entries: np.ndarray
    alpha_fit: float = float("nan")
    Mb_fit: float = float("nan")
    admissible: bool = False
    gamma: float = float("nan")
    max_residual: float = float("nan")
    label: str = ""

    @property
    def operator(self) -> np.ndarray:
        """Matrix of B: ``operator[j, n] = b(psi_n, psi_j)``."""
        return self.entries.T

    def block(self, M: int) -> "FormMatrix":
        if M > self.M:
            raise ParameterError(f"block {M} larger than matrix {self.M}")
        return FormMatrix(M, self.entries[:M, :M].copy(), self.alpha_fit, self.Mb_fit, self.admissible, self.gamma, self.max_residual, self.label)

    def scaled(self, c: complex) -> "FormMatrix":
        fm = FormMatrix(self.M, self.entries * c, gamma=self.gamma, label=self.label)
        return fm


def functional_block(model, V: FunctionalPotential, M: int, tol: float = QUAD_TOL, order: int = ASSEMBLY_ORDER) -> np.ndarray:
    """All ``int V psi_m psi_n`` for positions 1..M on one shared oscillation-resolving grid,
    refined until halving the panels changes no entry by more than ``tol``."""
    lo, hi = _functional_interval(model, V, M - 1)
    if hi <= lo:
        return np.zeros((M, M), dtype=complex)
    breaks = _oscillation_breaks(lo, hi, _max_frequency(model, M - 1), V.breakpoints())

    def assemble(br):
        x, w = panel_nodes(br, order)
        psi = mdl.eigenfunctions(model, M, x)
        weighted = psi * (w * V(x))[None, :]
        out = weighted @ psi.T
        return 0.5 * (out + out.T)

    prev = assemble(breaks)
    for _ in range(6):
        breaks = refine_breaks(breaks)
        cur = assemble(breaks)
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) <= tol * scale:
            prev = cur
            break
        prev = cur
    else:
        from .errors import QuadratureError

        raise QuadratureError("form matrix quadrature did not converge")
    if mdl.is_symmetric(model) and V.is_even:
        idx = np.arange(M)
        prev[(idx[:, None] + idx[None, :]) % 2 == 1] = 0.0
    return prev


def form_matrix(model, pert: PerturbationSpec | Part, M: int, fit: bool = True, tol: float = QUAD_TOL, cache: "FormMatrixCache | None" = None) -> FormMatrix:
    if M < 2:
        raise ParameterError("form matrix needs M >= 2")
    if not isinstance(pert, PerturbationSpec):
        pert = PerturbationSpec(pert)
    if cache is not None:
        hit = cache.get(model, pert, M)
        if hit is not None:
            return hit
    entries = np.zeros((M, M), dtype=complex)
    for part in pert.parts:
        _check_model(model, part)
        if isinstance(part, FunctionalPotential):
            entries += functional_block(model, part, M, tol)
        elif isinstance(part, DeltaSum):
            if part.pairs:
                xs = np.array([x for _, x in part.pairs])
                nus = np.array([complex(nu) for nu, _ in part.pairs])
                psi = mdl.eigenfunctions(model, M, xs)
                entries += (psi * nus[None, :]) @ psi.T
        elif isinstance(part, RobinBoundary):
            l = mdl_kind(model).l
            psi = mdl.eigenfunctions(model, M, [l, -l])
            entries += complex(part.nu_plus) * np.outer(psi[:, 0], psi[:, 0]) - complex(part.nu_minus) * np.outer(psi[:, 1], psi[:, 1])
        elif isinstance(part, ExplicitMatrix):
            entries += part.operator_block(M).T
        else:
            raise ParameterError(f"unknown perturbation part {part!r}")
    gamma = _as_spec(model).gap_gamma if isinstance(model, mdl.ModelSpec) else float("nan")
    fm = FormMatrix(M, entries, gamma=gamma)
    if fit and not math.isnan(gamma):
        try:
            res = fit_alpha(fm, gamma)
            fm.alpha_fit, fm.Mb_fit, fm.max_residual, fm.admissible = res.alpha, res.Mb, res.max_residual, res.admissible
        except DegenerateError:
            pass
    if cache is not None:
        cache.put(model, pert, fm)
    return fm


class FormMatrixCache:
    """Per (model, perturbation) store; a larger request recomputes, a smaller one slices."""

    def __init__(self):
        self._store: dict[tuple, FormMatrix] = {}

    def _key(self, model, pert):
        return (repr(model), tuple(_part_key(p) for p in pert.parts))

    def get(self, model, pert, M: int) -> FormMatrix | None:
        fm = self._store.get(self._key(model, pert))
        if fm is None or fm.M < M:
            return None
        return fm if fm.M == M else _refit(fm.block(M))

    def put(self, model, pert, fm: FormMatrix) -> None:
        key = self._key(model, pert)
        old = self._store.get(key)
        if old is None or old.M < fm.M:
            self._store[key] = fm


def _part_key(part) -> str:
    # reprs of large arrays are abbreviated, so explicit matrices key on their bytes
    if isinstance(part, ExplicitMatrix) and part.matrix is not None:
        mat = np.ascontiguousarray(part.matrix, dtype=complex)
        return "matrix:" + hashlib.sha256(mat.tobytes() + repr(mat.shape).encode()).hexdigest()
    return repr(part)


def _refit(fm: FormMatrix) -> FormMatrix:
    if not math.isnan(fm.gamma):
        try:
            res = fit_alpha(fm, fm.gamma)
            fm.alpha_fit, fm.Mb_fit, fm.max_residual, fm.admissible = res.alpha, res.Mb, res.max_residual, res.admissible
        except DegenerateError:
            pass
    return fm


# ---------------------------------------------------------------------------
# subordination exponents


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    Mb: float
    max_residual: float
    admissible: bool
    count: int
    window: int  # fit is certified only up to this truncation

    def __iter__(self):
        return iter((self.alpha, self.Mb, self.max_residual))


def _flat_midpoint(f, a: float, rtol: float = 1e-11) -> float:
    """Midpoint of the interval where the convex ``f`` stays within ``rtol`` of ``f(a)``.

    The Chebyshev spread is piecewise linear and can be flat at its minimum;
    the midpoint makes the choice independent of rounding (and of scaling)."""
    level = f(a) * (1 + rtol) + 1e-300

    def edge(direction: float) -> float:
        step = 1e-6
        while f(a + direction * step) <= level and step < 8.0:
            step *= 2
        inner, outer = 0.0, step
        for _ in range(60):
            mid = 0.5 * (inner + outer)
            if f(a + direction * mid) <= level:
                inner = mid
            else:
                outer = mid
        return a + direction * inner

    return 0.5 * (edge(-1.0) + edge(1.0))


def fit_alpha(fm: FormMatrix | np.ndarray, gamma: float, floor: float = NOISE_FLOOR, mask: np.ndarray | None = None) -> AlphaFit:
    """Uniform envelope ``|b(m, n)| <= Mb / (m n)**alpha`` over the computed window.

    ``alpha`` minimises the Chebyshev spread of ``log|b| + alpha log(mn)``
    (coarse grid, then a bounded scalar refinement); ``Mb`` is then the
    smallest constant making the envelope hold on every retained entry.
    """
    entries = fm.entries if isinstance(fm, FormMatrix) else np.asarray(fm)
    M = entries.shape[0]
    mag = np.abs(entries)
    top = float(mag.max()) if mag.size else 0.0
    keep = mag > floor * max(top, 1e-300)
    if mask is not None:
        keep &= mask
    if top == 0.0 or keep.sum() < 10:
        raise DegenerateError("fewer than 10 entries above the noise floor")
    pos = np.arange(1, M + 1, dtype=float)
    X = np.log(pos[:, None] * pos[None, :])[keep]
    Y = np.log(mag[keep])

    def spread(a: float) -> float:
        z = Y + a * X
        return float(z.max() - z.min())

    grid = np.arange(-4.0, 4.0 + 1e-9, 0.01)
    coarse = np.array([spread(a) for a in grid])
    a0 = float(grid[int(np.argmin(coarse))])
    res = minimize_scalar(spread, bounds=(a0 - 0.01, a0 + 0.01), method="bounded", options={"xatol": 1e-10})
    alpha = float(res.x) if res.fun <= coarse.min() else a0
    alpha = _flat_midpoint(spread, alpha)
    Mb = float(np.exp(np.max(Y + alpha * X)))
    return AlphaFit(alpha, Mb, 0.5 * spread(alpha), bool(2 * alpha + gamma > 1), int(keep.sum()), M)


@dataclass(frozen=True)
class LpTau:
    p: float
    tau: float = 0.0
    eps: float = 0.01


@dataclass(frozen=True)
class DecayL1:
    pass


@dataclass(frozen=True)
class Singular:
    s: float
    compact: bool = False


@dataclass(frozen=True)
class DeltaSumClass:
    pass


@dataclass(frozen=True)
class DeltaFixedPoint:
    pass


PerturbationClass = Union[LpTau, DecayL1, Singular, DeltaSumClass, DeltaFixedPoint]


class InadmissibleClassError(ParameterError):
    pass


def lp_tau_bound(beta: float, p: float) -> float:
    """Upper limit on ``tau`` for ``V`` in the weighted ``L^p`` class."""
    if p < 2:
        return 2.0 / 3.0 * (beta - 1) * (1 - 1 / (2 * p))
    return (beta - 2) / 2 + (0.0 if math.isinf(p) else 1 / p)


def predicted_alpha(beta: float, cls: PerturbationClass) -> float:
    if not beta > 1:
        raise InadmissibleClassError("β must exceed 1")
    if isinstance(cls, LpTau):
        p, tau = cls.p, cls.tau
        if not 1 <= p <= math.inf or tau < 0:
            raise InadmissibleClassError("need 1 <= p <= inf and tau >= 0")
        if not tau < lp_tau_bound(beta, p):
            raise InadmissibleClassError(f"tau={tau} violates tau < {lp_tau_bound(beta, p):.6g} for p={p}, β={beta}")
        if p < 2:
            core = (beta + 2) / 6 + (1 - beta) / (3 * p) - tau
        elif p == 2:
            core = 0.5 - tau - cls.eps
        else:
            core = (0.0 if math.isinf(p) else 1 / p) - tau
        return core / (beta + 2)
    if isinstance(cls, DecayL1):
        return 1 / (beta + 2)
    if isinstance(cls, Singular):
        if cls.compact:
            if not 0 <= cls.s < 0.5:
                raise InadmissibleClassError("compact singular class needs 0 <= s < 1/2")
            return (1 - beta * cls.s) / (beta + 2)
        if not 0 <= cls.s < (beta - 1) / (2 * beta):
            raise InadmissibleClassError(f"singular class needs 0 <= s < {(beta - 1) / (2 * beta):.6g}")
        return (1 - 2 * beta * cls.s) / (2 * (beta + 2))
    if isinstance(cls, DeltaSumClass):
        return (4 - beta) / (6 * (beta + 2))
    if isinstance(cls, DeltaFixedPoint):
        return 1 / (beta + 2)
    raise ParameterError(f"unknown perturbation class {cls!r}")


def p_subordination(alpha: float, gamma: float, tau: float) -> float:
    """Exponent ``p = max(0, 1 - tau/gamma)`` for ``0 < tau < 2 alpha + gamma - 1``."""
    if not 0 < tau < 2 * alpha + gamma - 1:
        raise ParameterError(f"tau must lie in (0, {2 * alpha + gamma - 1:.6g})")
    return max(0.0, 1.0 - tau / gamma)

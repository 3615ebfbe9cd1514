"""Scenario configuration: JSON with sections model, perturbation, stages,
tolerances and output. Unknown keys are errors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import models as mdl
from . import perturbations as pt
from .errors import ValidationError

SECTIONS = {"model", "perturbation", "stages", "tolerances", "output"}
MODEL_KEYS = {
    "neumann": {"kind", "l"},
    "single_well": {"kind", "beta"},
    "harmonic_exact": {"kind"},
    "diagonal": {"kind", "mu", "gamma"},
}
PART_KEYS = {
    "delta": {"type", "points"},
    "robin": {"type", "nu_plus", "nu_minus"},
    "gaussian": {"type", "amplitude", "sigma", "center"},
    "box": {"type", "amplitude", "x1", "x2"},
    "power_decay": {"type", "amplitude", "eps"},
    "sampled": {"type", "amplitude", "x", "v"},
    "band": {"type", "omega", "scale", "offsets"},
    "matrix": {"type", "entries"},
}
PERT_KEYS = {"parts", "class", "alpha", "Mb", "scale"}
CLASS_KEYS = {
    "lp_tau": {"kind", "p", "tau", "eps"},
    "decay_l1": {"kind"},
    "singular": {"kind", "s", "compact"},
    "delta_sum": {"kind"},
    "delta_fixed_point": {"kind"},
}
STAGE_KEYS = {
    "spectrum": {"M"},
    "formmatrix": {"M", "binary_cache"},
    "enclose": {"k_max"},
    "correct": {"n_max"},
    "diagnose": {"n_max"},
    "asym": {"check", "k_min", "k_max", "q", "tau", "potential"},
}
STAGE_ORDER = ("spectrum", "formmatrix", "enclose", "correct", "diagnose", "asym")
TOLERANCE_DEFAULTS = {"quadrature": 1e-10, "root": 1e-12, "deflation": 1e-12, "fit_fraction": 0.5}
OUTPUT_KEYS = {"dir"}
DEFAULT_M = 400


class ConfigError(ValidationError):
    pass


def _unknown(where: str, got: dict, allowed: set) -> None:
    extra = sorted(set(got) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _need(where: str, got: dict, key: str):
    if key not in got:
        raise ConfigError(f"missing key {key!r} in {where}")
    return got[key]


def parse_complex(v, where: str = "value") -> complex:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a number or [re, im]")


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}: expected a number")
    return float(v)


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer")
    return v


def load_text(text: str, source: str = "<config>") -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return cfg


def load(path: str | Path) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from exc
    return load_text(text, str(p))


def build_model(block: dict) -> mdl.ModelSpec:
    if not isinstance(block, dict):
        raise ConfigError("model must be an object")
    kind = _need("model", block, "kind")
    if kind not in MODEL_KEYS:
        raise ConfigError(f"unknown model kind {kind!r}")
    _unknown("model", block, MODEL_KEYS[kind])
    if kind == "neumann":
        return mdl.neumann_model(_num(block.get("l", 1.0), "model.l"))
    if kind == "single_well":
        return mdl.single_well_model(_num(_need("model", block, "beta"), "model.beta"))
    if kind == "harmonic_exact":
        return mdl.harmonic_model()
    mu = _need("model", block, "mu")
    if not isinstance(mu, list):
        raise ConfigError("model.mu must be a list")
    return mdl.diagonal_model([_num(v, "model.mu") for v in mu], _num(_need("model", block, "gamma"), "model.gamma"))


def build_part(block: dict, i: int):
    where = f"perturbation.parts[{i}]"
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    typ = _need(where, block, "type")
    if typ not in PART_KEYS:
        raise ConfigError(f"{where}: unknown part type {typ!r}")
    _unknown(where, block, PART_KEYS[typ])
    amp = parse_complex(block.get("amplitude", 1.0), f"{where}.amplitude")
    if typ == "delta":
        pts = _need(where, block, "points")
        pairs = []
        for j, p in enumerate(pts):
            _unknown(f"{where}.points[{j}]", p, {"nu", "x"})
            pairs.append((parse_complex(_need(where, p, "nu"), f"{where}.nu"), _num(_need(where, p, "x"), f"{where}.x")))
        return pt.DeltaSum(tuple(pairs))
    if typ == "robin":
        return pt.RobinBoundary(parse_complex(_need(where, block, "nu_plus"), where), parse_complex(_need(where, block, "nu_minus"), where))
    if typ == "gaussian":
        return pt.gaussian(amp, _num(block.get("sigma", 1.0), f"{where}.sigma"), _num(block.get("center", 0.0), f"{where}.center"))
    if typ == "box":
        return pt.box(amp, _num(_need(where, block, "x1"), where), _num(_need(where, block, "x2"), where))
    if typ == "power_decay":
        return pt.power_decay(amp, _num(block.get("eps", 0.5), f"{where}.eps"))
    if typ == "sampled":
        xs = [_num(v, f"{where}.x") for v in _need(where, block, "x")]
        vs = [parse_complex(v, f"{where}.v") for v in _need(where, block, "v")]
        if len(xs) != len(vs) or len(xs) < 2:
            raise ConfigError(f"{where}: x and v need equal length >= 2")
        return pt.sampled(xs, vs, amp)
    if typ == "band":
        offs = tuple(_int(v, f"{where}.offsets") for v in block.get("offsets", [-1, 0, 1]))
        return pt.band_matrix(_num(_need(where, block, "omega"), where), parse_complex(block.get("scale", 1.0), where), offs)
    rows = _need(where, block, "entries")
    mat = np.array([[parse_complex(v, f"{where}.entries") for v in r] for r in rows], dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError(f"{where}: entries must be a square matrix")
    return pt.ExplicitMatrix(matrix=mat)


def build_class(block: dict):
    kind = _need("perturbation.class", block, "kind")
    if kind not in CLASS_KEYS:
        raise ConfigError(f"unknown perturbation class {kind!r}")
    _unknown("perturbation.class", block, CLASS_KEYS[kind])
    if kind == "lp_tau":
        return pt.LpTau(_num(_need("perturbation.class", block, "p"), "p"), _num(block.get("tau", 0.0), "tau"), _num(block.get("eps", 0.01), "eps"))
    if kind == "decay_l1":
        return pt.DecayL1()
    if kind == "singular":
        return pt.Singular(_num(_need("perturbation.class", block, "s"), "s"), bool(block.get("compact", False)))
    if kind == "delta_sum":
        return pt.DeltaSumClass()
    return pt.DeltaFixedPoint()


def build_perturbation(block: dict) -> pt.PerturbationSpec:
    if not isinstance(block, dict):
        raise ConfigError("perturbation must be an object")
    _unknown("perturbation", block, PERT_KEYS)
    parts = block.get("parts", [])
    if not isinstance(parts, list):
        raise ConfigError("perturbation.parts must be a list")
    spec = pt.PerturbationSpec([build_part(p, i) for i, p in enumerate(parts)])
    if "scale" in block:
        spec = spec.scaled(parse_complex(block["scale"], "perturbation.scale"))
    return spec


@dataclass
class Scenario:
    raw: dict
    model: mdl.ModelSpec
    perturbation: pt.PerturbationSpec
    stages: dict[str, dict]
    tolerances: dict[str, float]
    output_dir: str
    pert_class: Any = None
    alpha: float | None = None
    Mb: float | None = None

    @property
    def M(self) -> int:
        return int(self.stages.get("formmatrix", {}).get("M", self.stages.get("spectrum", {}).get("M", DEFAULT_M)))

    def ordered_stages(self) -> list[str]:
        return [s for s in STAGE_ORDER if s in self.stages]


def build_scenario(cfg: dict) -> Scenario:
    _unknown("config", cfg, SECTIONS)
    model = build_model(_need("config", cfg, "model"))
    pblock = cfg.get("perturbation", {"parts": []})
    pert = build_perturbation(pblock)
    stages_raw = cfg.get("stages", {})
    if isinstance(stages_raw, list):
        stages_raw = {s: {} for s in stages_raw}
    if not isinstance(stages_raw, dict):
        raise ConfigError("stages must be an object or a list of names")
    stages = {}
    for name, opts in stages_raw.items():
        if name not in STAGE_KEYS:
            raise ConfigError(f"unknown stage {name!r}")
        opts = opts or {}
        _unknown(f"stages.{name}", opts, STAGE_KEYS[name])
        stages[name] = dict(opts)
    tol = dict(TOLERANCE_DEFAULTS)
    tblock = cfg.get("tolerances", {})
    _unknown("tolerances", tblock, set(TOLERANCE_DEFAULTS))
    for k, v in tblock.items():
        tol[k] = _num(v, f"tolerances.{k}")
        if not tol[k] > 0:
            raise ConfigError(f"tolerances.{k} must be positive")
    oblock = cfg.get("output", {})
    _unknown("output", oblock, OUTPUT_KEYS)
    out = str(oblock.get("dir", "rieszlab_out"))
    cls = build_class(pblock["class"]) if "class" in pblock else None
    alpha = _num(pblock["alpha"], "perturbation.alpha") if "alpha" in pblock else None
    Mb = _num(pblock["Mb"], "perturbation.Mb") if "Mb" in pblock else None
    sc = Scenario(cfg, model, pert, stages, tol, out, cls, alpha, Mb)
    if sc.M < 2:
        raise ConfigError("truncation M must be at least 2")
    return sc


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    scenario: Scenario | None = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def lines(self) -> list[str]:
        if self.ok and not self.warnings:
            return ["ok"]
        return [f"error: {e}" for e in self.errors] + [f"warning: {w}" for w in self.warnings] + (["ok"] if self.ok else [])


def _beta_for(model: mdl.ModelSpec) -> float | None:
    if isinstance(model.kind, mdl.SingleWell):
        return model.kind.beta
    if isinstance(model.kind, mdl.HarmonicExact):
        return 2.0
    return None


def admissibility_warnings(sc: Scenario) -> list[str]:
    out = []
    gamma = sc.model.gap_gamma
    if sc.alpha is not None and not 2 * sc.alpha + gamma > 1:
        out.append(f"alpha={sc.alpha:g} with gamma={gamma:g} violates 2 alpha + gamma > 1")
    beta = _beta_for(sc.model)
    cls = sc.pert_class
    if cls is not None and beta is not None:
        if isinstance(cls, pt.LpTau) and not cls.tau < pt.lp_tau_bound(beta, cls.p):
            bound = pt.lp_tau_bound(beta, cls.p)
            rule = "tau < (2/3)(beta-1)(1-1/(2p))" if cls.p < 2 else "tau < (beta-2)/2 + 1/p"
            out.append(f"p={cls.p:g}, tau={cls.tau:g}, beta={beta:g} violates {rule} = {bound:.6g}")
        if isinstance(cls, pt.Singular):
            limit = 0.5 if cls.compact else (beta - 1) / (2 * beta)
            if not 0 <= cls.s < limit:
                out.append(f"singular order s={cls.s:g} outside [0, {limit:.6g}) for beta={beta:g}")
    return out


def validate_config(path: str | Path | None = None, strict: bool = False, cfg: dict | None = None) -> ValidationReport:
    """Schema validation plus admissibility predicates; the latter are warnings
    unless ``strict``."""
    rep = ValidationReport()
    try:
        if cfg is None:
            cfg = load(path)
        sc = build_scenario(cfg)
    except ValidationError as exc:
        rep.errors.append(str(exc))
        return rep
    warns = admissibility_warnings(sc)
    if strict:
        rep.errors.extend(warns)
    else:
        rep.warnings.extend(warns)
    rep.scenario = sc
    return rep


def parse_potential(text: str):
    """``catalog:amplitude[:p1[:p2]]``, e.g. ``gaussian:1.0`` or ``box:1:-0.5:0.5``."""
    bits = text.split(":")
    name = bits[0]
    try:
        nums = [float(b) for b in bits[1:]]
    except ValueError as exc:
        raise ConfigError(f"bad potential spec {text!r}") from exc
    a = nums[0] if nums else 1.0
    rest = nums[1:]
    if name == "gaussian":
        return pt.gaussian(a, *(rest[:2] or [1.0]))
    if name == "box":
        if len(rest) != 2:
            raise ConfigError("box potential needs box:a:x1:x2")
        return pt.box(a, rest[0], rest[1])
    if name in ("power_decay", "powerDecay"):
        return pt.power_decay(a, *(rest[:1] or [0.5]))
    raise ConfigError(f"unknown potential {name!r}")

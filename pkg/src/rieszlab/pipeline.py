"""Scenario orchestration: model, form matrix, enclosure, corrections,
diagnostics and asymptotic checks, each writing its reports."""

from __future__ import annotations

import math
from functools import cached_property
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import corrections as cor
from . import diagnostics as dia
from . import localization as loc
from . import models as mdl
from . import perturbations as pt
from . import reports as rep
from .config import ConfigError, Scenario, parse_potential
from .errors import NumericalError

SPECTRUM_COLUMNS = ("k", "mu", "gap", "ratio_to_asymptotic")
FIT_COLUMNS = ("k", "observed", "target", "ratio")
GALERKIN_COLUMNS = ("index", "re", "im", "proj_norm")


class StageFailure(Exception):
    """A numerical error tagged with the pipeline stage it came from."""

    def __init__(self, stage: str, cause: NumericalError):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def asymptotic_ratio(model: mdl.ModelSpec, mu: np.ndarray) -> np.ndarray:
    """``mu`` over its leading law at model index ``k`` (position ``k + 1``); NaN where undefined."""
    k = np.arange(mu.size, dtype=float)
    out = np.full(mu.size, math.nan)
    kind = model.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if isinstance(kind, mdl.NeumannInterval):
            base = (k * math.pi / (2 * kind.l)) ** 2
        elif isinstance(kind, (mdl.SingleWell, mdl.HarmonicExact)):
            beta = 2.0 if isinstance(kind, mdl.HarmonicExact) else kind.beta
            om, _ = mdl.omega_constants(beta)
            base = (math.pi * k / om) ** (2 * beta / (beta + 2))
        else:
            return out
        good = k > 0
        out[good] = mu[good] / base[good]
    return out


class Pipeline:
    def __init__(self, scenario: Scenario, out_dir: str | Path | None = None):
        self.sc = scenario
        self.out = Path(out_dir if out_dir is not None else scenario.output_dir)
        self.header = rep.header_line(rep.config_hash(scenario.raw))
        self.stage = "setup"
        self.written: list[Path] = []

    # -- computations ------------------------------------------------------

    @cached_property
    def mu(self) -> np.ndarray:
        return loc.model_eigenvalues(self.sc.model, self.sc.M)

    @cached_property
    def form(self) -> pt.FormMatrix:
        fm = pt.form_matrix(self.sc.model, self.sc.perturbation, self.sc.M, tol=self.sc.tolerances["quadrature"])
        if self.sc.alpha is not None:
            fm.alpha_fit = self.sc.alpha
            fm.admissible = bool(2 * self.sc.alpha + self.sc.model.gap_gamma > 1)
        if self.sc.Mb is not None:
            fm.Mb_fit = self.sc.Mb
        return fm

    @property
    def k_max(self) -> int:
        return int(self.sc.stages.get("enclose", {}).get("k_max", int(0.9 * self.sc.M)))

    @cached_property
    def layout(self) -> loc.EnclosureLayout | None:
        if "enclose" not in self.sc.stages:
            return None
        fm = self.form
        if not fm.admissible:
            raise ConfigError("enclosure needs admissible subordination parameters (2 alpha + gamma > 1)")
        return loc.find_enclosure_params(self.sc.model, fm.alpha_fit, fm.Mb_fit, k_max=self.k_max)

    @cached_property
    def galerkin(self) -> cor.GalerkinSpectrum:
        return cor.galerkin_spectrum(self.sc.model, self.form, self.layout, mu=self.mu)

    @property
    def n_max(self) -> int:
        for st in ("correct", "diagnose"):
            if "n_max" in self.sc.stages.get(st, {}):
                return int(self.sc.stages[st]["n_max"])
        return min(200, self.sc.M // 2)

    @cached_property
    def records(self) -> list[cor.CorrectionRecord]:
        lo = (self.layout.N if self.layout is not None else self.sc.model.gap_N0) + 1
        hi = min(self.n_max, self.sc.M)
        return cor.correction_records(self.sc.model, self.form, self.galerkin, range(lo, hi + 1))

    # -- stages ------------------------------------------------------------

    def _write(self, name: str, text: str | bytes) -> None:
        self.written.append(rep.write_atomic(self.out / name, text))

    def run(self, stages: list[str] | None = None) -> list[Path]:
        for st in stages if stages is not None else self.sc.ordered_stages():
            self.stage = st
            try:
                getattr(self, f"stage_{st}")()
            except NumericalError as exc:
                raise StageFailure(st, exc) from exc
        return self.written

    def stage_spectrum(self) -> None:
        mu = self.mu
        gap = np.append(np.diff(mu), math.nan)
        ratio = asymptotic_ratio(self.sc.model, mu)
        rows = [(i + 1, mu[i], gap[i], ratio[i]) for i in range(mu.size)]
        self._write("spectrum.csv", rep.csv_text(SPECTRUM_COLUMNS, rows, self.header))

    def stage_formmatrix(self) -> None:
        fm = self.form
        e = fm.entries
        M = fm.M
        rows = ((m + 1, n + 1, e[m, n].real, e[m, n].imag) for m in range(M) for n in range(M))
        self._write("formmatrix.csv", rep.csv_text(("m", "n", "re", "im"), rows, self.header))
        if self.sc.stages.get("formmatrix", {}).get("binary_cache", True):
            self._write("formmatrix.rzfm", rep.rzfm_bytes(e))
        fit = {
            "alpha": fm.alpha_fit,
            "Mb": fm.Mb_fit,
            "admissible": fm.admissible,
            "max_residual": fm.max_residual,
            "gamma": self.sc.model.gap_gamma,
            "kappa": self.sc.model.gap_kappa,
            "N0": self.sc.model.gap_N0,
            "certification": f"window-certified up to M={M}",
        }
        self._write("formmatrix_fit.json", rep.json_text(fit, self.header))

    def stage_enclose(self) -> None:
        lay = self.layout
        report = loc.verify_enclosure(lay, self.galerkin.values, truncation=self.sc.M, index_limit=lay.k_max)
        body = report.to_json()
        body["max_sampled_bound"] = lay.max_bound
        body["samples_per_side"] = lay.per_side
        body["one_per_box"] = report.one_per_box
        body["strip_ok"] = report.strip_ok
        self._write("enclosure.json", rep.json_text(body, self.header))

    def stage_correct(self) -> None:
        rows = [cor.record_row(r) for r in self.records]
        self._write("corrections.csv", rep.csv_text(cor.CSV_COLUMNS, rows, self.header))
        g = self.galerkin
        grow = []
        for n in range(1, self.sc.M + 1):
            col = int(g.pairing[n - 1])
            if col < 0:
                grow.append((n, math.nan, math.nan, math.nan))
                continue
            try:
                pn = g.proj_norm(n)
            except NumericalError:
                pn = math.inf
            grow.append((n, g.values[col].real, g.values[col].imag, pn))
        self._write("galerkin.csv", rep.csv_text(GALERKIN_COLUMNS, grow, self.header))

    def stage_diagnose(self) -> None:
        fm = self.form
        gamma = self.sc.model.gap_gamma
        rr = dia.riesz_report(self.records, fm.alpha_fit, gamma)
        body = rr.to_json()
        if fm.admissible:
            ss = dia.schur_row_sums(self.sc.model, fm.alpha_fit, n_max=self.n_max)
            body["schur_max_row"], body["schur_max_col"] = ss.max_row, ss.max_col
            body["schur_bounded"] = ss.bounded
        body["proj_norms_bounded"] = bool(rr.sup_proj_norm < math.inf)
        body["bari_increment_slope"] = rr.bari_increment_slope
        body["bari_trend_converges"] = rr.bari_trend_converges
        self._write("diagnostics.json", rep.json_text(body, self.header))

    def stage_asym(self) -> None:
        opts = self.sc.stages.get("asym", {})
        check = opts.get("check", "lambda1")
        potential = opts.get("potential")
        V = parse_potential(potential) if potential else next((p for p in self.sc.perturbation.parts if isinstance(p, pt.FunctionalPotential)), None)
        for name, text in asym_outputs(self.sc.model, check, V, opts, self.header):
            self._write(name, text)


def asym_outputs(model: mdl.ModelSpec, check: str, V, opts: dict, header: str) -> list[tuple[str, str]]:
    """Fit-report CSV and summary JSON of one asymptotic check."""
    k_min = int(opts.get("k_min", 20))
    k_max = int(opts.get("k_max", 100))
    if k_max <= k_min:
        raise ConfigError("asym k_max must exceed k_min")
    ks = range(k_min, k_max + 1)
    summary: dict = {"check": check}
    if check == "mu":
        beta = _beta(model)
        r_mu, r_gap = asy.check_mu_and_gaps(beta, ks)
        rows = [(int(k), o, t, r) for k, o, t, r in zip(r_mu.index, r_mu.observed, r_mu.target, r_mu.ratio)]
        grows = [(int(k), o, t, r) for k, o, t, r in zip(r_gap.index, r_gap.observed, r_gap.target, r_gap.ratio)]
        summary.update({"mu_terminal_ratio": r_mu.terminal_ratio, "gap_terminal_ratio": r_gap.terminal_ratio, "mu_drift": r_mu.drift, "gap_drift": r_gap.drift})
        return [
            ("mu_asym.csv", rep.csv_text(FIT_COLUMNS, rows, header)),
            ("gap_asym.csv", rep.csv_text(FIT_COLUMNS, grows, header)),
            ("mu_asym.json", rep.json_text(summary, header)),
        ]
    if check == "lambda1":
        if V is None:
            raise ConfigError("lambda1 check needs a potential")
        r = asy.check_lambda1_asym(model, V, ks)
        rows = [(int(k), complex(o).real, complex(t).real, complex(o / t).real if t != 0 else math.nan) for k, o, t in zip(r.index, r.observed, r.target)]
        target = complex(r.target[0])
        summary.update({"target": target, "power": asy._scale_power(model), "terminal_ratio": rows[-1][3]})
        return [("lambda1_asym.csv", rep.csv_text(FIT_COLUMNS, rows, header)), ("lambda1_asym.json", rep.json_text(summary, header))]
    if check == "lq":
        beta = _beta(model)
        q = float(opts.get("q", 2.0))
        tau = float(opts.get("tau", 0.0))
        r = asy.check_Lq_norms(beta, q, tau, ks)
        rows = [(int(k), o, t, o / t) for k, o, t in zip(r.index, r.observed, r.target)]
        summary.update(r.summary())
        summary.update({"q": q, "tau": tau})
        return [("lq_asym.csv", rep.csv_text(FIT_COLUMNS, rows, header)), ("lq_asym.json", rep.json_text(summary, header))]
    if check == "two_term":
        if V is None:
            raise ConfigError("two_term check needs a potential")
        if not isinstance(model.kind, mdl.HarmonicExact):
            raise ConfigError("two_term check runs on the harmonic_exact model")
        r = asy.two_term_errors(V, ks)
        rows = [(int(k), o, t, o / t) for k, o, t in zip(r.index, r.observed, r.target)]
        summary.update({"error_slope": r.slope, "required_below": r.target_slope, "verdict": bool(r.slope < r.target_slope)})
        return [("two_term_asym.csv", rep.csv_text(FIT_COLUMNS, rows, header)), ("two_term_asym.json", rep.json_text(summary, header))]
    raise ConfigError(f"unknown asymptotic check {check!r}")


def _beta(model: mdl.ModelSpec) -> float:
    if isinstance(model.kind, mdl.HarmonicExact):
        return 2.0
    if isinstance(model.kind, mdl.SingleWell):
        return model.kind.beta
    raise ConfigError("this check needs a single-well or harmonic model")

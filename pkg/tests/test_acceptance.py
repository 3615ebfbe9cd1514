"""Acceptance criteria 1-12; each test prints one PASS/FAIL line."""

import json
import math
import warnings

import numpy as np
import pytest

from rieszlab import asymptotics as asy
from rieszlab import corrections as cor
from rieszlab import diagnostics as dia
from rieszlab import localization as loc
from rieszlab import models as mdl
from rieszlab import perturbations as pt
from rieszlab.cli import main

NEUMANN = mdl.neumann_model(1.0)
HARMONIC = mdl.harmonic_model()


@pytest.fixture
def verdict(capsys):
    def emit(number: int, ok: bool, detail: str) -> bool:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return emit


def test_criterion_01_bohr_sommerfeld_remainder(verdict):
    k = np.arange(10, 501)
    err = np.array([abs(mdl.bs_eigenvalue(2.0, int(j)) - (2 * j + 1)) for j in k])
    worst = float(np.max(err * (k + 1)))
    assert verdict(1, worst <= 2, f"max (k+1)|bs - (2k+1)| over k in [10, 500] = {worst:.3e} (<= 2)")


def test_criterion_02_omega_constants(verdict):
    om2, omp2 = mdl.omega_constants(2.0)
    om1, omp1 = mdl.omega_constants(1.0)
    e = (abs(om2 - math.pi / 2), abs(omp2 - math.pi), abs(om1 - 4 / 3), abs(omp1 - 4))
    ok = e[0] <= 1e-10 and e[1] <= 1e-8 and e[2] <= 1e-10 and e[3] <= 1e-10
    assert verdict(2, ok, "errors " + ", ".join(f"{v:.1e}" for v in e) + " (tol 1e-10, 1e-8, 1e-10, 1e-10)")


def test_criterion_03_wkb_fidelity(verdict):
    Q = mdl.PowerWell(2)
    x = np.linspace(-16, 16, 8001)
    errs = []
    for k in (20, 60):
        st = mdl.wkb_state(Q, 2.0 * k + 1, k)
        w, h = mdl.wkb_psi(st, Q, x), mdl.hermite_psi(k, x)
        errs.append(float(np.linalg.norm(w - h) / np.linalg.norm(h)))
    ok = errs[0] <= 0.05 and errs[1] < errs[0]
    assert verdict(3, ok, f"relative L2 error k=20: {errs[0]:.4f} (<= 0.05), k=60: {errs[1]:.4f} (smaller)")


@pytest.mark.xfail(strict=True, reason="the block operator has projection norms 1/sqrt(1-t^2), not 1/(1-t^2), so the growth slope is about 1/2")
def test_criterion_04_counterexample_as_stated(verdict):
    ts = np.array([0.0, 0.3, 0.6, 0.9])
    res = dia.counterexample_blocks(1.0, ts, 4)
    norm_err = float(np.max(np.abs(res.oracle_norms - (1 / (1 - ts**2))[:, None])))
    grow = dia.counterexample_blocks(1.0, dia.parse_t_expression("1-1/k"), 50)
    slope = grow.growth_slope()
    ok = norm_err <= 1e-10 and abs(slope - 1.0) <= 0.05
    verdict(4, ok, f"max |oracle - 1/(1-t^2)| = {norm_err:.3e} (tol 1e-10); growth slope {slope:.4f} (1 +- 0.05); "
            f"oracle matches 1/sqrt(1-t^2) to {res.exact_norm_error:.1e}")
    assert ok


def test_criterion_05_enclosure_soundness(verdict, neumann_delta):
    sc = neumann_delta
    lay = sc.layout
    rep = loc.verify_enclosure(lay, sc.spectrum.values, truncation=400, index_limit=360)
    inner = [o for o in rep.outside if o["rank"] < 360]
    ok = lay.max_bound <= 0.5 and rep.one_per_box and rep.strip_ok and not inner
    assert verdict(5, ok, f"N={lay.N}, h={lay.h:g}, max sampled bound {lay.max_bound:.4f} (<= 1/2), "
                          f"one per box {rep.one_per_box}, strip holds {rep.strip_count} (N), outside below 360: {len(inner)}")


def test_criterion_06_correction_accuracy(verdict, neumann_delta):
    sc = neumann_delta
    recs = [r for r in sc.records if sc.layout.N < r.n <= 200]
    worse = [r.n for r in recs if r.residual2 > r.residual1]
    slope, count = cor.residual_slope(recs, sc.fm.alpha_fit, NEUMANN.gap_gamma)
    ok = not worse and abs(slope - 1) <= 0.3
    assert verdict(6, ok, f"residual2 > residual1 at {len(worse)} of {len(recs)} indices; slope {slope:.3f} over {count} points (1 +- 0.3)")


def test_criterion_07_first_correction_neumann(verdict):
    V = pt.gaussian(1.0, 0.015)
    n = np.arange(20, 101)
    dev = np.array([abs(pt.form_entry(NEUMANN, V, int(j) + 1, int(j) + 1) - 0.5) for j in n])
    ok = dev[-1] <= 0.02 and bool(np.all(np.diff(dev) < 0))
    assert verdict(7, ok, f"|lambda1 - 1/2| at n=100: {dev[-1]:.3e} (<= 0.02), strictly decreasing on [20, 100]: {bool(np.all(np.diff(dev) < 0))}")


def test_criterion_08_first_correction_harmonic(verdict):
    target = 1 / (math.pi * math.sqrt(2))
    val = pt.form_entry(HARMONIC, pt.gaussian(1.0, 1.0), 301, 301) * math.sqrt(300)
    ratio = abs(val / target)
    assert verdict(8, abs(ratio - 1) <= 0.05, f"n^(1/2) lambda1 / (1/(pi sqrt 2)) at n=300 = {ratio:.6f} (within 5%)")


def test_criterion_09_subordination_exponents(verdict):
    robin = pt.form_matrix(NEUMANN, pt.RobinBoundary(1j, 1j), 200).alpha_fit
    fm = pt.form_matrix(HARMONIC, pt.DeltaSum(((1.0, 0.0),)), 200, fit=False)
    idx = np.arange(200)
    even = (idx[:, None] % 2 == 0) & (idx[None, :] % 2 == 0)
    delta = pt.fit_alpha(fm, HARMONIC.gap_gamma, mask=even).alpha
    g = NEUMANN.gap_gamma
    below = pt.form_matrix(NEUMANN, pt.band_matrix(g - 1 - 0.1), 200).admissible
    above = pt.form_matrix(NEUMANN, pt.band_matrix(g - 1 + 0.1), 200).admissible
    ok = abs(robin) <= 0.02 and abs(delta - 0.25) <= 0.05 and below and not above
    assert verdict(9, ok, f"Robin alpha {robin:.4f} (0 +- 0.02), delta even alpha {delta:.4f} (0.25 +- 0.05), "
                          f"band admissible below {below}, above {above}")


def test_criterion_10_lq_exponents(verdict):
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", mdl.LowIndexWarning)
        for q in (1.0, 2.0, math.inf):
            r = asy.check_Lq_norms(2.0, q, 0.0, range(50, 301))
            out.append((q, r.slope, r.target_slope, r.verdict))
    ok = all(v for *_, v in out)
    detail = "; ".join(f"q={q:g}: {s:.4f} vs {t:.4f}" for q, s, t, _ in out)
    assert verdict(10, ok, detail + " (tol 0.03)")


def test_criterion_11_riesz_sanity(verdict, neumann_delta_sum):
    fm = pt.form_matrix(NEUMANN, pt.gaussian(0.8, 0.3, 0.2), 200)
    sp = cor.galerkin_spectrum(NEUMANN, fm)
    recs = cor.correction_records(NEUMANN, fm, sp, range(1, 181))
    sym = max(abs(r.proj_norm - 1) for r in recs)
    sc = neumann_delta_sum
    rr = dia.riesz_report(sc.records, sc.fm.alpha_fit, NEUMANN.gap_gamma)
    ok = sym <= 1e-8 and rr.sup_proj_norm <= 2 and abs(rr.proj_slope) < 0.05
    assert verdict(11, ok, f"real symmetric max |norm - 1| = {sym:.1e}; delta sum sup {rr.sup_proj_norm:.5f} (<= 2), "
                           f"trend slope {rr.proj_slope:.2e}")


def _scenario_runs(root):
    cfg = {
        "model": {"kind": "neumann", "l": 1.0},
        "perturbation": {"parts": [{"type": "delta", "points": [{"nu": [0, 0.3], "x": 0.0}]}]},
        "stages": {"spectrum": {"M": 400}, "formmatrix": {"M": 400}, "enclose": {"k_max": 360}, "correct": {"n_max": 200}, "diagnose": {"n_max": 200}},
    }
    sum_cfg = json.loads(json.dumps(cfg))
    sum_cfg["perturbation"]["parts"] = [{"type": "delta", "points": [{"nu": [0, 0.25], "x": 0.3}, {"nu": 0.25, "x": -0.55}]}]
    (root / "delta.json").write_text(json.dumps(cfg))
    (root / "delta_sum.json").write_text(json.dumps(sum_cfg))
    return [
        ["run", str(root / "delta.json")],
        ["run", str(root / "delta_sum.json")],
        ["counterexample", "--gamma", "1", "--t", "1-1/k", "--blocks", "50"],
        ["asym", "--beta", "2", "--check", "mu", "--k-min", "10", "--k-max", "500"],
        ["asym", "--neumann", "1", "--check", "lambda1", "--potential", "gaussian:1.0:0.015", "--k-min", "20", "--k-max", "100"],
        ["asym", "--beta", "2", "--check", "lq", "--q", "1", "--k-min", "50", "--k-max", "120"],
    ]


def test_criterion_12_determinism(verdict, tmp_path):
    runs = _scenario_runs(tmp_path)
    snaps = []
    for rep_i in range(2):
        out = tmp_path / f"rep{rep_i}"
        codes = [main(argv + ["--out", str(out / str(i))]) for i, argv in enumerate(runs)]
        assert codes == [0] * len(runs)
        snaps.append({str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()})
    same = snaps[0] == snaps[1]
    headers = all(b.startswith(b"# rieszlab ") or b.startswith(b"RZFM") or b'"_header": "rieszlab ' in b for b in snaps[0].values())
    assert verdict(12, same and headers, f"{len(snaps[0])} files over {len(runs)} scenarios byte-identical: {same}; headers present: {headers}")

from dataclasses import dataclass

import pytest

from rieszlab import corrections as cor
from rieszlab import localization as loc
from rieszlab import models as mdl
from rieszlab import perturbations as pt


@dataclass
class Scenario:
    model: mdl.ModelSpec
    fm: pt.FormMatrix
    layout: loc.EnclosureLayout
    spectrum: cor.GalerkinSpectrum
    records: list


def build_scenario(pert, M=400, k_max=360, n_max=200):
    model = mdl.neumann_model(1.0)
    fm = pt.form_matrix(model, pt.PerturbationSpec(pert), M)
    layout = loc.find_enclosure_params(model, fm.alpha_fit, fm.Mb_fit, k_max=k_max)
    spectrum = cor.galerkin_spectrum(model, fm, layout)
    records = cor.correction_records(model, fm, spectrum, range(layout.N + 1, n_max + 1))
    return Scenario(model, fm, layout, spectrum, records)


@pytest.fixture(scope="session")
def neumann_delta():
    """Neumann interval l=1 plus 0.3i delta at 0, truncated at M=400."""
    return build_scenario(pt.DeltaSum(((0.3j, 0.0),)))


@pytest.fixture(scope="session")
def neumann_delta_sum():
    """Neumann interval plus a non-self-adjoint delta sum of total coupling 0.5."""
    return build_scenario(pt.DeltaSum(((0.25j, 0.3), (0.25, -0.55))))

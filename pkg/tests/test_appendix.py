import math

import numpy as np
import pytest

from tctwophoton.appendix import (
    DEFECTS, ELEMENTS, INDEX, MALFORMED, MalformedFormula, appendix_elements, evaluate_corrected, evaluate_printed,
)
from tctwophoton.dynamics import evolve_reduced
from tctwophoton.model import AtomPreparation, ModelParams

PI = math.pi
FIG1A = ModelParams(0.1, 0.01, 0.01)
PREPS = [AtomPreparation(0, 0, PI / 2, 0), AtomPreparation(0, 0, 0, 0), AtomPreparation(PI / 4, 0, PI / 4, PI),
         AtomPreparation(0.3, 1.1, 1.2, -0.4)]


def test_rho11_for_both_excited():
    prep = AtomPreparation(0, 0, 0, 0)
    ref = evolve_reduced(FIG1A, prep, 1.0).rho[0, 0]
    assert abs(evaluate_printed("rho11", FIG1A, prep, 1.0) - ref) <= 1e-8


@pytest.mark.parametrize("params", [FIG1A, ModelParams(0.3, 0.4, 0.2)])
@pytest.mark.parametrize("prep", PREPS)
def test_corrected_expressions_reproduce_engine(params, prep):
    for gt in (0.7, 5.3):
        rho = evolve_reduced(params, prep, gt).rho
        for name in ELEMENTS:
            assert abs(evaluate_corrected(name, params, prep, gt) - rho[INDEX[name]]) <= 1e-12


@pytest.mark.parametrize("name", MALFORMED)
def test_malformed_entries_raise(name):
    with pytest.raises(MalformedFormula):
        evaluate_printed(name, FIG1A, PREPS[0], 1.0)


def test_well_formed_match_at_fig1a():
    for gt in np.linspace(0.5, 25, 8):
        rep = appendix_elements(FIG1A, PREPS[0], gt)
        assert rep.well_formed_ok
        assert {e.name for e in rep.errata} == set(MALFORMED)


def test_rho12_print_defect_shows_for_coherent_preparations():
    rep = appendix_elements(FIG1A, PREPS[3], 3.0)
    rho12 = next(e for e in rep.entries if e.name == "rho12")
    assert rho12.deviation > 1e-3 and rho12.corrected_deviation <= 1e-12
    assert rho12 in rep.errata and rho12.defect == DEFECTS["rho12"]


def test_every_defect_is_dispositioned():
    rep = appendix_elements(FIG1A, PREPS[3], 3.0)
    assert set(DEFECTS) == {e.name for e in rep.errata}
    for e in rep.errata:
        assert e.defect and np.isfinite(e.engine)

import math
import numpy as np
import pytest
from validation.demos import DEMO_CONFIGS, demo_config
from validation.oracles import fit_log_law, fit_slope
from validation.suites import (
    SUITES, CheckResult, at_least, at_most, mindlin_surface_error, random_arcs, run_suites
)


def test_check_helpers():
    assert at_most("s", "c", 0.5, 1.0).passed
    assert not at_most("s", "c", math.nan, 1.0).passed
    assert not at_least("s", "c", 0.1, 0.2).passed
    result = CheckResult("bem", "mean", False, 0.3, 0.1)
    assert result.as_row() == ("bem", "mean", False, 0.3, 0.1)
    assert result.as_dict()["check"] == "mean"


def test_random_arcs_are_disjoint(rng):
    for _ in range(50):
        arcs = random_arcs(rng, 2 * math.pi, 0.2)
        assert 1 <= len(arcs) <= 3
        ends = np.array(arcs).reshape(-1)
        assert np.all(np.diff(ends) > 0)


def test_law_fits_recover_coefficients():
    eps = np.array([1e-3, 3e-4, 1e-4, 3e-5])
    inverse = 1.0 / np.abs(np.log(eps))
    assert fit_log_law(eps, 2.0 * inverse + 0.5 * inverse ** 2) == pytest.approx(2.0)
    assert fit_slope([1e-3, 2e-3, 4e-3], [0.3 + 5e-3, 0.3 + 1e-2, 0.3 + 2e-2]) == pytest.approx(5.0)


def test_mindlin_surface_check():
    assert mindlin_surface_error() < 1e-12
    assert mindlin_surface_error(2.0, 0.45) < 1e-12


@pytest.mark.parametrize("name", sorted(DEMO_CONFIGS))
def test_demo_configs_validate(name, tmp_path):
    run = demo_config(name, str(tmp_path))
    assert run.output_directory() == str(tmp_path)
    assert run.opt_config().problem == DEMO_CONFIGS[name]["optimizer"]["problem"]


def test_suite_registry():
    assert {"region", "mesh", "fem", "bem", "polarization", "optimizer"} <= set(SUITES)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["mesh", "region", "smoothing"])
def test_fast_suites_pass(name):
    results = run_suites([name])
    assert results
    assert all(result.passed for result in results), [r.as_row() for r in results if not r.passed]

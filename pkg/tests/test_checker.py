import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trailer_extremals.checker import CHECKS, ToleranceSet, check_pmp, residual_series, structural_errors
from trailer_extremals.composer import simulate_extremal
from trailer_extremals.model import AdjointState, Configuration

from .mutations import MUTATIONS, base_trajectory, mutate


@pytest.fixture(scope="module")
def base():
    return base_trajectory()


def test_every_check_has_a_mutation():
    assert set(MUTATIONS) == set(CHECKS)


def test_base_passes_with_every_check_applicable(base):
    rep = check_pmp(base)
    assert rep.passed, rep.summary()
    assert all(c.applicable for c in rep.checks.values())


@settings(max_examples=10)
@given(st.sampled_from(CHECKS), st.integers(0, 2**32 - 1))
def test_mutation_flips_its_check(base, check, seed):
    rep = check_pmp(mutate(base, check, np.random.default_rng(seed)))
    assert not rep.structural_errors
    assert check in rep.failed()


def test_regular_run_skips_singular_checks():
    tr = simulate_extremal(Configuration(0, 0, 0, 0), AdjointState(1, 0, 0.5, 0), 4.0)
    rep = check_pmp(tr)
    assert rep.passed
    assert rep.checks["e_invariance"].status == "skipped"
    assert rep.checks["merging_manifold"].status == "skipped"


def test_residual_series(base):
    pts = residual_series(base, "hamiltonian")
    assert len(pts) == sum(len(s.samples) for s in base.segments)
    assert max(r for _, r in pts) <= 1e-6
    assert residual_series(simulate_extremal(Configuration(0, 0, 0, 0), AdjointState(1, 0, 0.5, 0), 1.0),
                           "merging_manifold") == []
    with pytest.raises(ValueError, match="unknown check"):
        residual_series(base, "nope")


def test_structural_problems(base):
    tr = mutate(base, "ltheta_affine", np.random.default_rng(0))
    tr.segments[0].samples.q[3, 0] = math.nan
    assert any("non-finite" in e for e in structural_errors(tr))
    assert not check_pmp(tr).passed
    tr = mutate(base, "ltheta_affine", np.random.default_rng(0))
    tr.segments[1].samples.q[0, 0] += 1e-3
    assert any("jump" in e for e in structural_errors(tr))
    tr = mutate(base, "ltheta_affine", np.random.default_rng(0))
    tr.segments[0].samples.u[2, 0] = 1.5
    assert any("outside U" in e for e in structural_errors(tr))


def test_report_serializes(base):
    d = check_pmp(base).to_dict()
    assert d["passed"] and set(d["checks"]) == set(CHECKS)
    assert check_pmp(base).summary().endswith("PASS")


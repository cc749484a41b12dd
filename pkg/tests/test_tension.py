import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensionlab.errors import SpecError, UnsupportedOperation
from tensionlab.potential import Potential
from tensionlab.tension import (ATLAS_HEADER, TensionProblem, TensionResult, append_atlas,
                                equipartition_reference, hermite_coefficient, hermite_reference,
                                jump_exponent, pin_layer_bias, solve_profile)

# a short schedule keeps the phase solves quick
QUICK = dict(T0=8.0, T_max=16.0, N0=256, N_max=512)


def test_hermite_reference_examples():
    assert hermite_reference(1) == pytest.approx(2.0, rel=1e-14)
    assert hermite_coefficient(2) == pytest.approx(12.0, rel=1e-12)
    assert hermite_reference(2) == pytest.approx(4 * math.sqrt(6) / 3, rel=1e-12)
    assert hermite_reference(2, 4.0) == pytest.approx(2 * 4 * math.sqrt(6) / 3, rel=1e-12)
    assert hermite_coefficient(3) == pytest.approx(720.0, rel=1e-10)


def test_hermite_reference_against_scan():
    T = np.linspace(0.5, 5, 200001)
    assert hermite_reference(1) == pytest.approx(np.min(T + 1 / T), rel=1e-9)
    assert hermite_reference(2) == pytest.approx(np.min(T + 12 / T**3), rel=1e-9)


@given(st.integers(1, 4), st.floats(0.01, 100))
def test_hermite_homogeneity(k, delta):
    assert hermite_reference(k, delta) == pytest.approx(delta ** (1 / k) * hermite_reference(k))


def test_equipartition_reference():
    assert equipartition_reference(Potential()) == pytest.approx(8 / 3, rel=1e-12)
    assert equipartition_reference(Potential("quartic", 4.0)) == pytest.approx(16 / 3, rel=1e-12)
    with pytest.raises(UnsupportedOperation):
        equipartition_reference(Potential("expression", expression="(4 - z**2)**2"))
    with pytest.raises(UnsupportedOperation):
        equipartition_reference(Potential("truncated-quadratic"))


@pytest.mark.parametrize("kw", [
    dict(kind="m_ks", k=0, s=0.4),
    dict(kind="m_k_integer", k=0),
    dict(kind="fd_m_k", k=1),
    dict(kind="fd_m_1s", k=2, s=0.5),
    dict(kind="fd_m_k", k=2, delta=-1.0),
])
def test_invalid_problems(kw):
    with pytest.raises(SpecError):
        TensionProblem(potential=Potential(), **kw)


def test_phase_tension_short_schedule():
    res = solve_profile(TensionProblem("m_k_integer", Potential(), 1, **QUICK))
    assert res.value == pytest.approx(8 / 3, rel=0.01)
    # upper-bound property: never above the tanh start energy
    assert all(res.value <= e for e in res.diagnostics["start_energies"])


def test_fd_tension_and_serialization(tmp_path):
    res = solve_profile(TensionProblem("fd_m_k", Potential("truncated-quadratic"), 2))
    assert res.converged
    assert res.value == pytest.approx(hermite_reference(2), rel=0.005)
    back = TensionResult.from_json(res.to_json())
    assert back.to_json() == res.to_json()
    assert back.problem == res.problem
    atlas = tmp_path / "atlas.csv"
    append_atlas(res, atlas)
    append_atlas(res, atlas)
    lines = atlas.read_text().splitlines()
    assert lines[0] == ",".join(ATLAS_HEADER)
    assert len(lines) == 2


def test_problem_round_trip():
    p = TensionProblem("m_ms", Potential("quartic", 2.0), 1, 0.1, T0=4.0)
    assert TensionProblem.from_dict(json.loads(json.dumps(p.to_dict()))) == p


def test_jump_exponent():
    assert jump_exponent(TensionProblem("fd_m_k", Potential(), 3)) == pytest.approx(1 / 3)
    assert jump_exponent(TensionProblem("fd_m_1s", Potential(), 1, 0.5)) == pytest.approx(2 / 3)


def test_pin_layer_bias_reported():
    p = TensionProblem("fd_m_k", Potential("truncated-quadratic"), 2, N0=256)
    bias = pin_layer_bias(p)
    assert set(bias) == {"N", "pinned", "unpinned", "relative_bias"}
    assert bias["relative_bias"] < 0.05

import numpy as np
import pytest
from pydantic import ValidationError

from potential_identification.forward_solver import PhaseShiftSet, phase_shifts
from potential_identification.objective import InverseProblem, NoiseSpec, add_noise, phi
from potential_identification.potential import Q2, AdmissibleSet, make_potential, zero_potential

ADM = AdmissibleSet(R=3.0, M=8, q_low=-5.0, q_high=5.0)


@pytest.fixture(scope="module")
def q2_targets():
    return phase_shifts(Q2, 6.0)


def test_phi_vanishes_at_the_source(q2_targets):
    problem = InverseProblem(k=6.0, targets=q2_targets, adm=ADM)
    assert phi(Q2, problem) <= 1e-20


def test_phi_of_zero_potential_is_one(q2_targets):
    problem = InverseProblem(k=6.0, targets=q2_targets, adm=ADM)
    assert phi(zero_potential(), problem) == 1.0
    assert phi(zero_potential(), problem.model_copy()) == 1.0


def test_phi_arithmetic(monkeypatch):
    import potential_identification.objective as objective

    targets = PhaseShiftSet(k=2.0, shifts=(1.0, 1.0), cutoff=1)
    problem = InverseProblem(k=2.0, targets=targets, adm=ADM)
    monkeypatch.setattr(objective, "sweep_shifts", lambda radii, values, k, l_max: np.array([1.0, 0.0]))
    assert phi(make_potential([1.0], [1.0]), problem) == 0.5


def test_phi_without_order_zero(monkeypatch):
    import potential_identification.objective as objective

    targets = PhaseShiftSet(k=2.0, shifts=(5.0, 1.0, 1.0), cutoff=2)
    problem = InverseProblem(k=2.0, targets=targets, adm=ADM, include_l0=False)
    monkeypatch.setattr(objective, "sweep_shifts", lambda radii, values, k, l_max: np.array([0.0, 1.0, 0.0]))
    assert phi(make_potential([1.0], [1.0]), problem) == 0.5


def test_phi_matches_coordinate_objective(q2_targets):
    problem = InverseProblem(k=6.0, targets=q2_targets, adm=ADM)
    candidate = make_potential([0.4, 1.2, 2.5], [1.0, -3.0, 0.5])
    shuffled = np.array([2.5, 0.4, 1.2, 0.5, 1.0, -3.0])
    assert problem(shuffled) == phi(candidate, problem)
    assert phi(candidate, problem) > 0.0


def test_phi_is_invariant_under_split_layers(q2_targets):
    problem = InverseProblem(k=6.0, targets=q2_targets, adm=ADM)
    candidate = make_potential([0.4, 1.2, 2.5], [1.0, -3.0, 0.5])
    split = make_potential([0.4, 0.8, 1.2, 1.2, 2.5], [1.0, -3.0, -3.0, 4.0, 0.5])
    assert phi(split, problem) == pytest.approx(phi(candidate, problem), rel=1e-12)


def test_problem_validation(q2_targets):
    with pytest.raises(ValidationError):
        InverseProblem(k=5.0, targets=q2_targets, adm=ADM)
    zeros = PhaseShiftSet(k=6.0, shifts=(0.0, 0.0), cutoff=1)
    with pytest.raises(ValidationError):
        InverseProblem(k=6.0, targets=zeros, adm=ADM)
    only_l0 = PhaseShiftSet(k=6.0, shifts=(0.3, 0.0), cutoff=1)
    InverseProblem(k=6.0, targets=only_l0, adm=ADM)
    with pytest.raises(ValidationError):
        InverseProblem(k=6.0, targets=only_l0, adm=ADM, include_l0=False)


def test_noise_free_targets_are_unchanged(q2_targets):
    assert add_noise(q2_targets, NoiseSpec(h=0.0, seed=3)) is q2_targets


def test_noise_is_bounded_and_deterministic(q2_targets):
    spec = NoiseSpec(h=1e-2, seed=17)
    noisy = add_noise(q2_targets, spec)
    clean = q2_targets.as_array()
    delta_max = np.max(np.abs(clean))
    assert noisy.cutoff == q2_targets.cutoff and noisy.k == q2_targets.k
    assert np.all(np.abs(noisy.as_array() - clean) <= 0.5 * spec.h * delta_max * (1 + 1e-12))
    assert add_noise(q2_targets, spec) == noisy
    assert add_noise(q2_targets, NoiseSpec(h=1e-2, seed=18)) != noisy


def test_noise_scales_linearly_in_h(q2_targets):
    clean = q2_targets.as_array()
    single = add_noise(q2_targets, NoiseSpec(h=1e-3, seed=4)).as_array() - clean
    double = add_noise(q2_targets, NoiseSpec(h=2e-3, seed=4)).as_array() - clean
    assert double == pytest.approx(2.0 * single, rel=1e-9, abs=1e-15)


def test_noise_has_zero_mean():
    targets = PhaseShiftSet(k=1.0, shifts=tuple([1.0] * 100_000), cutoff=99_999)
    perturbation = add_noise(targets, NoiseSpec(h=1.0, seed=0)).as_array() - 1.0
    stderr = np.sqrt(1.0 / 12.0) / np.sqrt(perturbation.size)
    assert abs(perturbation.mean()) < 3.0 * stderr


def test_negative_noise_level_is_rejected():
    with pytest.raises(ValidationError):
        NoiseSpec(h=-1.0)

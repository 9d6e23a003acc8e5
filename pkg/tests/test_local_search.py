import numpy as np
import pytest

from conftest import acceptance
from potential_identification.forward_solver import phase_shifts
from potential_identification.local_search import (
    LocalParams,
    SearchBox,
    SearchPoint,
    basic_powell,
    evaluate,
    line_minimize,
    lmm,
    reduce,
)
from potential_identification.objective import InverseProblem
from potential_identification.potential import Q1, AdmissibleSet, make_potential, sample_uniform


def plain_box(lower, upper):
    return SearchBox(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float), sort_radii=False)


def plain_point(f, coords):
    vec = np.asarray(coords, dtype=float)
    return SearchPoint(vec, f(vec))


@pytest.fixture(scope="module")
def q1_problem():
    adm = AdmissibleSet(R=3.0, M=8, q_low=-5.0, q_high=5.0)
    return InverseProblem(k=9.0, targets=phase_shifts(Q1, 9.0), adm=adm)


@pytest.fixture(scope="module")
def well_problem():
    truth = make_potential([1.0], [-2.0])
    adm = AdmissibleSet(R=3.0, M=2, q_low=-5.0, q_high=5.0)
    return InverseProblem(k=3.0, targets=phase_shifts(truth, 3.0), adm=adm)


def test_line_minimize_finds_quadratic_minimum():
    centre = np.array([1.5, 1.0])
    f = lambda x: float(np.sum((x - centre) ** 2))
    box = plain_box([-5.0, -5.0], [5.0, 5.0])
    result = line_minimize(f, plain_point(f, [-3.0, 1.0]), [1.0, 0.0], box, tol=1e-6)
    assert result.coords == pytest.approx(centre, abs=2e-6)
    assert result.value == f(result.coords)


def test_line_minimize_stops_at_the_boundary_for_monotone_slices():
    f = lambda x: float(x[0])
    box = plain_box([-2.0, -2.0], [2.0, 2.0])
    result = line_minimize(f, plain_point(f, [0.0, 0.0]), [3.0, 0.0], box)
    assert result.coords.tolist() == [-2.0, 0.0]
    assert result.value == -2.0


def test_line_minimize_on_multimodal_slice():
    f = lambda x: float(np.sin(3.0 * x[0]) + 0.1 * (x[0] - 1.0) ** 2)
    box = plain_box([-4.0], [4.0])
    origin = plain_point(f, [0.0])
    result = line_minimize(f, origin, [1.0], box, tol=1e-6, grid=64)
    scan = np.linspace(-4.0, 4.0, 10_001)
    values = np.sin(3.0 * scan) + 0.1 * (scan - 1.0) ** 2
    assert result.value <= min(origin.value, f(np.array([-4.0])), f(np.array([4.0])))
    assert result.value <= values.min() + 1e-9
    assert abs(result.coords[0] - scan[np.argmin(values)]) <= scan[1] - scan[0]


def test_line_minimize_degenerate_cases():
    f = lambda x: float(np.sum(x**2))
    box = plain_box([0.0, 0.0], [1.0, 1.0])
    origin = plain_point(f, [0.5, 0.5])
    assert line_minimize(f, origin, [0.0, 0.0], box) is origin
    pinned = plain_box([0.5, 0.5], [0.5, 0.5])
    assert line_minimize(f, origin, [1.0, 0.0], pinned) is origin


def test_line_minimize_restores_radius_order(well_problem):
    box = SearchBox.for_layers(well_problem.adm, 2)
    start = evaluate(well_problem, [0.5, 2.5, -1.0, 3.0])
    result = line_minimize(well_problem, start, [1.0, 0.0, 0.0, 0.0], box)
    radii = result.coords[:2]
    assert radii[0] <= radii[1]
    assert result.value == well_problem(result.coords)
    assert result.value <= start.value


def test_basic_powell_on_convex_quadratic():
    f = lambda x: float((x[0] - 1.0) ** 2 + 2.0 * (x[1] + 0.5) ** 2 + 0.5 * (x[0] - 1.0) * (x[1] + 0.5))
    box = plain_box([-3.0, -3.0], [3.0, 3.0])
    params = LocalParams(line_tol=1e-8)
    result = basic_powell(f, plain_point(f, [-2.0, 2.0]), box, params)
    assert result.coords == pytest.approx([1.0, -0.5], abs=1e-4)


def test_basic_powell_keeps_a_minimum():
    f = lambda x: float(np.sum(x**2))
    box = plain_box([-1.0, -1.0], [1.0, 1.0])
    start = plain_point(f, [0.0, 0.0])
    result = basic_powell(f, start, box, LocalParams())
    assert result is start


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return np.sum(10.0 * (x[..., 1:] - x[..., :-1] ** 2) ** 2 + (1.0 - x[..., :-1]) ** 2, axis=-1)


def test_basic_powell_beats_random_search_on_a_curved_valley():
    f = lambda x: float(rosenbrock(x))
    box = plain_box([-2.0, -2.0], [2.0, 2.0])
    result = basic_powell(f, plain_point(f, [-1.2, 1.0]), box, LocalParams())
    samples = np.random.default_rng(0).uniform(-2.0, 2.0, size=(100_000, 2))
    assert result.value <= float(rosenbrock(samples).min())


def test_reduce_merges_a_split_layer(q1_problem):
    split = make_potential([0.3, 0.6, 1.0, 1.9, 2.2, 2.4], [4.0, 1.0, 1.0, -2.0, 3.5, 1.0])
    start = evaluate(q1_problem, split.coords())
    result = reduce(q1_problem, start, 0.1)
    assert result.layer_count == 5
    assert result.potential() == Q1
    assert result.value <= 1e-20


def test_reduce_with_zero_threshold_keeps_distinct_layers(well_problem):
    start = evaluate(well_problem, [0.8, 1.6, -1.0, 2.0])
    assert start.value > 0.0
    assert reduce(well_problem, start, 0.0) is start


def test_reduce_never_adds_layers(well_problem):
    rng = np.random.default_rng(1)
    for _ in range(5):
        start = evaluate(well_problem, sample_uniform(well_problem.adm, rng).coords())
        assert reduce(well_problem, start, 0.1).layer_count <= start.layer_count


def test_lmm_keeps_the_exact_solution(q1_problem):
    start = evaluate(q1_problem, Q1.coords())
    result = lmm(q1_problem, start, q1_problem.adm, LocalParams())
    assert result.layer_count == 5
    assert result.value <= start.value


@pytest.mark.parametrize("layer", range(5))
def test_lmm_recovers_five_layers_after_a_split(q1_problem, layer):
    inner = 0.0 if layer == 0 else Q1.radii[layer - 1]
    middle = 0.5 * (inner + Q1.radii[layer])
    radii = sorted([*Q1.radii, middle])
    values = list(Q1.values)
    values.insert(layer, Q1.values[layer])
    start = evaluate(q1_problem, make_potential(radii, values).coords())
    result = lmm(q1_problem, start, q1_problem.adm, LocalParams())
    assert result.layer_count == 5
    assert abs(result.value - q1_problem(Q1.coords())) <= 1e-10


def test_lmm_converges_from_a_nearby_start(well_problem):
    start = evaluate(well_problem, [1.2, -1.5])
    result = lmm(well_problem, start, well_problem.adm, LocalParams())
    assert result.value < 1e-8
    assert result.coords == pytest.approx([1.0, -2.0], abs=1e-3)


def test_lmm_is_monotone_and_deterministic(well_problem):
    rng = np.random.default_rng(9)
    params = LocalParams(max_powell_iters=10)
    for _ in range(6):
        start = evaluate(well_problem, sample_uniform(well_problem.adm, rng).coords())
        first = lmm(well_problem, start, well_problem.adm, params)
        assert first.value <= start.value
        assert first.layer_count <= start.layer_count
        second = lmm(well_problem, start, well_problem.adm, params)
        assert second.coords.tolist() == first.coords.tolist()
        assert second.value == first.value


def test_local_params_validation():
    with pytest.raises(ValueError):
        LocalParams(eps_r=0.0)
    with pytest.raises(ValueError):
        LocalParams(line_grid=1)


@acceptance
def test_lmm_monotone_on_large_corpus(q1_problem):
    rng = np.random.default_rng(100)
    for _ in range(100):
        start = evaluate(q1_problem, sample_uniform(q1_problem.adm, rng).coords())
        assert lmm(q1_problem, start, q1_problem.adm, LocalParams()).value <= start.value


@acceptance
def test_lmm_single_layer_from_random_starts():
    truth = make_potential([1.0], [-2.0])
    adm = AdmissibleSet(R=3.0, M=1, q_low=-5.0, q_high=5.0)
    problem = InverseProblem(k=3.0, targets=phase_shifts(truth, 3.0), adm=adm)
    rng = np.random.default_rng(20)
    for _ in range(20):
        start = evaluate(problem, sample_uniform(adm, rng).coords())
        assert lmm(problem, start, adm, LocalParams()).value < 1e-8


def test_lmm_keeps_the_final_reduction_when_it_costs_a_little_misfit():
    adm = AdmissibleSet(R=3.0, M=3, q_low=-1.0, q_high=1.0)
    start_coords = np.array([0.5, 1.0, 2.0, 0.2, -0.3, 0.4])

    def f(x):
        if x.size == start_coords.size and np.array_equal(x, start_coords):
            return 2.0
        # each merge costs 0.01, below eps_r * phi once the start is left
        return 0.5 + 0.01 * (3 - x.size // 2)

    start = evaluate(f, start_coords)
    params = LocalParams(max_powell_iters=3)
    reduced = reduce(f, start, params.eps_r)
    assert reduced is start
    polished = basic_powell(f, reduced, SearchBox.for_layers(adm, 3), params)
    final = reduce(f, polished, params.eps_r)
    assert polished.value < final.value <= start.value

    result = lmm(f, start, adm, params)
    assert result.layer_count == final.layer_count == 1
    assert result.value == final.value

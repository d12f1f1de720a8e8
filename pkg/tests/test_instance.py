import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stpath.instance import (
    FAMILIES,
    InstanceFormatError,
    MetricInstance,
    MetricViolationError,
    TourResult,
    gen_random,
    load_instance,
    metric_closure,
    parse_instance,
    serialize_instance,
    validate_metric,
)


def test_json_two_vertex_instance():
    inst = parse_instance('{"n": 2, "cost": [[0, 5], [5, 0]], "s": 0, "t": 1}')
    assert inst.n == 2 and inst.c(0, 1) == 5 and (inst.s, inst.t) == (0, 1)


def test_endpoints_default_to_first_and_last():
    inst = parse_instance('{"cost": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}')
    assert (inst.s, inst.t) == (0, 2)


def test_json_points_give_euclidean_costs():
    inst = parse_instance('{"points": [[0, 0], [3, 4]]}')
    assert inst.c(0, 1) == 5


def test_tsplib_euc_2d_is_not_rounded():
    text = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\n3 1 1\nEOF\n"
    inst = parse_instance(text, "tsplib")
    assert inst.c(0, 1) == 5
    assert inst.c(0, 2) == pytest.approx(2**0.5, abs=0)
    assert (inst.s, inst.t) == (0, 2)


def test_tsplib_explicit_matrix_with_fixed_endpoints():
    text = (
        "NAME : m\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\n"
        "FIXED_ENDPOINTS : 1 1\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 1\n2 1 0\nEOF\n"
    )
    inst = parse_instance(text, "tsplib")
    assert inst.c(0, 2) == 2 and inst.s == 1 and inst.t == 1


def test_triangle_violation_in_json_names_the_triple():
    with pytest.raises(MetricViolationError) as err:
        parse_instance('{"cost": [[0, 1, 10], [1, 0, 1], [10, 1, 0]]}')
    assert err.value.report.kind == "triangle" and set(err.value.report.where) == {0, 1, 2}


def test_malformed_json_reports_line():
    with pytest.raises(InstanceFormatError) as err:
        parse_instance('{\n "cost": [[0, 1],\n [1 0]]}')
    assert err.value.line == 3


def test_tsplib_missing_section_is_a_format_error():
    with pytest.raises(InstanceFormatError):
        parse_instance("NAME : x\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\nEOF\n", "tsplib")


def test_zero_matrix_is_a_metric():
    assert validate_metric(np.zeros((4, 4))).ok


def test_asymmetry_is_reported_at_the_pair():
    c = np.array([[0, 1, 1], [1, 0, 1], [1, 2, 0]], dtype=float)
    rep = validate_metric(c)
    assert not rep.ok and rep.kind == "symmetry" and rep.where == (1, 2)


def test_triangle_failure_is_reported():
    c = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    rep = validate_metric(c)
    assert not rep.ok and rep.kind == "triangle" and set(rep.where) == {0, 1, 2}


def test_validate_metric_never_raises_on_garbage():
    assert not validate_metric(np.zeros((2, 3))).ok
    assert not validate_metric(np.array([[1.0]])).ok
    assert not validate_metric(np.array([[0, -1], [-1, 0]], dtype=float)).ok


def test_closure_shortcuts_through_middle_vertex():
    w = np.array([[0, 1, 10], [1, 0, 1], [10, 1, 0]], dtype=float)
    assert metric_closure(w)[0, 2] == 2


def _closure_by_walks(w):
    n = len(w)
    d = np.array(w, dtype=float)
    for length in range(2, n + 1):
        for seq in itertools.product(range(n), repeat=length + 1):
            cost = sum(w[a][b] for a, b in zip(seq, seq[1:]))
            d[seq[0], seq[-1]] = min(d[seq[0], seq[-1]], cost)
    return d


@given(st.lists(st.floats(0.1, 5.0), min_size=6, max_size=6))
def test_closure_matches_walk_enumeration_on_four_vertices(vals):
    w = np.zeros((4, 4))
    for (i, j), v in zip(itertools.combinations(range(4), 2), vals):
        w[i, j] = w[j, i] = v
    np.testing.assert_allclose(metric_closure(w), _closure_by_walks(w), rtol=1e-12)


@given(st.integers(2, 9), st.sampled_from(FAMILIES), st.integers(0, 2**63 - 1))
def test_closure_is_idempotent_on_generated_metrics(n, family, seed):
    inst = gen_random(n, family, seed)
    np.testing.assert_allclose(metric_closure(inst.cost), inst.cost, rtol=0, atol=1e-12)


def test_two_vertex_generated_instance_is_valid():
    inst = gen_random(2, "euclidean-unit-square", 7)
    assert inst.n == 2 and validate_metric(inst).ok and inst.c(0, 1) > 0


def test_generator_is_deterministic():
    for family in FAMILIES:
        assert serialize_instance(gen_random(6, family, 11)) == serialize_instance(gen_random(6, family, 11))


def test_random_closure_family_is_metric():
    assert validate_metric(gen_random(8, "random-metric-closure", 1)).ok


def test_generator_rejects_tiny_n_and_unknown_family():
    with pytest.raises(ValueError):
        gen_random(1)
    with pytest.raises(ValueError):
        gen_random(4, "grid")


def test_serialization_round_trips(tmp_path):
    inst = gen_random(5, "random-metric-closure", 3)
    path = tmp_path / "r5.json"
    path.write_text(serialize_instance(inst))
    back = load_instance(str(path))
    np.testing.assert_array_equal(back.cost, inst.cost)
    assert (back.s, back.t) == (inst.s, inst.t)
    assert json.loads(serialize_instance(back)) == json.loads(serialize_instance(inst))


def test_cost_matrix_is_read_only(path3):
    with pytest.raises(ValueError):
        path3.cost[0, 1] = 7


def test_exact_copy_keeps_values(path3):
    ex = path3.as_exact()
    assert ex.exact and ex.c(0, 2) == 2 and ex.as_float().c(0, 2) == 2.0


def test_tour_result_check(path3):
    TourResult((0, 1, 2), 2.0, False).check(path3)
    with pytest.raises(AssertionError):
        TourResult((1, 0, 2), 3.0, False).check(path3)
    with pytest.raises(AssertionError):
        TourResult((0, 1, 2), 2.5, False).check(path3)


def test_circuit_cost_closes_the_loop():
    inst = MetricInstance(np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float), 0, 0)
    assert inst.tour_cost([0, 1, 2]) == 3


def test_exact_copy_of_closure_instance_with_tight_triangles():
    inst = gen_random(4, "random-metric-closure", 9819)
    ex = inst.as_exact()
    assert ex.exact and all(float(ex.c(i, j)) == inst.c(i, j) for i in range(4) for j in range(4))


def test_exact_instances_are_validated_strictly():
    from fractions import Fraction

    c = np.array([[Fraction(0), Fraction(1), Fraction(3)], [Fraction(1), Fraction(0), Fraction(1)],
                  [Fraction(3), Fraction(1), Fraction(0)]], dtype=object)
    with pytest.raises(MetricViolationError):
        MetricInstance(c, 0, 2)

import pytest

from stpath.instance import FAMILIES, gen_random
from stpath.invariants import CHECKS, InvariantMonitor, verify_instance, zero_largest_entry
from stpath.parity import run_rdp


def test_path_metric_passes_every_check(path3):
    out = verify_instance(path3, 0.25)
    assert out.ok
    assert {name for name, _, _ in out.monitor.summary()} == set(CHECKS)


def test_path_metric_passes_in_rational_mode(path3):
    assert verify_instance(path3, 0.25, exact=True).ok


def test_two_vertices_pass_vacuously(two):
    out = verify_instance(two, 0.25)
    assert out.ok and not out.monitor.violations


def test_zeroed_vector_entry_is_reported_with_a_cut():
    out = verify_instance(gen_random(6, "random-metric-closure", 1), 0.25, corrupt=zero_largest_entry)
    assert not out.ok
    v7 = [v for v in out.monitor.violations if v.check == "cut_feasible"]
    assert v7 and v7[0].witness


@pytest.mark.parametrize("seed", range(6))
def test_random_instances_pass(seed):
    inst = gen_random(5 + seed % 3, FAMILIES[seed % 2], 70 + seed)
    assert verify_instance(inst, 0.25).ok


def test_monitor_counts_every_record():
    inst = gen_random(6, "euclidean-unit-square", 3)
    mon = InvariantMonitor(Lambda=5)
    run = run_rdp(inst, 0.25, observer=mon)
    assert mon.records == run.stats.dp_calls and mon.ok


def test_three_levels_pass():
    assert verify_instance(gen_random(5, "euclidean-unit-square", 8), 0.125).ok


def test_rational_mode_on_closure_instances():
    for seed in (9819, 9821):
        assert verify_instance(gen_random(4, "random-metric-closure", seed), 0.25, exact=True).ok

import pytest

from toruslab.src import suite
from toruslab.src.suite import Check, SuiteConfig, verify_suite
from toruslab.src.errors import NotIsotopic


FAST = SuiteConfig(seed=0, fast=True, threads=1)


@pytest.mark.parametrize("name", ["farey_bfs", "d0_staircase", "parallelogram_conjugacy", "arc_distance_bfs"])
def test_exact_checks(name):
    report = verify_suite(f"^{name}$", FAST)
    assert [c.name for c in report.checks] == [name]
    assert report.passed, report.as_json()


def test_conjugator_observations():
    (check,) = verify_suite("^parallelogram_conjugacy$", FAST).checks
    assert check.observed["mismatches"] == 0
    assert check.observed["translation_only"] > 0
    assert check.observed["general"] is True


def test_filter():
    report = verify_suite("^(farey|d0)", FAST)
    assert [c.name for c in report.checks] == ["d0_staircase", "farey_bfs"]
    assert verify_suite("nothing matches this", FAST).checks == []


def test_names_are_unique():
    names = [c.name for c in suite.CHECKS]
    assert len(names) == len(set(names))


def test_failing_check_keeps_log(monkeypatch):
    def broken(config):
        suite.logger.warning("looking at the staircase")
        raise NotIsotopic("classes differ")

    monkeypatch.setattr(suite, "CHECKS", [Check("broken", "always raises", broken)])
    report = verify_suite(None, FAST)
    assert not report.passed
    (check,) = report.checks
    assert "NotIsotopic" in check.observed
    assert "looking at the staircase" in check.log
    assert report.as_json()["checks"][0]["log"] == check.log


def test_folded_instances_double_back():
    gen = suite._generator(5)
    backtracks = 0
    for _ in range(8):
        folded = suite.random_folded_curve(gen)
        assert folded.closure.as_list() == [1, 0]
        xs = [v.x for v in folded.lift_vertices]
        backtracks += any(b < a for a, b in zip(xs, xs[1:]))
        strip = suite.random_folded_strip_curve(gen, 0)
        assert strip.to_torus().closure.as_list() == [1, 0]
    assert backtracks > 0


@pytest.mark.slow
@pytest.mark.parametrize("name", ["wedge_algebra", "twist_axioms", "quasi_path"])
def test_random_checks(name):
    report = verify_suite(f"^{name}$", FAST)
    assert report.passed, report.as_json()

import numpy as np

from padic_nagumo.invariants import SUITE, CheckResult, random_params, run_suite


def test_reduced_suite_passes():
    results = run_suite(seed=11, fraction=0.05)
    assert len(results) == len(SUITE)
    for r in results:
        assert r.ok, (r.name, r.failures[:3])
        assert r.cases > 0


def test_seeded_runs_repeat():
    a = [r.worst for r in run_suite(seed=5, fraction=0.02)]
    b = [r.worst for r in run_suite(seed=5, fraction=0.02)]
    assert a == b


def test_random_params_respect_invariants():
    rng = np.random.default_rng(0)
    for _ in range(200):
        params = random_params(rng)
        assert params.delta < params.alpha
        assert params.s - 2 * params.delta > 1.0


def test_check_result_line():
    res = CheckResult("demo")
    res.cases, res.worst = 3, 0.5
    assert res.ok and res.line().startswith("PASS demo: 3 cases")
    res.failures.append("case 1")
    assert not res.ok and res.line().startswith("FAIL")

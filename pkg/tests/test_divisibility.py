import numpy as np
import pytest

from kahler_decoherence.deformed_laplacian import growth_witness
from kahler_decoherence.divisibility import Divisibility, classify_schedule, positivity_violation_witness
from kahler_decoherence.errors import OutOfDomain
from kahler_decoherence.pauli_channel import DecoherenceRates, RatesSchedule

T16 = np.linspace(0, 1, 16)


def constant(*g):
    return RatesSchedule.constant(DecoherenceRates(*g))


def random_schedule(rng, margin=1e-6):
    """Piecewise-linear schedule on [0, 1] whose sampled values avoid the sign boundaries."""
    while True:
        knots = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0, 1, size=2)]))
        sched = RatesSchedule.from_pairs([(t, tuple(rng.uniform(-1, 2, size=3))) for t in knots])
        vals = np.array([sched.values_at(t) for t in T16])
        pairs = vals.sum(axis=1, keepdims=True) - vals
        if np.min(np.abs(vals)) > margin and np.min(np.abs(pairs)) > margin:
            return sched


def test_cp_example():
    rep = classify_schedule(constant(1, 2, 3), T16)
    assert rep.overall is Divisibility.CP_DIVISIBLE
    assert all(v.strictly for v in rep.verdicts)


def test_p_example():
    rep = classify_schedule(constant(1, 1, -0.6), T16)
    assert rep.overall is Divisibility.P_DIVISIBLE
    assert abs(rep.verdicts[0].pairwise_min - 0.4) < 1e-12
    assert rep.verdicts[0].min_symbol_eigenvalue <= -2.4 + 1e-12


def test_neither_example():
    sched = RatesSchedule.from_pairs([(0, (1, 1, 1)), (0.5, (-0.1, -0.1, 1)), (1, (1, 1, 1))])
    rep = classify_schedule(sched, [0, 0.25, 0.5, 0.75, 1])
    assert rep.overall is Divisibility.NEITHER
    bad = rep.verdicts[2]
    assert not bad.p and abs(bad.pairwise_min + 0.2) < 1e-12


def test_cp_implies_p_and_consistency(rng):
    for _ in range(200):
        rep = classify_schedule(random_schedule(rng), T16)
        assert rep.consistent
        for v in rep.verdicts:
            assert not v.cp or v.p


def test_report_dict():
    d = classify_schedule(constant(1, 1, -0.6), [0, 1]).to_dict()
    assert d["overall"] == "PDivisible" and len(d["verdicts"]) == 2


def test_out_of_domain():
    sched = RatesSchedule.from_pairs([(0, (1, 1, 1)), (1, (1, 1, 1))])
    with pytest.raises(OutOfDomain):
        classify_schedule(sched, [0.5, 1.5])


def test_growth_witness_for_demo_rates():
    t, l, rate = positivity_violation_witness(constant(1, 1, -0.6), [0, 1], l_max=2)
    assert l == 2 and abs(rate - 0.4) < 1e-12


def test_p_not_cp_schedules_have_growing_modes(rng):
    """Some block grows, though not necessarily at l = 2."""
    found = 0
    while found < 20:
        sched = random_schedule(rng)
        rep = classify_schedule(sched, T16, scan=(8, 16))
        if rep.overall is not Divisibility.P_DIVISIBLE:
            continue
        found += 1
        worst = min((v for v in rep.verdicts), key=lambda v: min(v.rates))
        rates = DecoherenceRates(*worst.rates)
        g3 = -min(worst.rates)
        others = sum(worst.rates) + g3
        l_needed = int(np.ceil(others / (2 * g3))) + 1
        l, rate = growth_witness(rates, max(2, l_needed))
        assert rate > 0

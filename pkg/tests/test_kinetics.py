import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

import fretsim as fs
from fretsim import JumpChannel, PopulationState, RatePath, RateSet

DONOR, ACCEPTOR = JumpChannel.DONOR, JumpChannel.ACCEPTOR

# stationary populations for gamma1=gamma2=gamma3=1, gamma4=0.1, gamma5=1,
# solved exactly from the balance equations with rational arithmetic
EXACT_STATIONARY = tuple(float(x) for x in (
    Fraction(85, 202), Fraction(251, 1212), Fraction(155, 606), Fraction(47, 404)))
EXACT_DONOR_WEIGHT = float(Fraction(155, 606) + Fraction(47, 404))      # 0.372112...
EXACT_ACCEPTOR_INTENSITY = float(Fraction(251, 1212) + Fraction(47, 404))  # 0.323432...


def constant_path(value, n=200, dt=0.01):
    return RatePath.constant(value, dt, n)


# ---------------------------------------------------------------------------
# RateSet


def test_f_fixes_gamma4_exactly():
    rates = RateSet(1.0, 1.0, 2.0, f=0.1)
    assert rates.gamma4 == 0.1 * 2.0
    with pytest.raises(fs.ConfigurationError):
        RateSet(1.0, 1.0, 2.0, gamma4=0.3, f=0.1)
    RateSet(1.0, 1.0, 2.0, gamma4=0.2, f=0.1)  # consistent pair is fine


def test_negative_or_missing_rates_rejected():
    with pytest.raises(fs.ConfigurationError):
        RateSet(-1.0, 1.0, 1.0, gamma4=0.1)
    with pytest.raises(fs.ConfigurationError):
        RateSet(1.0, 1.0, 1.0)  # neither gamma4 nor f


# ---------------------------------------------------------------------------
# generator


def test_zero_rates_give_zero_generator():
    m = fs.build_generator(RateSet(0.0, 0.0, 0.0, gamma4=0.0), 0.0)
    assert np.array_equal(m, np.zeros((4, 4)))


def test_reference_generator_entries(reference_rates):
    m = fs.build_generator(reference_rates, 1.0)
    expected = np.array([
        [-1.1, 1.0, 1.0, 0.0],
        [0.1, -2.0, 1.0, 1.0],
        [1.0, 0.0, -2.1, 1.0],
        [0.0, 1.0, 0.1, -2.0],
    ])
    assert np.array_equal(m, expected)


def test_negative_gamma5_rejected(reference_rates):
    with pytest.raises(fs.ConfigurationError):
        fs.build_generator(reference_rates, -0.5)


@settings(deadline=None, max_examples=60)
@given(st.lists(st.floats(0.0, 10.0), min_size=5, max_size=5))
def test_generator_structure_for_random_rates(values):
    g1, g2, g3, g4, g5 = values
    m = fs.build_generator(RateSet(g1, g2, g3, gamma4=g4), g5)
    # conservation and the transfer channel acting on |10> only
    assert np.allclose(m.sum(axis=0), 0.0, atol=1e-12)
    assert m[1, 2] == g5  # (01 <- 10) carries exactly the transfer rate
    assert m[3, 1] == g3
    assert m[2, 1] == 0.0  # no reverse transfer
    assert m[3, 0] == 0.0  # no double excitation in one jump


def test_generator_parts_recompose(reference_rates):
    m0, m5 = fs.generator_parts(reference_rates)
    for g5 in (0.0, 0.7, 3.2):
        assert np.array_equal(m0 + g5 * m5,
                              fs.build_generator(reference_rates, g5))


def test_mirrored_generator_is_a_permutation(reference_rates):
    # exchanging donor and acceptor labels permutes the basis (swap |01>/|10>)
    perm = np.array([0, 2, 1, 3])
    m = fs.build_generator(reference_rates, 0.8)
    mm = fs.build_generator(reference_rates.mirrored(), 0.8)
    assert np.array_equal(mm, m[np.ix_(perm, perm)])


# ---------------------------------------------------------------------------
# propagation


def test_zero_span_returns_state_unchanged(reference_rates):
    state = PopulationState(0.4, 0.3, 0.2, 0.1)
    out = fs.propagate(state, reference_rates, constant_path(1.0), 0.0)
    assert out == state


def test_pure_donor_decay_is_exponential():
    rates = RateSet(1.0, 0.0, 0.0, gamma4=0.0)
    start = PopulationState(0.0, 0.0, 1.0, 0.0)
    out = fs.propagate(start, rates, constant_path(0.0), 1.0)
    assert out.p10 == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert out.p00 == pytest.approx(1.0 - math.exp(-1.0), abs=1e-6)


def test_long_propagation_reaches_stationary_state(reference_rates):
    start = PopulationState(1.0, 0.0, 0.0, 0.0)
    out = fs.propagate(start, reference_rates, constant_path(1.0, n=5000), 50.0)
    stationary = fs.steady_state_fixed(reference_rates, 1.0)
    assert np.allclose(out.as_array(), stationary.as_array(), atol=1e-6)


def test_propagation_against_matrix_exponential(reference_rates):
    start = PopulationState(0.1, 0.2, 0.3, 0.4)
    out = fs.propagate(start, reference_rates, constant_path(1.0), 1.0)
    m = fs.build_generator(reference_rates, 1.0)
    expected = expm(m * 1.0) @ start.as_array()
    assert np.allclose(out.as_array(), expected, atol=1e-9)


def test_conservation_drift_is_tiny(reference_rates):
    start = PopulationState(0.7, 0.1, 0.1, 0.1)
    _, drift = fs.propagate(start, reference_rates, constant_path(1.0, n=1000),
                            10.0, return_drift=True)
    assert drift < 1e-9


def test_span_must_sit_on_the_grid(reference_rates):
    state = PopulationState.uniform()
    with pytest.raises(fs.ConfigurationError):
        fs.propagate(state, reference_rates, constant_path(1.0), 0.005)
    with pytest.raises(fs.ConfigurationError):
        fs.propagate(state, reference_rates, constant_path(1.0, n=10), 1.0)


@settings(deadline=None, max_examples=30)
@given(st.lists(st.floats(0.0, 5.0), min_size=5, max_size=5),
       st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
def test_propagation_keeps_populations_nonnegative(values, raw_state):
    g1, g2, g3, g4, g5 = values
    rates = RateSet(g1, g2, g3, gamma4=g4)
    p = np.array(raw_state)
    state = PopulationState.from_array(p / p.sum())
    out = fs.propagate(state, rates, constant_path(g5), 2.0)
    arr = out.as_array()
    assert np.all(arr >= 0.0)
    assert arr.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# stationary solve


def test_two_level_balance():
    rates = RateSet(1.0, 1.0, 1.0, gamma4=0.0)
    state = fs.steady_state_fixed(rates, 0.0)
    assert state.p10 + state.p11 == pytest.approx(0.5, abs=1e-12)


def test_reference_stationary_state(reference_rates):
    state = fs.steady_state_fixed(reference_rates, 1.0)
    assert np.allclose(state.as_array(), EXACT_STATIONARY, atol=1e-12)
    # the values quoted to five digits
    assert np.allclose(state.as_array(),
                       (0.42079, 0.20710, 0.25579, 0.11634), atol=1e-4)


def test_huge_transfer_rate_empties_donor_excited_state():
    rates = RateSet(1.0, 1.0, 1.0, gamma4=0.0)
    state = fs.steady_state_fixed(rates, 1e9)
    assert state.p10 < 1e-8


def test_singular_generators_are_reported():
    with pytest.raises(fs.SingularGeneratorError):
        fs.steady_state_fixed(RateSet(1.0, 1.0, 0.0, gamma4=0.0), 0.0)  # no pump
    with pytest.raises(fs.SingularGeneratorError):
        fs.steady_state_fixed(RateSet(0.0, 0.0, 1.0, gamma4=0.1), 0.0)  # no decay
    with pytest.raises(fs.SingularGeneratorError):
        # donor and acceptor blocks decouple into two closed classes
        fs.steady_state_fixed(RateSet(1.0, 0.0, 1.0, gamma4=0.0), 0.0)


def test_oracle_equivalence_for_random_rate_sets():
    gen = np.random.default_rng(90210)
    for _ in range(100):
        g = gen.uniform(0.0, 5.0, size=5)
        rates = RateSet(g[0], g[1], g[2], gamma4=g[3])
        stationary = fs.steady_state_fixed(rates, g[4])
        start = PopulationState.from_array(gen.dirichlet(np.ones(4)))
        t = 50.0 / min(x for x in g if x > 0)
        steps = int(math.ceil(t / 0.01))
        out = fs.propagate(start, rates, constant_path(g[4], n=steps),
                           steps * 0.01)
        assert np.allclose(out.as_array(), stationary.as_array(), atol=1e-5)


# ---------------------------------------------------------------------------
# collapse and intensity


def test_collapse_from_ground_state_has_zero_weight():
    ground = PopulationState(1.0, 0.0, 0.0, 0.0)
    for channel in JumpChannel:
        collapsed, weight = fs.apply_emission_collapse(ground, channel)
        assert weight == 0.0
        assert collapsed.total() == 0.0


def test_collapse_moves_populations_down_one_rung():
    both = PopulationState(0.0, 0.0, 0.0, 1.0)
    collapsed, weight = fs.apply_emission_collapse(both, ACCEPTOR)
    assert (collapsed.p10, weight) == (1.0, 1.0)
    collapsed, weight = fs.apply_emission_collapse(both, DONOR)
    assert (collapsed.p01, weight) == (1.0, 1.0)


def test_reference_collapse_weight(reference_rates):
    state = fs.steady_state_fixed(reference_rates, 1.0)
    _, weight = fs.apply_emission_collapse(state, DONOR)
    assert weight == pytest.approx(EXACT_DONOR_WEIGHT, abs=1e-12)
    assert weight == pytest.approx(0.37212, abs=1e-5)


def test_reference_acceptor_intensity(reference_rates):
    state = fs.steady_state_fixed(reference_rates, 1.0)
    assert fs.intensity(state, ACCEPTOR) == pytest.approx(
        EXACT_ACCEPTOR_INTENSITY, abs=1e-12)
    assert fs.intensity(state, ACCEPTOR) == pytest.approx(0.32344, abs=1e-5)


def test_intensity_of_doubly_excited_state_is_one_for_both_channels():
    both = PopulationState(0.0, 0.0, 0.0, 1.0)
    assert fs.intensity(both, DONOR) == 1.0
    assert fs.intensity(both, ACCEPTOR) == 1.0


@settings(deadline=None, max_examples=60)
@given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4))
def test_collapse_weight_equals_intensity(raw):
    total = sum(raw)
    if total == 0.0:
        raw = [1.0, 0.0, 0.0, 0.0]
        total = 1.0
    state = PopulationState.from_array(np.array(raw) / total)
    for channel in JumpChannel:
        _, weight = fs.apply_emission_collapse(state, channel)
        assert weight == fs.intensity(state, channel)

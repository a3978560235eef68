import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import corpus
from edsym.extalg import Chart, ChartMismatch, VectorField
from edsym.isovector import determine_multipliers, determine_substitution
from edsym.symexpr import I as IMAG, const, var
from edsym.verify import (
    IDENTITIES,
    CandidateGenerator,
    MissingComponent,
    check_determining,
    check_generator,
    commutator,
    run_identity_suite,
)
from edsym.isovector import OpenIdeal

x, t, u, w = (var(n) for n in "xtuw")
CLASSICAL = ["translate_x", "translate_t", "scale_u", "scaling", "galilean", "projective"]


def test_translation_passes_with_zero_multipliers(heat):
    v = CandidateGenerator.of(heat.chart, {"x": 1}, "dx")
    rep = check_generator(v, heat.ideal())
    assert rep.passed and rep.verdict == "pass"
    for cert in rep.certificates:
        assert all(m is None or m.is_zero() for m in cert.multipliers)


def test_solution_addition_on_prime(heat_prime):
    v = CandidateGenerator.of(heat_prime.chart, {"u": x**2 + 2 * t, "w": 2 * x, "z": 2})
    rep = check_generator(v, heat_prime.ideal())
    assert rep.passed
    assert all(c.verify() for c in rep.certificates)


def test_maxwell_duality_multiplier():
    prob = corpus("maxwell")
    rep = check_generator(prob.candidates["duality"], prob.ideal())
    assert rep.passed
    first = rep.certificates[0]
    assert first.multipliers[0].as_scalar() == IMAG


def test_failing_candidate(heat):
    v = CandidateGenerator.of(heat.chart, {"x": u})
    rep = check_generator(v, heat.ideal())
    assert not rep.passed and rep.verdict == "fail"


def test_check_errors(heat):
    other = CandidateGenerator.of(Chart.of("x"), {"x": 1})
    with pytest.raises(ChartMismatch):
        check_generator(other, heat.ideal())
    with pytest.raises(OpenIdeal):
        check_generator(heat.candidates["translate_x"], heat.raw_ideal())


@pytest.fixture(scope="module")
def heat_systems(heat):
    J, v = heat.ideal(), heat.vector()
    return determine_multipliers(J, v), determine_substitution(J, v)


def test_determining_examples(heat, heat_systems):
    D = heat_systems[0]
    scaling = CandidateGenerator.of(heat.chart, {"x": x, "t": 2 * t, "w": -w})
    assert check_determining(D, scaling).passed
    bogus = CandidateGenerator.of(heat.chart, {"x": u})
    report = check_determining(D, bogus)
    assert not report.passed
    assert any(not r.is_zero() for r in report.residuals)
    zero = CandidateGenerator.of(heat.chart, {})
    assert check_determining(D, zero).passed


def test_missing_component(heat_prime):
    from edsym.frontend.cli import determine

    D = determine(heat_prime)
    with pytest.raises(MissingComponent):
        check_determining(D, heat_prime.candidates["translate_x"])


def test_agreement_across_strategies(heat, heat_systems):
    J = heat.ideal()
    bogus = {"bogus": CandidateGenerator.of(heat.chart, {"x": u}),
             "half": CandidateGenerator.of(heat.chart, {"x": x})}
    for name, c in {**heat.candidates, **bogus}.items():
        direct = check_generator(c, J).passed
        for D in heat_systems:
            assert check_determining(D, c).passed == direct, name


def test_commutator_closure(heat):
    J = heat.ideal()
    gens = [heat.candidates[n] for n in CLASSICAL]
    for a, b in itertools.combinations(gens, 2):
        assert check_generator(commutator(a, b), J).passed, (a.name, b.name)


def test_commutator_formula():
    ch = Chart.of("x", "t")
    a = CandidateGenerator.of(ch, {"x": 1})
    b = CandidateGenerator.of(ch, {"x": x * t})
    c = commutator(a, b)
    assert c.field["x"] == t and c.field["t"].is_zero()


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_linear_combinations_pass(heat, coeffs):
    J = heat.ideal()
    total = VectorField(heat.chart, {})
    for c, n in zip(coeffs, CLASSICAL):
        total = total + heat.candidates[n].field.scale(const(c))
    assert check_generator(CandidateGenerator(total), J).passed


def test_identity_suite_clean():
    failures = run_identity_suite(cases=50, seed=7)
    assert set(failures) == set(IDENTITIES)
    assert not any(failures.values())

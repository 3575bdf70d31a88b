"""Operator compositionality: moduli of continuity, verdicts, modulus checks."""

from fractions import Fraction

import pytest

from pgsos.continuity import (
    VERDICT_CONTINUOUS,
    VERDICT_NOT_SHOWN,
    ModulusSpec,
    check_modulus,
    derive_modulus,
    is_uniformly_continuous,
    parse_modulus,
    weighted_sup,
    weighted_sup_flagged,
)
from pgsos.errors import ArityMismatch, UndeclaredSymbol, UnsupportedModulusShape
from pgsos.frontend import parse_spec
from pgsos.multiplicity import INF
from pgsos.terms import state_var

F = Fraction


# -- ModulusSpec ------------------------------------------------------------

def test_modulus_evaluate_caps_at_one():
    z = ModulusSpec(2, (F(1), F(1)))
    assert z.evaluate((F(1, 10), F(1, 10))) == F(1, 5)
    assert z.evaluate((F(9, 10), F(9, 10))) == 1
    assert z.evaluate((F(0), F(0))) == 0


def test_modulus_evaluate_with_infinite_coefficient():
    z = ModulusSpec(1, (INF,))
    assert z.evaluate((F(0),)) == 0
    assert z.evaluate((F(1, 1000),)) == 1
    assert not z.is_finite()


def test_modulus_str_forms():
    assert str(ModulusSpec(2, (F(0), F(0)))) == "0"
    assert str(ModulusSpec(2, (F(1), F(1, 2)))) == "min(e1 + 1/2*e2, 1)"
    assert str(ModulusSpec(1, (INF,))) == "min(inf*e1, 1)"


def test_modulus_validates_shape():
    with pytest.raises(ValueError):
        ModulusSpec(2, (F(1),))
    with pytest.raises(ValueError):
        ModulusSpec(1, (F(-1),))
    with pytest.raises(ArityMismatch):
        ModulusSpec(1, (F(1),)).evaluate((F(0), F(0)))


# -- weighted suprema -------------------------------------------------------

def test_weighted_sup_single_generator_is_its_own_weighting(pa_doc):
    w = weighted_sup(pa_doc, "ppref_a_5_5")
    assert w.get(state_var("x1")) == F(1, 2)
    assert w.get(state_var("x2")) == F(1, 2)


def test_weighted_sup_dirac_generators_join_exactly(pa_doc):
    w, approx = weighted_sup_flagged(pa_doc, "alt")
    assert not approx
    assert w.get(state_var("x1")) == 1
    assert w.get(state_var("x2")) == 1


def test_weighted_sup_restricts_to_argument_positions(pa_doc):
    w = weighted_sup(pa_doc, "par")
    assert set(x.name for x in w.vars()) <= {"x1", "x2"}


def test_weighted_sup_unknown_operator(pa_doc):
    with pytest.raises(UndeclaredSymbol):
        weighted_sup(pa_doc, "missing")


MIXED = """
actions a, b;
op zero : 0;
op pref_a : 1;
op pref_b : 1;
op par : 2;
op mix : 2;
rule forall c in ACT:
  x1 --c--> m1
  x2 --c--> m2
  ---
  par(x1, x2) --c--> par(m1, m2)
rule:
  ---
  pref_a(x1) --a--> delta(x1)
rule:
  ---
  pref_b(x1) --b--> delta(x1)
rule:
  x1 --a--> m1
  ---
  mix(x1, x2) --a--> 1/2*par(m1, par(m1, m1)) + 1/2*delta(zero)
rule:
  x2 --b--> m2
  ---
  mix(x1, x2) --b--> m2
"""


def test_weighted_sup_flags_non_dirac_join():
    doc = parse_spec(MIXED)
    w, approx = weighted_sup_flagged(doc, "mix")
    assert approx
    # the joined bound is the pointwise max over support draws
    assert w.get(state_var("x1")) == 3
    assert w.get(state_var("x2")) == 1
    report = is_uniformly_continuous(doc, "mix")
    # the per-generator expectations (3/2 and 1) are still finite, so the
    # verdict holds even though the reported coefficients over-shoot
    assert report.verdict == VERDICT_CONTINUOUS
    assert report.over_approximated
    assert report.copies_bound == 2
    assert any("over-approximate" in r for r in report.reasons)


# -- verdicts on the shipped operator suites --------------------------------

def test_all_finite_algebra_operators_are_continuous(pa_doc):
    expected_copies = {"zero": 0, "pref_a": 1, "pref_b": 1,
                       "ppref_a_9_1": 1, "ppref_b_8_2": 1, "ppref_a_5_5": 1,
                       "alt": 1, "par": 1, "parB": 1, "ipar": 1}
    for op, _arity in pa_doc.signature.operators:
        report = is_uniformly_continuous(pa_doc, op)
        assert report.verdict == VERDICT_CONTINUOUS, op
        assert report.copies_bound == expected_copies[op], op
        assert not report.over_approximated
        assert report.annotation is None


def test_duplicating_operator_needs_two_copies(examples_doc):
    report = is_uniformly_continuous(examples_doc, "f_alt")
    assert report.verdict == VERDICT_CONTINUOUS
    assert report.copies_bound == 2
    assert str(report.modulus) == "min(2*e1, 1)"


def test_probabilistic_duplication_averages_to_one_copy(examples_doc):
    report = is_uniformly_continuous(examples_doc, "h_rep")
    assert report.verdict == VERDICT_CONTINUOUS
    assert report.copies_bound == 1
    assert str(report.modulus) == "min(e1, 1)"


def test_replication_is_not_shown_continuous(examples_doc):
    report = is_uniformly_continuous(examples_doc, "bang")
    assert report.verdict == VERDICT_NOT_SHOWN
    assert report.copies_bound is None
    assert report.modulus.coefficients == (INF,)
    assert report.widened
    assert any("infinite coefficient" in r for r in report.reasons)
    assert any("widening" in r for r in report.reasons)
    assert report.annotation is not None
    assert "unboundedly many" in report.annotation


def test_derived_modulus_satisfies_its_own_check(pa_doc, examples_doc):
    for doc in (pa_doc, examples_doc):
        for op, _arity in doc.signature.operators:
            z = derive_modulus(doc, op)
            assert check_modulus(doc, op, z), op


def test_check_modulus_hand_cases(pa_doc, examples_doc):
    assert check_modulus(pa_doc, "par", ModulusSpec(2, (F(1), F(1))))
    assert not check_modulus(pa_doc, "par", ModulusSpec(2, (F(1, 2), F(1))))
    assert check_modulus(pa_doc, "ppref_a_5_5", ModulusSpec(2, (F(1, 2), F(1, 2))))
    assert check_modulus(examples_doc, "bang", ModulusSpec(1, (INF,)))
    assert not check_modulus(examples_doc, "bang", ModulusSpec(1, (F(10**6),)))


def test_check_modulus_arity_mismatch(pa_doc):
    with pytest.raises(ArityMismatch):
        check_modulus(pa_doc, "par", ModulusSpec(1, (F(1),)))


def test_parallel_modulus_value(pa_doc):
    z = derive_modulus(pa_doc, "par")
    assert z.evaluate((F(1, 10), F(1, 10))) == F(1, 5)
    assert str(z) == "min(e1 + e2, 1)"


# -- parsing user-supplied moduli -------------------------------------------

def test_parse_modulus_accepted_shapes():
    assert parse_modulus("e1 + e2", 2).coefficients == (F(1), F(1))
    assert parse_modulus("min(e1 + e2, 1)", 2).coefficients == (F(1), F(1))
    assert parse_modulus("1/2*e1 + e2", 2).coefficients == (F(1, 2), F(1))
    assert parse_modulus("0.5*e1", 1).coefficients == (F(1, 2),)
    assert parse_modulus("inf*e1", 1).coefficients == (INF,)
    assert parse_modulus("0", 2).coefficients == (F(0), F(0))
    # duplicate indices accumulate
    assert parse_modulus("e1 + e1", 1).coefficients == (F(2),)
    assert parse_modulus("inf*e1 + e1", 1).coefficients == (INF,)


def test_parse_modulus_rejected_shapes():
    for text in ("e1*e2", "e1 - e2", "e1 + 1/2", "e3", "inf",
                 "min(e1, 2)", "", "sqrt(e1)"):
        with pytest.raises(UnsupportedModulusShape):
            parse_modulus(text, 2)

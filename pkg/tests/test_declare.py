import itertools
import random

import pytest

from presmon.declare import (
    Constraint,
    Family,
    RVState,
    Template,
    count_stats,
    holds_complete,
    holds_formula,
    parse_constraint,
    rv_state,
    rv_state_of,
)
from presmon.errors import ValidationError


def all_constraints(alphabet, ns=(1,)):
    """Every template instantiated over the alphabet (ordered pairs, no repeats)."""
    out = []
    for template in Template:
        if template.arity == 1:
            if template.takes_n:
                for n in ns:
                    shift = 1 if template is Template.ABSENCE else 0
                    out.extend(Constraint(template, a, n=n + shift) for a in alphabet)
            else:
                out.extend(Constraint(template, a) for a in alphabet)
        else:
            out.extend(
                Constraint(template, a, b)
                for a, b in itertools.permutations(alphabet, 2)
            )
    return out


def all_traces(alphabet, max_len):
    for length in range(max_len + 1):
        yield from (list(t) for t in itertools.product(alphabet, repeat=length))


class TestCountStats:
    def test_response_fulfilled_twice(self):
        s = count_stats(parse_constraint("response(a, b)"), ["a", "a", "b", "c"], done=True)
        assert (s.activations, s.fulfillments, s.violations, s.pendings) == (2, 2, 0, 0)

    def test_response_one_violation(self):
        s = count_stats(parse_constraint("response(a, b)"), ["a", "b", "a", "c"], done=True)
        assert (s.activations, s.fulfillments, s.violations) == (2, 1, 1)

    def test_response_pending_on_prefix(self):
        s = count_stats(parse_constraint("response(a, b)"), ["a", "a", "b", "a", "c"], done=False)
        assert s.pendings == 1

    def test_vacuous_trace_counts_nothing(self):
        s = count_stats(parse_constraint("response(a, b)"), ["x", "y"], done=True)
        assert (s.activations, s.fulfillments, s.violations, s.pendings) == (0, 0, 0, 0)


class TestRvState:
    def test_response_prefix_without_pending(self):
        c = parse_constraint("response(a, b)")
        assert rv_state(c, count_stats(c, ["a", "b"], False)) is RVState.POSSIBLY_SATISFIED

    def test_existence_absent_on_prefix(self):
        c = parse_constraint("existence(a)")
        assert rv_state_of(c, ["b", "c"], done=False) is RVState.POSSIBLY_VIOLATED

    def test_exactly_overshoot_is_permanent(self):
        c = parse_constraint("exactly(a)")
        assert rv_state_of(c, ["a", "b", "a"], done=False) is RVState.VIOLATED

    def test_codes(self):
        assert RVState.VIOLATED == 0
        assert RVState.SATISFIED == 1
        assert RVState.POSSIBLY_VIOLATED == 2
        assert RVState.POSSIBLY_SATISFIED == 3

    def test_done_state_is_resolved(self):
        for constraint in all_constraints(["a", "b", "c"]):
            for trace in [[], ["a"], ["a", "b"], ["c", "b", "a"], ["b", "b"]]:
                state = rv_state_of(constraint, trace, done=True)
                assert state.resolved, (constraint.text(), trace, state)


class TestHoldsComplete:
    TRACE = ["a", "b", "c", "a", "b", "c", "c", "a", "b"]

    def test_third_activation_violates(self):
        assert not holds_complete(parse_constraint("response(a, c)"), self.TRACE)

    def test_satisfied(self):
        assert holds_complete(parse_constraint("response(a, b)"), self.TRACE)

    def test_vacuous_satisfaction(self):
        for template in Template:
            if template.family not in (Family.PR, Family.NR):
                continue
            constraint = Constraint(template, "x", "y")
            expected = template is not Template.ALTERNATE_PRECEDENCE
            assert holds_complete(constraint, ["p", "q"]) is expected

    def test_alternate_precedence_formula_requires_activation(self):
        # the published formula's first conjunct (!B U A) fails when A never occurs
        c = parse_constraint("alternate precedence(a, b)")
        assert not holds_formula(c, ["x", "y"])
        assert not holds_complete(c, ["x", "y"])
        assert holds_complete(c, ["a", "x"])


class TestSemanticAgreement:
    """Counting route vs. LTLf formula route on every small trace."""

    @pytest.mark.parametrize("template", list(Template), ids=lambda t: t.value)
    def test_exhaustive_small(self, template):
        alphabet = ["a", "b"]
        if template.arity == 1:
            if template.takes_n:
                base = 2 if template is Template.ABSENCE else 1
                constraints = [
                    Constraint(template, "a", n=base),
                    Constraint(template, "a", n=base + 1),
                ]
            else:
                constraints = [Constraint(template, "a")]
        else:
            constraints = [Constraint(template, "a", "b"), Constraint(template, "b", "a")]
        for constraint in constraints:
            for trace in all_traces(alphabet, 5):
                counted = holds_complete(constraint, trace)
                direct = holds_formula(constraint, trace)
                assert counted == direct, (constraint.text(), trace)


class TestMonotoneResolution:
    def test_resolved_states_persist(self):
        rng = random.Random(4)
        alphabet = ["a", "b", "c", "d", "e"]
        constraints = all_constraints(alphabet[:3], ns=(1, 2))
        for _ in range(800):
            constraint = rng.choice(constraints)
            prefix = [rng.choice(alphabet) for _ in range(rng.randrange(0, 7))]
            state = rv_state_of(constraint, prefix, done=False)
            if not state.resolved:
                continue
            for ext_len in (1, 2):
                for ext in itertools.product(alphabet, repeat=ext_len):
                    extended = prefix + list(ext)
                    again = rv_state_of(constraint, extended, done=False)
                    assert again is state, (constraint.text(), prefix, ext, state, again)


class TestConstraintForm:
    def test_text_round_trip(self):
        for constraint in all_constraints(["ER Triage", "CRP"], ns=(1, 2)):
            assert parse_constraint(constraint.text()) == constraint

    def test_n_parameter_form(self):
        c = parse_constraint("existence(n=1, ER Triage)")
        assert c == Constraint(Template.EXISTENCE, "ER Triage", n=1)
        assert c.text() == "existence(ER Triage)"
        assert parse_constraint("absence(LacticAcid)").n == 2

    def test_bad_forms(self):
        with pytest.raises(ValidationError):
            parse_constraint("response(a)")
        with pytest.raises(ValidationError):
            parse_constraint("frobnicate(a, b)")
        with pytest.raises(ValidationError):
            Constraint(Template.RESPONSE, "a", "a")

    def test_families(self):
        assert Template.EXISTENCE.family is Family.E
        assert Template.CHOICE.family is Family.C
        assert Template.ALTERNATE_PRECEDENCE.family is Family.PR
        assert Template.NOT_RESPONSE.family is Family.NR
        assert sum(t.family is Family.E for t in Template) == 4
        assert sum(t.family is Family.PR for t in Template) == 7
        assert sum(t.family is Family.NR for t in Template) == 5

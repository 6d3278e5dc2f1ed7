import pytest

from presmon.errors import LtlfSyntaxError
from presmon.ltlf import (
    And,
    Atom,
    Const,
    Finally,
    Globally,
    Implies,
    Next,
    Not,
    Or,
    Until,
    ltlf_eval,
    parse_ltlf,
)


class TestSemantics:
    def test_atom_matches_position(self):
        assert ltlf_eval(Atom("a"), ["a", "b"], 0)
        assert not ltlf_eval(Atom("a"), ["a", "b"], 1)

    def test_eventually(self):
        assert ltlf_eval(Finally(Atom("a")), ["b", "a"], 0)
        assert not ltlf_eval(Finally(Atom("a")), ["b", "c"], 0)

    def test_next_is_strong(self):
        # no successor position on a finite trace
        assert not ltlf_eval(Next(Atom("a")), ["a"], 0)
        assert ltlf_eval(Next(Atom("a")), ["b", "a"], 0)

    def test_globally_vacuous_on_empty_suffix(self):
        assert ltlf_eval(Globally(Atom("a")), ["b"], 1)
        assert not ltlf_eval(Finally(Atom("a")), ["b"], 1)

    def test_response_shape(self):
        formula = Globally(Implies(Atom("a"), Finally(Atom("b"))))
        assert ltlf_eval(formula, ["a", "b", "c", "b"], 0)
        assert not ltlf_eval(formula, ["a", "b", "a", "c"], 0)

    def test_until(self):
        formula = Until(Not(Atom("b")), Atom("a"))
        assert ltlf_eval(formula, ["c", "a", "b"], 0)
        assert not ltlf_eval(formula, ["b", "a"], 0)
        assert not ltlf_eval(formula, ["c", "c"], 0)

    def test_empty_trace(self):
        assert ltlf_eval(Globally(Atom("a")), [], 0)
        assert not ltlf_eval(Atom("a"), [], 0)
        assert not ltlf_eval(Next(Const(True)), [], 0)

    def test_position_bounds(self):
        with pytest.raises(ValueError):
            ltlf_eval(Atom("a"), ["a"], 2)

    def test_unknown_atom_is_false(self):
        assert not ltlf_eval(Atom("zz"), ["a", "b"], 0)


class TestParser:
    def test_disjunction_of_eventualities(self):
        assert parse_ltlf("F(a) || F(b)") == Or(Finally(Atom("a")), Finally(Atom("b")))

    def test_precedence_implies_weakest(self):
        # a && b -> c  parses as  (a && b) -> c
        assert parse_ltlf("a && b -> c") == Implies(And(Atom("a"), Atom("b")), Atom("c"))

    def test_or_binds_looser_than_and(self):
        assert parse_ltlf("a || b && c") == Or(Atom("a"), And(Atom("b"), Atom("c")))

    def test_until_right_associative(self):
        assert parse_ltlf("a U b U c") == Until(Atom("a"), Until(Atom("b"), Atom("c")))

    def test_implies_right_associative(self):
        assert parse_ltlf("a -> b -> c") == Implies(Atom("a"), Implies(Atom("b"), Atom("c")))

    def test_unary_tighter_than_until(self):
        assert parse_ltlf("!a U b") == Until(Not(Atom("a")), Atom("b"))

    def test_labeling_formula_with_multiword_atoms(self):
        formula = parse_ltlf("G(send confirmation receipt -> F(retrieve missing data))")
        assert formula == Globally(
            Implies(Atom("send confirmation receipt"), Finally(Atom("retrieve missing data")))
        )

    def test_quoted_atoms(self):
        formula = parse_ltlf('F("tumor marker CA-19.9") || F(ca-125 using meia)')
        assert formula == Or(
            Finally(Atom("tumor marker CA-19.9")), Finally(Atom("ca-125 using meia"))
        )

    def test_constants(self):
        assert parse_ltlf("true") == Const(True)
        assert parse_ltlf("false") == Const(False)

    def test_unterminated_raises_at_end(self):
        with pytest.raises(LtlfSyntaxError) as err:
            parse_ltlf("F(a")
        assert err.value.position == len("F(a")

    def test_garbage_raises(self):
        with pytest.raises(LtlfSyntaxError):
            parse_ltlf("F(a) ||")
        with pytest.raises(LtlfSyntaxError):
            parse_ltlf("(a))")

    def test_alphabet_warning_logged(self, caplog):
        with caplog.at_level("WARNING"):
            parse_ltlf("F(ghost)", alphabet={"a", "b"})
        assert "ghost" in caplog.text

    def test_round_trip_through_str(self):
        for text in ["G(a -> F(b))", "(!a U b) || G(!b)", "F(a && X(F(a)))"]:
            formula = parse_ltlf(text)
            assert parse_ltlf(str(formula)) == formula

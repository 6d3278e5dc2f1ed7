"""DECLARE templates, activation counting, and four-valued RV states.

Each template is checked on a trace by counting activations, fulfillments,
violations and pendings, then mapping the counts to one of four
runtime-verification states. ``holds_complete`` (counting-based) and the
template's LTLf formula (``formula`` + ``ltlf.ltlf_eval``) are two
independent routes that must agree on complete traces; the test suite
enforces this exhaustively.

Counting convention: on a complete trace (``done=True``) nothing is left
pending, so unresolved activations are counted as violations; ``p > 0``
can only occur on prefixes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Sequence

from . import ltlf
from .errors import InvalidStats, ValidationError
from .ltlf import And, Atom, Finally, Globally, Implies, LtlfFormula, Next, Not, Or, Until


class RVState(IntEnum):
    VIOLATED = 0
    SATISFIED = 1
    POSSIBLY_VIOLATED = 2
    POSSIBLY_SATISFIED = 3

    @property
    def resolved(self) -> bool:
        return self in (RVState.VIOLATED, RVState.SATISFIED)

    def label(self) -> str:
        return {
            RVState.VIOLATED: "violated",
            RVState.SATISFIED: "satisfied",
            RVState.POSSIBLY_VIOLATED: "possibly violated",
            RVState.POSSIBLY_SATISFIED: "possibly satisfied",
        }[self]


class Family(str, Enum):
    E = "E"    # existence
    C = "C"    # choice
    PR = "PR"  # positive relations
    NR = "NR"  # negative relations


class Template(str, Enum):
    EXISTENCE = "existence"
    ABSENCE = "absence"
    EXACTLY = "exactly"
    INIT = "init"
    CHOICE = "choice"
    EXCLUSIVE_CHOICE = "exclusive_choice"
    RESPONDED_EXISTENCE = "responded_existence"
    RESPONSE = "response"
    ALTERNATE_RESPONSE = "alternate_response"
    CHAIN_RESPONSE = "chain_response"
    PRECEDENCE = "precedence"
    ALTERNATE_PRECEDENCE = "alternate_precedence"
    CHAIN_PRECEDENCE = "chain_precedence"
    NOT_RESPONDED_EXISTENCE = "not_responded_existence"
    NOT_RESPONSE = "not_response"
    NOT_PRECEDENCE = "not_precedence"
    NOT_CHAIN_RESPONSE = "not_chain_response"
    NOT_CHAIN_PRECEDENCE = "not_chain_precedence"

    @property
    def family(self) -> Family:
        return _FAMILY[self]

    @property
    def arity(self) -> int:
        return 1 if self.family is Family.E else 2

    @property
    def takes_n(self) -> bool:
        return self in (Template.EXISTENCE, Template.ABSENCE, Template.EXACTLY)

    @property
    def display(self) -> str:
        return self.value.replace("_", " ")


_FAMILY = {
    Template.EXISTENCE: Family.E,
    Template.ABSENCE: Family.E,
    Template.EXACTLY: Family.E,
    Template.INIT: Family.E,
    Template.CHOICE: Family.C,
    Template.EXCLUSIVE_CHOICE: Family.C,
    Template.RESPONDED_EXISTENCE: Family.PR,
    Template.RESPONSE: Family.PR,
    Template.ALTERNATE_RESPONSE: Family.PR,
    Template.CHAIN_RESPONSE: Family.PR,
    Template.PRECEDENCE: Family.PR,
    Template.ALTERNATE_PRECEDENCE: Family.PR,
    Template.CHAIN_PRECEDENCE: Family.PR,
    Template.NOT_RESPONDED_EXISTENCE: Family.NR,
    Template.NOT_RESPONSE: Family.NR,
    Template.NOT_PRECEDENCE: Family.NR,
    Template.NOT_CHAIN_RESPONSE: Family.NR,
    Template.NOT_CHAIN_PRECEDENCE: Family.NR,
}

# canonical template order: fixes the column order of every encoding
TEMPLATE_ORDER = list(Template)

# default count parameter per template when omitted from the textual form
_DEFAULT_N = {Template.EXISTENCE: 1, Template.EXACTLY: 1, Template.ABSENCE: 2}


@dataclass(frozen=True)
class Constraint:
    """A DECLARE template instantiated with concrete activities.

    For binary templates the two parameters keep the template's own order:
    e.g. in precedence(A, B) the checks fire on occurrences of B. ``n`` is
    the written count parameter (absence(n) forbids the n-th occurrence).
    """

    template: Template
    activation: str
    target: str | None = None
    n: int | None = None

    def __post_init__(self):
        if self.template.arity == 2:
            if self.target is None:
                raise ValidationError(f"{self.template.value} needs two activities")
            if self.target == self.activation:
                raise ValidationError(f"{self.template.value} parameters must differ")
        elif self.target is not None:
            raise ValidationError(f"{self.template.value} takes one activity")
        if self.template.takes_n:
            if self.n is None:
                object.__setattr__(self, "n", _DEFAULT_N[self.template])
            elif self.n < 1 or (self.template is Template.ABSENCE and self.n < 2):
                raise ValidationError(f"bad count parameter n={self.n} for {self.template.value}")
        elif self.n is not None:
            raise ValidationError(f"{self.template.value} takes no count parameter")

    def text(self) -> str:
        parts = []
        if self.template.takes_n and self.n != _DEFAULT_N[self.template]:
            parts.append(f"n={self.n}")
        parts.append(self.activation)
        if self.target is not None:
            parts.append(self.target)
        return f"{self.template.display}({', '.join(parts)})"

    def __str__(self):
        return self.text()

    def formula(self) -> LtlfFormula:
        return template_formula(self)


_CONSTRAINT_RE = re.compile(r"^\s*(?P<tpl>[a-z][a-z_ ]*?)\s*\(\s*(?P<body>.*?)\s*\)\s*$")


def parse_constraint(text: str) -> Constraint:
    """Parse the textual form, e.g. ``response(a, b)`` or ``existence(n=2, CRP)``."""
    m = _CONSTRAINT_RE.match(text)
    if m is None:
        raise ValidationError(f"not a constraint: {text!r}")
    try:
        template = Template(m.group("tpl").strip().replace(" ", "_"))
    except ValueError:
        raise ValidationError(f"unknown template in {text!r}") from None
    args = [a.strip() for a in m.group("body").split(",")] if m.group("body") else []
    n = None
    if args and re.fullmatch(r"n\s*=\s*\d+", args[0]):
        n = int(args[0].split("=")[1])
        args = args[1:]
    if len(args) != template.arity or any(not a for a in args):
        raise ValidationError(f"{template.value} expects {template.arity} activities: {text!r}")
    return Constraint(template, args[0], args[1] if len(args) == 2 else None, n)


@dataclass
class ActivationStats:
    activations: int = 0
    fulfillments: int = 0
    violations: int = 0
    pendings: int = 0
    done: bool = False


def count_stats(constraint: Constraint, trace: Sequence[str], done: bool) -> ActivationStats:
    """Count activations/fulfillments/violations/pendings on a (prefix) trace.

    Activities absent from the trace simply never match, so constraints over
    unknown activities degrade to vacuous cases.
    """
    t = constraint.template
    act, tgt, n = constraint.activation, constraint.target, constraint.n
    s = ActivationStats(done=done)
    seq = list(trace)
    length = len(seq)

    if t in (Template.EXISTENCE, Template.EXACTLY):
        s.activations = seq.count(act)
        s.fulfillments = s.activations
    elif t is Template.ABSENCE:
        count = seq.count(act)
        s.activations = count
        s.violations = max(0, count - (n - 1))
        s.fulfillments = count - s.violations
    elif t is Template.INIT:
        if length:
            s.activations = 1
            if seq[0] == act:
                s.fulfillments = 1
            else:
                s.violations = 1
    elif t is Template.CHOICE:
        s.activations = seq.count(act) + seq.count(tgt)
        s.fulfillments = s.activations
    elif t is Template.EXCLUSIVE_CHOICE:
        has_a, has_b = act in seq, tgt in seq
        s.activations = seq.count(act) + seq.count(tgt)
        if has_a and has_b:
            s.violations = 1
        else:
            s.fulfillments = s.activations
    elif t in (Template.RESPONDED_EXISTENCE, Template.NOT_RESPONDED_EXISTENCE):
        s.activations = seq.count(act)
        present = tgt in seq
        wanted = t is Template.RESPONDED_EXISTENCE
        if s.activations:
            if present == wanted:
                s.fulfillments = s.activations
            elif not wanted:  # both occur under the not-variant: definite violation
                s.violations = s.activations
            elif done:
                s.violations = s.activations
            else:
                s.pendings = s.activations
    elif t in (Template.RESPONSE, Template.NOT_RESPONSE):
        last_tgt = _rindex(seq, tgt)
        for i, x in enumerate(seq):
            if x != act:
                continue
            s.activations += 1
            followed = i < last_tgt
            if t is Template.RESPONSE:
                if followed:
                    s.fulfillments += 1
                elif done:
                    s.violations += 1
                else:
                    s.pendings += 1
            else:
                if followed:
                    s.violations += 1
                else:
                    s.fulfillments += 1
    elif t is Template.ALTERNATE_RESPONSE:
        open_activation = False
        for x in seq:
            if x == act:
                if open_activation:
                    s.violations += 1  # another activation before any target
                s.activations += 1
                open_activation = True
            elif x == tgt and open_activation:
                s.fulfillments += 1
                open_activation = False
        if open_activation:
            if done:
                s.violations += 1
            else:
                s.pendings += 1
    elif t in (Template.CHAIN_RESPONSE, Template.NOT_CHAIN_RESPONSE):
        forbidden = t is Template.NOT_CHAIN_RESPONSE
        for i, x in enumerate(seq):
            if x != act:
                continue
            s.activations += 1
            if i + 1 < length:
                hit = seq[i + 1] == tgt
                if hit != forbidden:
                    s.fulfillments += 1
                else:
                    s.violations += 1
            elif done:
                # strong next: nothing follows the last position of a
                # complete trace, so the obligation fails either way
                s.violations += 1
            else:
                s.pendings += 1
    elif t in (Template.PRECEDENCE, Template.NOT_PRECEDENCE):
        first_act = _index(seq, act)
        wanted = t is Template.PRECEDENCE
        for j, x in enumerate(seq):
            if x != tgt:
                continue
            s.activations += 1
            preceded = first_act >= 0 and first_act < j
            if preceded == wanted:
                s.fulfillments += 1
            else:
                s.violations += 1
    elif t is Template.ALTERNATE_PRECEDENCE:
        fresh = False
        last_was_fulfilled = False
        for i, x in enumerate(seq):
            if x == act:
                fresh = True
            elif x == tgt:
                s.activations += 1
                if fresh:
                    s.fulfillments += 1
                else:
                    s.violations += 1
                last_was_fulfilled = fresh and i == length - 1
                fresh = False
        if done:
            # the published formula wraps the follow-up condition in a strong
            # next, so a complete trace ending with the target fails it
            if last_was_fulfilled:
                s.fulfillments -= 1
                s.violations += 1
            # ... and its first conjunct demands the activation to occur at all
            if act not in seq and s.violations == 0:
                s.violations += 1
    elif t in (Template.CHAIN_PRECEDENCE, Template.NOT_CHAIN_PRECEDENCE):
        wanted = t is Template.CHAIN_PRECEDENCE
        for j, x in enumerate(seq):
            if x != tgt:
                continue
            s.activations += 1
            after_act = j > 0 and seq[j - 1] == act
            ok = after_act if wanted else not after_act
            # a target at position 0 is unconstrained by G(X B -> ...)
            if j == 0 or ok:
                s.fulfillments += 1
            else:
                s.violations += 1
    else:  # pragma: no cover
        raise InvalidStats(f"no counting rule for {t}")
    return s


def _index(seq, x):
    try:
        return seq.index(x)
    except ValueError:
        return -1


def _rindex(seq, x):
    for i in range(len(seq) - 1, -1, -1):
        if seq[i] == x:
            return i
    return -1


def rv_state(constraint: Constraint, stats: ActivationStats) -> RVState:
    """Map counts to the four-valued RV state via the per-template criteria."""
    t = constraint.template
    a, v, p, done = stats.activations, stats.violations, stats.pendings, stats.done
    n = constraint.n

    if t in (Template.RESPONSE, Template.RESPONDED_EXISTENCE):
        if done:
            return RVState.VIOLATED if (v or p) else RVState.SATISFIED
        return RVState.POSSIBLY_VIOLATED if p else RVState.POSSIBLY_SATISFIED
    if t in (
        Template.NOT_RESPONSE,
        Template.NOT_CHAIN_RESPONSE,
        Template.PRECEDENCE,
        Template.NOT_PRECEDENCE,
        Template.ABSENCE,
        Template.CHAIN_PRECEDENCE,
        Template.NOT_CHAIN_PRECEDENCE,
        Template.ALTERNATE_PRECEDENCE,
        Template.NOT_RESPONDED_EXISTENCE,
    ):
        if v:
            return RVState.VIOLATED
        return RVState.SATISFIED if done else RVState.POSSIBLY_SATISFIED
    if t is Template.INIT:
        if stats.fulfillments:
            return RVState.SATISFIED
        if v or done:  # an empty complete trace cannot start with anything
            return RVState.VIOLATED
        return RVState.POSSIBLY_VIOLATED
    if t is Template.EXISTENCE:
        if a >= n:
            return RVState.SATISFIED
        return RVState.VIOLATED if done else RVState.POSSIBLY_VIOLATED
    if t is Template.EXACTLY:
        if a > n or (done and a < n):
            return RVState.VIOLATED
        if done:
            return RVState.SATISFIED
        return RVState.POSSIBLY_SATISFIED if a == n else RVState.POSSIBLY_VIOLATED
    if t in (Template.CHAIN_RESPONSE, Template.ALTERNATE_RESPONSE):
        if v or (done and p):
            return RVState.VIOLATED
        if done:
            return RVState.SATISFIED
        return RVState.POSSIBLY_VIOLATED if p else RVState.POSSIBLY_SATISFIED
    if t is Template.CHOICE:
        if a:
            return RVState.SATISFIED
        return RVState.VIOLATED if done else RVState.POSSIBLY_VIOLATED
    if t is Template.EXCLUSIVE_CHOICE:
        if v or (done and a == 0):
            return RVState.VIOLATED
        if a == 0:
            return RVState.POSSIBLY_VIOLATED
        return RVState.SATISFIED if done else RVState.POSSIBLY_SATISFIED
    raise InvalidStats(f"no criteria row for {t} with {stats}")  # pragma: no cover


def rv_state_of(constraint: Constraint, trace: Sequence[str], done: bool) -> RVState:
    return rv_state(constraint, count_stats(constraint, trace, done))


def holds_complete(constraint: Constraint, trace: Sequence[str]) -> bool:
    """Boolean satisfaction on a complete trace (counting route)."""
    return rv_state_of(constraint, trace, done=True) is RVState.SATISFIED


def template_formula(constraint: Constraint) -> LtlfFormula:
    """The constraint's defining LTLf formula (the independent boolean route)."""
    t = constraint.template
    a = Atom(constraint.activation)
    b = Atom(constraint.target) if constraint.target else None
    n = constraint.n

    if t is Template.EXISTENCE:
        return _existence_formula(constraint.activation, n)
    if t is Template.ABSENCE:
        return Not(_existence_formula(constraint.activation, n))
    if t is Template.EXACTLY:
        return And(
            _existence_formula(constraint.activation, n),
            Not(_existence_formula(constraint.activation, n + 1)),
        )
    if t is Template.INIT:
        return a
    if t is Template.CHOICE:
        return Or(Finally(a), Finally(b))
    if t is Template.EXCLUSIVE_CHOICE:
        return Or(And(Finally(a), Not(Finally(b))), And(Not(Finally(a)), Finally(b)))
    if t is Template.RESPONDED_EXISTENCE:
        return Implies(Finally(a), Finally(b))
    if t is Template.RESPONSE:
        return Globally(Implies(a, Finally(b)))
    if t is Template.ALTERNATE_RESPONSE:
        return Globally(Implies(a, Next(Until(Not(a), b))))
    if t is Template.CHAIN_RESPONSE:
        return Globally(Implies(a, Next(b)))
    if t is Template.PRECEDENCE:
        return Or(Until(Not(b), a), Globally(Not(b)))
    if t is Template.ALTERNATE_PRECEDENCE:
        return And(
            Until(Not(b), a),
            Globally(Implies(b, Next(Or(Until(Not(b), a), Globally(Not(b)))))),
        )
    if t is Template.CHAIN_PRECEDENCE:
        return Globally(Implies(Next(b), a))
    if t is Template.NOT_RESPONDED_EXISTENCE:
        return Implies(Finally(a), Not(Finally(b)))
    if t is Template.NOT_RESPONSE:
        return Globally(Implies(a, Not(Finally(b))))
    if t is Template.NOT_PRECEDENCE:
        return Globally(Implies(Finally(b), Not(a)))
    if t is Template.NOT_CHAIN_RESPONSE:
        return Globally(Implies(a, Next(Not(b))))
    if t is Template.NOT_CHAIN_PRECEDENCE:
        return Globally(Implies(Next(b), Not(a)))
    raise InvalidStats(f"no formula for {t}")  # pragma: no cover


def _existence_formula(activity: str, n: int) -> LtlfFormula:
    node: LtlfFormula = Finally(Atom(activity))
    for _ in range(n - 1):
        node = Finally(And(Atom(activity), Next(node)))
    return node


def holds_formula(constraint: Constraint, trace: Sequence[str]) -> bool:
    """Boolean satisfaction on a complete trace (LTLf formula route)."""
    return ltlf.ltlf_eval(template_formula(constraint), trace, 0)

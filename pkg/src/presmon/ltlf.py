"""Linear temporal logic over finite traces: AST, parser, and evaluator.

Formulas are interpreted on traces where exactly one activity holds at
each position, so an atom is simply an activity name. Evaluation follows
the standard finite-trace semantics: X is a strong next (false when no
successor position exists), G/F/U quantify over the remaining suffix.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import LtlfSyntaxError

log = logging.getLogger(__name__)


class LtlfFormula:
    """Base class; concrete nodes are the dataclasses below."""

    def atoms(self) -> set[str]:
        found: set[str] = set()
        _collect_atoms(self, found)
        return found


@dataclass(frozen=True)
class Atom(LtlfFormula):
    name: str

    def __str__(self):
        if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*", self.name) and self.name not in _RESERVED:
            return self.name
        return '"%s"' % self.name.replace("\\", "\\\\").replace('"', '\\"')


@dataclass(frozen=True)
class Const(LtlfFormula):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Not(LtlfFormula):
    arg: LtlfFormula

    def __str__(self):
        return f"!({self.arg})"


@dataclass(frozen=True)
class And(LtlfFormula):
    left: LtlfFormula
    right: LtlfFormula

    def __str__(self):
        return f"({self.left} && {self.right})"


@dataclass(frozen=True)
class Or(LtlfFormula):
    left: LtlfFormula
    right: LtlfFormula

    def __str__(self):
        return f"({self.left} || {self.right})"


@dataclass(frozen=True)
class Implies(LtlfFormula):
    left: LtlfFormula
    right: LtlfFormula

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Next(LtlfFormula):
    arg: LtlfFormula

    def __str__(self):
        return f"X({self.arg})"


@dataclass(frozen=True)
class Globally(LtlfFormula):
    arg: LtlfFormula

    def __str__(self):
        return f"G({self.arg})"


@dataclass(frozen=True)
class Finally(LtlfFormula):
    arg: LtlfFormula

    def __str__(self):
        return f"F({self.arg})"


@dataclass(frozen=True)
class Until(LtlfFormula):
    left: LtlfFormula
    right: LtlfFormula

    def __str__(self):
        return f"({self.left} U {self.right})"


def _collect_atoms(node: LtlfFormula, found: set[str]) -> None:
    if isinstance(node, Atom):
        found.add(node.name)
    elif isinstance(node, (Not, Next, Globally, Finally)):
        _collect_atoms(node.arg, found)
    elif isinstance(node, (And, Or, Implies, Until)):
        _collect_atoms(node.left, found)
        _collect_atoms(node.right, found)


def ltlf_eval(formula: LtlfFormula, trace: Sequence[str], position: int = 0) -> bool:
    """Evaluate ``formula`` on ``trace`` starting at ``position``.

    ``position`` may equal ``len(trace)``, denoting the empty suffix
    (G holds vacuously, F/X/atoms are false there).
    """
    n = len(trace)
    if not 0 <= position <= n:
        raise ValueError(f"position {position} outside [0, {n}]")
    memo: dict[tuple[int, int], bool] = {}

    def ev(node: LtlfFormula, i: int) -> bool:
        key = (id(node), i)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(node, Atom):
            res = i < n and trace[i] == node.name
        elif isinstance(node, Const):
            res = node.value
        elif isinstance(node, Not):
            res = not ev(node.arg, i)
        elif isinstance(node, And):
            res = ev(node.left, i) and ev(node.right, i)
        elif isinstance(node, Or):
            res = ev(node.left, i) or ev(node.right, i)
        elif isinstance(node, Implies):
            res = (not ev(node.left, i)) or ev(node.right, i)
        elif isinstance(node, Next):
            res = i + 1 < n and ev(node.arg, i + 1)
        elif isinstance(node, Globally):
            res = all(ev(node.arg, j) for j in range(i, n))
        elif isinstance(node, Finally):
            res = any(ev(node.arg, j) for j in range(i, n))
        elif isinstance(node, Until):
            res = any(
                ev(node.right, j) and all(ev(node.left, l) for l in range(i, j))
                for j in range(i, n)
            )
        else:
            raise TypeError(f"not an LTLf node: {node!r}")
        memo[key] = res
        return res

    return ev(formula, position)


# --- parser -----------------------------------------------------------------
#
# Grammar (precedence: unary > U > && > || > ->, U and -> right-associative):
#   formula := or_expr ('->' formula)?
#   or_expr := and_expr ('||' and_expr)*
#   and_expr := until_expr ('&&' until_expr)*
#   until_expr := unary ('U' until_expr)?
#   unary := ('!' | 'X' | 'G' | 'F') unary | '(' formula ')' | 'true' | 'false' | atom
#
# Atoms are bare identifiers (letters, digits, '_', '.', '-', allowed to
# contain single spaces between words) or double-quoted strings. Activities
# named exactly X/G/F/U/true/false must be quoted.

_RESERVED = {"X", "G", "F", "U", "true", "false"}

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<lpar>\() | (?P<rpar>\)) |
        (?P<not>!) | (?P<and>&&) | (?P<or>\|\|) | (?P<impl>->) |
        (?P<quoted>"(?:[^"\\]|\\.)*") |
        (?P<word>[A-Za-z0-9_][A-Za-z0-9_.\-]*)
    )""",
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise LtlfSyntaxError(pos, "a token", text)
        kind = m.lastgroup
        value = m.group(kind)
        tokens.append((kind, value, m.start(kind)))
        pos = m.end()
    # merge adjacent words into multi-word atoms ("ER Sepsis Triage"),
    # except when the first word is a temporal operator
    merged: list[tuple[str, str, int]] = []
    for kind, value, start in tokens:
        if (
            kind == "word"
            and value not in _RESERVED
            and merged
            and merged[-1][0] == "word"
            and merged[-1][1] not in _RESERVED
        ):
            prev = merged.pop()
            merged.append(("word", prev[1] + " " + value, prev[2]))
        else:
            merged.append((kind, value, start))
    return merged


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind=None):
        tok = self.peek()
        if tok is None:
            raise LtlfSyntaxError(len(self.text), kind or "more input", self.text)
        if kind is not None and tok[0] != kind:
            raise LtlfSyntaxError(tok[2], kind, self.text)
        self.i += 1
        return tok

    def parse(self) -> LtlfFormula:
        node = self.formula()
        tok = self.peek()
        if tok is not None:
            raise LtlfSyntaxError(tok[2], "end of input", self.text)
        return node

    def formula(self) -> LtlfFormula:
        left = self.or_expr()
        tok = self.peek()
        if tok and tok[0] == "impl":
            self.take()
            return Implies(left, self.formula())
        return left

    def or_expr(self) -> LtlfFormula:
        node = self.and_expr()
        while (tok := self.peek()) and tok[0] == "or":
            self.take()
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> LtlfFormula:
        node = self.until_expr()
        while (tok := self.peek()) and tok[0] == "and":
            self.take()
            node = And(node, self.until_expr())
        return node

    def until_expr(self) -> LtlfFormula:
        left = self.unary()
        tok = self.peek()
        if tok and tok[0] == "word" and tok[1] == "U":
            self.take()
            return Until(left, self.until_expr())
        return left

    def unary(self) -> LtlfFormula:
        tok = self.peek()
        if tok is None:
            raise LtlfSyntaxError(len(self.text), "a formula", self.text)
        kind, value, start = tok
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "word" and value in ("X", "G", "F"):
            self.take()
            op = {"X": Next, "G": Globally, "F": Finally}[value]
            return op(self.unary())
        if kind == "lpar":
            self.take()
            node = self.formula()
            self.take("rpar")
            return node
        if kind == "word" and value == "true":
            self.take()
            return Const(True)
        if kind == "word" and value == "false":
            self.take()
            return Const(False)
        if kind == "word":
            if value == "U":
                raise LtlfSyntaxError(start, "a formula (found U)", self.text)
            self.take()
            return Atom(value)
        if kind == "quoted":
            self.take()
            raw = value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            return Atom(raw)
        raise LtlfSyntaxError(start, "a formula", self.text)


def parse_ltlf(text: str, alphabet: Iterable[str] | None = None) -> LtlfFormula:
    """Parse an LTLf formula; atoms outside ``alphabet`` only log a warning."""
    formula = _Parser(text).parse()
    if alphabet is not None:
        unknown = formula.atoms() - set(alphabet)
        if unknown:
            log.warning("formula atoms outside the alphabet: %s", sorted(unknown))
    return formula

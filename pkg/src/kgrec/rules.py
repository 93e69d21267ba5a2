"""Horn-style rule programs: terms, literals, rules, and a small parser.

Clause syntax (one clause per ``.``, ``%`` starts a comment)::

    willLike(U,E,M) :- likes(U,E), sim(E,M), isMovie(M).
    sim(X,X) :- true.

``:-`` is the ASCII spelling of the arrow; the arrow character itself works too.
Identifiers starting with an uppercase letter are variables, everything else
is a constant; constants with exotic characters can be single-quoted. The
predicates link/2, isMovie/1 and the four feedback predicates are builtins
resolved against the knowledge graph and may not appear as rule heads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

BUILTIN_ARITIES = {
    "link": 2,
    "isMovie": 1,
    "likesEntity": 2,
    "likesMovie": 2,
    "dislikesEntity": 2,
    "dislikesMovie": 2,
}

DEFAULT_RULES = """\
% Entity similarity: identity, or any chain of links to a similar entity.
sim(X,X) :- true.
sim(X,E) :- link(X,Z), sim(Z,E).

% A user will like movie M for reason E: a liked entity similar to M.
willLike(U,E,M) :- likes(U,E), sim(E,M), isMovie(M).
likes(U,E) :- likesEntity(U,E).
likes(U,E) :- likesMovie(U,M), link(M,E).

% The dislike side mirrors the like side over negative feedback.
willDislike(U,E,M) :- dislikes(U,E), sim(E,M), isMovie(M).
dislikes(U,E) :- dislikesEntity(U,E).
dislikes(U,E) :- dislikesMovie(U,M), link(M,E).
"""


class RuleError(Exception):
    """Base class for rule-program errors."""


class RuleSyntaxError(RuleError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ArityError(RuleError):
    def __init__(self, predicate: str, message: str):
        super().__init__(message)
        self.predicate = predicate


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    value: str


Term = Variable | Constant


@dataclass(frozen=True)
class Literal:
    predicate: str
    args: tuple[Term, ...]

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Rule:
    head: Literal
    body: tuple[Literal, ...]  # empty body = "true"


class RuleSet:
    """Rules in source order plus the arity table (user predicates + builtins)."""

    def __init__(self, rules: list[Rule]):
        self.rules = list(rules)
        self.arities = dict(BUILTIN_ARITIES)
        for rule in self.rules:
            for lit in (rule.head, *rule.body):
                known = self.arities.get(lit.predicate)
                if known is None:
                    self.arities[lit.predicate] = lit.arity
                elif known != lit.arity:
                    raise ArityError(
                        lit.predicate,
                        f"predicate {lit.predicate!r} used with arity {lit.arity}, "
                        f"previously {known}",
                    )
        self._by_predicate: dict[str, list[tuple[int, Rule]]] = {}
        for idx, rule in enumerate(self.rules):
            self._by_predicate.setdefault(rule.head.predicate, []).append((idx, rule))

    def rules_for(self, predicate: str) -> list[tuple[int, Rule]]:
        return self._by_predicate.get(predicate, [])

    def defines(self, predicate: str) -> bool:
        return predicate in self._by_predicate or predicate in BUILTIN_ARITIES

    def __len__(self) -> int:
        return len(self.rules)

    def __eq__(self, other) -> bool:
        return isinstance(other, RuleSet) and self.rules == other.rules


# --- tokenizer -----------------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z0-9_]+")
_BARE_CONST_RE = re.compile(r"[a-z0-9_][A-Za-z0-9_]*")

_ARROW = "ARROW"
_IDENT = "IDENT"
_PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", ".": "DOT"}


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "%":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "←":  # the arrow character
            tokens.append((_ARROW, ch, line, col))
            i += 1
            col += 1
        elif ch == ":" and i + 1 < n and text[i + 1] == "-":
            tokens.append((_ARROW, ":-", line, col))
            i += 2
            col += 2
        elif ch in _PUNCT:
            tokens.append((_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
        elif ch == "'":
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n or text[i] == "\n":
                    raise RuleSyntaxError("unterminated quoted constant", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in ("\\", "'"):
                        raise RuleSyntaxError("bad escape in quoted constant", line, col)
                    buf.append(text[i + 1])
                    i += 2
                    col += 2
                elif c == "'":
                    i += 1
                    col += 1
                    break
                else:
                    buf.append(c)
                    i += 1
                    col += 1
            tokens.append(("QUOTED", "".join(buf), start_line, start_col))
        else:
            m = _IDENT_RE.match(text, i)
            if not m:
                raise RuleSyntaxError(f"unexpected character {ch!r}", line, col)
            word = m.group(0)
            tokens.append((_IDENT, word, line, col))
            i = m.end()
            col += len(word)
    tokens.append(("EOF", "", line, col))
    return tokens


# --- parser --------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind: str, what: str):
        tok = self.tokens[self.pos]
        if tok[0] != kind:
            raise RuleSyntaxError(f"expected {what}, got {tok[1]!r}", tok[2], tok[3])
        self.pos += 1
        return tok

    def parse_program(self) -> list[Rule]:
        rules = []
        while self.peek()[0] != "EOF":
            rules.append(self.parse_clause())
        return rules

    def parse_clause(self) -> Rule:
        head_tok = self.peek()
        head = self.parse_literal()
        if head.predicate == "true":
            raise RuleSyntaxError("'true' cannot be a rule head", head_tok[2], head_tok[3])
        if head.predicate in BUILTIN_ARITIES:
            raise RuleSyntaxError(
                f"builtin predicate {head.predicate!r} cannot be a rule head",
                head_tok[2],
                head_tok[3],
            )
        self.take(_ARROW, "':-'")
        body: list[Literal] = []
        tok = self.peek()
        if tok[0] == _IDENT and tok[1] == "true" and self.tokens[self.pos + 1][0] == "DOT":
            self.pos += 1  # empty body
        else:
            body.append(self.parse_literal())
            while self.peek()[0] == "COMMA":
                self.pos += 1
                body.append(self.parse_literal())
        self.take("DOT", "'.'")
        rule = Rule(head=head, body=tuple(body))
        self._check_head_variables(rule, head_tok)
        return rule

    def _check_head_variables(self, rule: Rule, head_tok) -> None:
        body_vars = {t.name for lit in rule.body for t in lit.args if isinstance(t, Variable)}
        head_vars = [t.name for t in rule.head.args if isinstance(t, Variable)]
        for name in head_vars:
            if name not in body_vars and head_vars.count(name) == 1:
                raise RuleSyntaxError(
                    f"head variable {name} is unbound (not in body, not repeated in head)",
                    head_tok[2],
                    head_tok[3],
                )

    def parse_literal(self) -> Literal:
        tok = self.take(_IDENT, "a predicate name")
        predicate = tok[1]
        if predicate[0].isupper():
            raise RuleSyntaxError(f"predicate name cannot be a variable: {predicate!r}",
                                  tok[2], tok[3])
        self.take("LPAREN", "'('")
        args = [self.parse_term()]
        while self.peek()[0] == "COMMA":
            self.pos += 1
            args.append(self.parse_term())
        self.take("RPAREN", "')'")
        return Literal(predicate=predicate, args=tuple(args))

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok[0] == "QUOTED":
            self.pos += 1
            return Constant(tok[1])
        if tok[0] == _IDENT:
            self.pos += 1
            if tok[1][0].isupper():
                return Variable(tok[1])
            return Constant(tok[1])
        raise RuleSyntaxError(f"expected a term, got {tok[1]!r}", tok[2], tok[3])


def parse_rules(text: str) -> RuleSet:
    """Parse a rule program into a RuleSet, validating arities and head variables."""
    return RuleSet(_Parser(text).parse_program())


def parse_query(text: str) -> Literal:
    """Parse a single literal such as ``willLike(alice, E, M)`` (optional dot)."""
    parser = _Parser(text)
    literal = parser.parse_literal()
    if parser.peek()[0] == "DOT":
        parser.pos += 1
    parser.take("EOF", "end of query")
    return literal


_default_ruleset: RuleSet | None = None


def default_rules() -> RuleSet:
    """The built-in similarity + like/dislike prediction program."""
    global _default_ruleset
    if _default_ruleset is None:
        _default_ruleset = parse_rules(DEFAULT_RULES)
    return _default_ruleset


# --- printing ------------------------------------------------------------


def format_term(term: Term) -> str:
    if isinstance(term, Variable):
        return term.name
    if _BARE_CONST_RE.fullmatch(term.value):
        return term.value
    escaped = term.value.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def format_literal(lit: Literal) -> str:
    return f"{lit.predicate}({', '.join(format_term(t) for t in lit.args)})"


def format_rule(rule: Rule) -> str:
    body = ", ".join(format_literal(lit) for lit in rule.body) if rule.body else "true"
    return f"{format_literal(rule.head)} :- {body}."


def format_program(ruleset: RuleSet) -> str:
    return "\n".join(format_rule(rule) for rule in ruleset.rules) + ("\n" if ruleset.rules else "")

"""GBNF grammar synthesis for constrained graph extraction.

Emits grammars in the GBNF wire format understood by grammar-enforcing LM
inference servers: a static grammar accepting the graph JSON schema with
free string content, and a per-request grammar whose class/link values are
enumerations over a candidate vocabulary. Ships a reference recognizer and
a language sampler so emitted grammars can be tested hermetically.

The recognizer covers the constructs the emitters produce (literals,
character classes, alternation, grouping, ``*``/``+``/``?``), not all of
GBNF. Left recursion is rejected.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .ontology import OntologyIndex
from .semantic import CandidateSet


class GrammarError(ValueError):
    """Malformed grammar text or an unsupported construct."""


@dataclass(frozen=True)
class GrammarSpec:
    text: str
    root_rule: str = "root"
    vocab: tuple[tuple[str, ...], tuple[str, ...]] | None = None  # (class labels, link labels)


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------

_CONTROL = {i: f"\\x{i:02X}" for i in range(0x20)}
_CONTROL.update({0x22: '\\"', 0x5C: "\\\\"})


def gbnf_literal(text: str) -> str:
    """Quote text as a GBNF terminal, escaping quotes, backslashes, controls."""
    return '"' + "".join(_CONTROL.get(ord(c), c) for c in text) + '"'


def json_string_terminal(value: str) -> str:
    """GBNF terminal matching the JSON string serialization of value."""
    import json

    return gbnf_literal(json.dumps(value, ensure_ascii=False))


_SCHEMA_CORE = r'''
nodes ::= "[" ws "]" | "[" ws node (ws "," ws node)* ws "]"
node ::= "{" ws "\"id\"" ws ":" ws string ws "," ws "\"class\"" ws ":" ws classval ws "}"
edge ::= "{" ws "\"from\"" ws ":" ws string ws "," ws "\"link\"" ws ":" ws linkval ws "," ws "\"to\"" ws ":" ws string ws "}"
string ::= "\"" schar* "\""
schar ::= [^"\\\x00-\x1F] | "\\" escape
escape ::= ["\\/bfnrt] | "u" hex hex hex hex
hex ::= [0-9a-fA-F]
ws ::= " "?
'''.strip()

_ROOT = (
    'root ::= "{" ws "\\"nodes\\"" ws ":" ws nodes ws "," ws '
    '"\\"edges\\"" ws ":" ws edges ws "}"'
)

_EDGES_ANY = 'edges ::= "[" ws "]" | "[" ws edge (ws "," ws edge)* ws "]"'
_EDGES_EMPTY = 'edges ::= "[" ws "]"'


def static_schema_grammar() -> GrammarSpec:
    """Grammar accepting exactly the graph JSON schema with free-text
    class and link values."""
    lines = [
        _ROOT,
        _EDGES_ANY,
        _SCHEMA_CORE,
        "classval ::= string",
        "linkval ::= string",
    ]
    return GrammarSpec(text="\n".join(lines) + "\n")


def constrained_grammar(candidates: CandidateSet, index: OntologyIndex) -> GrammarSpec:
    """Grammar with class/link values restricted to the candidate labels.

    Labels are enumerated as quoted JSON strings, one terminal each, in
    candidate order (duplicates collapsed to the first). An empty link
    vocabulary forces the edges array to be empty.
    """
    class_labels = _unique(index.label_of(c.iri) for c in candidates.classes)
    link_labels = _unique(index.label_of(l.iri) for l in candidates.links)
    if not class_labels:
        raise GrammarError("cannot constrain to an empty class vocabulary")
    lines = [
        _ROOT,
        _EDGES_ANY if link_labels else _EDGES_EMPTY,
        _SCHEMA_CORE,
        "classval ::= " + " | ".join(json_string_terminal(l) for l in class_labels),
    ]
    if link_labels:
        lines.append("linkval ::= " + " | ".join(json_string_terminal(l) for l in link_labels))
    else:
        # unreferenced, but keeps the rule set identical in shape
        lines.append("linkval ::= string")
    return GrammarSpec(
        text="\n".join(lines) + "\n",
        vocab=(tuple(class_labels), tuple(link_labels)),
    )


def _unique(items) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


# --------------------------------------------------------------------------
# GBNF parsing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Lit:
    text: str


@dataclass(frozen=True)
class _CharClass:
    negated: bool
    ranges: tuple[tuple[str, str], ...]

    def matches(self, c: str) -> bool:
        inside = any(lo <= c <= hi for lo, hi in self.ranges)
        return inside != self.negated


@dataclass(frozen=True)
class _Ref:
    name: str


@dataclass(frozen=True)
class _Seq:
    items: tuple


@dataclass(frozen=True)
class _Alt:
    options: tuple


@dataclass(frozen=True)
class _Rep:
    item: object
    lo: int
    hi: int | None


class _Tokenizer:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, object]] = []
        i, n = 0, len(text)
        while i < n:
            c = text[i]
            if c in " \t\r\n":
                i += 1
            elif c == "#":
                while i < n and text[i] != "\n":
                    i += 1
            elif text.startswith("::=", i):
                self.tokens.append(("::=", None))
                i += 3
            elif c in "|()*+?":
                self.tokens.append((c, None))
                i += 1
            elif c == '"':
                value, i = self._read_quoted(text, i + 1)
                self.tokens.append(("lit", value))
            elif c == "[":
                cls, i = self._read_class(text, i + 1)
                self.tokens.append(("class", cls))
            elif c.isalnum() or c in "-_":
                j = i
                while j < n and (text[j].isalnum() or text[j] in "-_"):
                    j += 1
                self.tokens.append(("name", text[i:j]))
                i = j
            else:
                raise GrammarError(f"unexpected character {c!r} in grammar")

    @staticmethod
    def _read_escape(text: str, i: int) -> tuple[str, int]:
        if i >= len(text):
            raise GrammarError("dangling escape")
        c = text[i]
        simple = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\",
                  "[": "[", "]": "]", "^": "^", "-": "-", "/": "/"}
        if c in simple:
            return simple[c], i + 1
        if c == "x":
            return chr(int(text[i + 1:i + 3], 16)), i + 3
        if c == "u":
            return chr(int(text[i + 1:i + 5], 16)), i + 5
        if c == "U":
            return chr(int(text[i + 1:i + 9], 16)), i + 9
        raise GrammarError(f"unsupported escape \\{c}")

    def _read_quoted(self, text: str, i: int) -> tuple[str, int]:
        out: list[str] = []
        while True:
            if i >= len(text):
                raise GrammarError("unterminated terminal string")
            c = text[i]
            if c == '"':
                return "".join(out), i + 1
            if c == "\\":
                ch, i = self._read_escape(text, i + 1)
                out.append(ch)
            else:
                out.append(c)
                i += 1

    def _read_class(self, text: str, i: int) -> tuple[_CharClass, int]:
        negated = False
        if i < len(text) and text[i] == "^":
            negated = True
            i += 1
        ranges: list[tuple[str, str]] = []
        while True:
            if i >= len(text):
                raise GrammarError("unterminated character class")
            c = text[i]
            if c == "]":
                return _CharClass(negated, tuple(ranges)), i + 1
            if c == "\\":
                lo, i = self._read_escape(text, i + 1)
            else:
                lo = c
                i += 1
            hi = lo
            if i + 1 < len(text) and text[i] == "-" and text[i + 1] != "]":
                i += 1
                if text[i] == "\\":
                    hi, i = self._read_escape(text, i + 1)
                else:
                    hi = text[i]
                    i += 1
            ranges.append((lo, hi))


def parse_gbnf(text: str) -> dict[str, object]:
    """Parse GBNF text into a rule table; checks all references resolve."""
    tokens = _Tokenizer(text).tokens
    rules: dict[str, object] = {}
    pos = 0

    def at_rule_start(i: int) -> bool:
        return (
            i + 1 < len(tokens)
            and tokens[i][0] == "name"
            and tokens[i + 1][0] == "::="
        )

    def parse_alternation(i: int) -> tuple[object, int]:
        options = []
        branch, i = parse_sequence(i)
        options.append(branch)
        while i < len(tokens) and tokens[i][0] == "|":
            branch, i = parse_sequence(i + 1)
            options.append(branch)
        return (options[0] if len(options) == 1 else _Alt(tuple(options))), i

    def parse_sequence(i: int) -> tuple[object, int]:
        items = []
        while i < len(tokens) and tokens[i][0] not in ("|", ")") and not at_rule_start(i):
            item, i = parse_item(i)
            items.append(item)
        if not items:
            raise GrammarError("empty alternative branch")
        return (items[0] if len(items) == 1 else _Seq(tuple(items))), i

    def parse_item(i: int) -> tuple[object, int]:
        kind, value = tokens[i]
        if kind == "lit":
            node: object = _Lit(value)
            i += 1
        elif kind == "class":
            node = value
            i += 1
        elif kind == "name":
            node = _Ref(value)
            i += 1
        elif kind == "(":
            node, i = parse_alternation(i + 1)
            if i >= len(tokens) or tokens[i][0] != ")":
                raise GrammarError("unbalanced parentheses")
            i += 1
        else:
            raise GrammarError(f"unexpected token {kind!r}")
        while i < len(tokens) and tokens[i][0] in "*+?":
            op = tokens[i][0]
            lo, hi = {"*": (0, None), "+": (1, None), "?": (0, 1)}[op]
            node = _Rep(node, lo, hi)
            i += 1
        return node, i

    while pos < len(tokens):
        if not at_rule_start(pos):
            raise GrammarError("expected 'name ::=' at top level")
        name = tokens[pos][1]
        body, pos = parse_alternation(pos + 2)
        if name in rules:
            raise GrammarError(f"rule {name!r} defined twice")
        rules[name] = body

    def check(node: object) -> None:
        if isinstance(node, _Ref) and node.name not in rules:
            raise GrammarError(f"undefined nonterminal {node.name!r}")
        for child in getattr(node, "items", ()) or ():
            check(child)
        for child in getattr(node, "options", ()) or ():
            check(child)
        if isinstance(node, _Rep):
            check(node.item)

    for body in rules.values():
        check(body)
    if not rules:
        raise GrammarError("grammar has no rules")
    return rules


# --------------------------------------------------------------------------
# recognition
# --------------------------------------------------------------------------


class _Matcher:
    """Packrat matcher computing, per (rule, position), the set of end
    positions the rule can consume to. Linear-ish on the near-deterministic
    grammars emitted here."""

    _IN_PROGRESS = object()

    def __init__(self, rules: dict[str, object], text: str):
        self.rules = rules
        self.text = text
        self.memo: dict[tuple[str, int], object] = {}

    def rule_ends(self, name: str, pos: int) -> frozenset[int]:
        key = (name, pos)
        cached = self.memo.get(key)
        if cached is self._IN_PROGRESS:
            raise GrammarError(f"left recursion at rule {name!r}")
        if cached is not None:
            return cached  # type: ignore[return-value]
        self.memo[key] = self._IN_PROGRESS
        result = self.ends(self.rules[name], pos)
        self.memo[key] = result
        return result

    def ends(self, node: object, pos: int) -> frozenset[int]:
        if isinstance(node, _Lit):
            if self.text.startswith(node.text, pos):
                return frozenset((pos + len(node.text),))
            return frozenset()
        if isinstance(node, _CharClass):
            if pos < len(self.text) and node.matches(self.text[pos]):
                return frozenset((pos + 1,))
            return frozenset()
        if isinstance(node, _Ref):
            return self.rule_ends(node.name, pos)
        if isinstance(node, _Seq):
            current = {pos}
            for item in node.items:
                nxt: set[int] = set()
                for p in current:
                    nxt |= self.ends(item, p)
                if not nxt:
                    return frozenset()
                current = nxt
            return frozenset(current)
        if isinstance(node, _Alt):
            out: set[int] = set()
            for option in node.options:
                out |= self.ends(option, pos)
            return frozenset(out)
        if isinstance(node, _Rep):
            ends: set[int] = set()
            if node.lo == 0:
                ends.add(pos)
            current = {pos}
            visited = {pos}
            count = 0
            while current and (node.hi is None or count < node.hi):
                nxt: set[int] = set()
                for p in current:
                    nxt |= self.ends(node.item, p)
                count += 1
                if count >= node.lo:
                    ends |= nxt
                current = nxt - visited
                visited |= nxt
            return frozenset(ends)
        raise GrammarError(f"unknown grammar node {node!r}")


def recognize(g: GrammarSpec, text: str) -> bool:
    """True iff text is in the grammar's language from its root rule."""
    rules = parse_gbnf(g.text)
    if g.root_rule not in rules:
        raise GrammarError(f"root rule {g.root_rule!r} not defined")
    matcher = _Matcher(rules, text)
    return len(text) in matcher.rule_ends(g.root_rule, 0)


# --------------------------------------------------------------------------
# language sampling (test support)
# --------------------------------------------------------------------------

_SAMPLE_POOL = (
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.,:;!?'",
)[0]


def sample_string(g: GrammarSpec, rng: random.Random, max_budget: int = 200) -> str:
    """Draw a random member of the grammar's language.

    Random alternatives and geometric repeat counts while a size budget
    lasts, then minimum-depth choices to force termination.
    """
    rules = parse_gbnf(g.text)
    if g.root_rule not in rules:
        raise GrammarError(f"root rule {g.root_rule!r} not defined")
    depths = _min_depths(rules)

    budget = [max_budget]

    def node_depth(node: object) -> int:
        if isinstance(node, (_Lit, _CharClass)):
            return 0
        if isinstance(node, _Ref):
            return depths[node.name]
        if isinstance(node, _Seq):
            return max(node_depth(i) for i in node.items)
        if isinstance(node, _Alt):
            return min(node_depth(o) for o in node.options)
        if isinstance(node, _Rep):
            return 0 if node.lo == 0 else node_depth(node.item)
        raise GrammarError(f"unknown node {node!r}")

    def emit(node: object, out: list[str]) -> None:
        budget[0] -= 1
        frugal = budget[0] <= 0
        if isinstance(node, _Lit):
            out.append(node.text)
        elif isinstance(node, _CharClass):
            out.append(_sample_class(node, rng))
        elif isinstance(node, _Ref):
            emit(rules[node.name], out)
        elif isinstance(node, _Seq):
            for item in node.items:
                emit(item, out)
        elif isinstance(node, _Alt):
            if frugal:
                best = min(node_depth(o) for o in node.options)
                choices = [o for o in node.options if node_depth(o) == best]
            else:
                choices = list(node.options)
            emit(rng.choice(choices), out)
        elif isinstance(node, _Rep):
            count = node.lo
            if not frugal:
                cap = node.hi if node.hi is not None else node.lo + 8
                while count < cap and rng.random() < 0.5:
                    count += 1
            for _ in range(count):
                emit(node.item, out)
        else:
            raise GrammarError(f"unknown node {node!r}")

    out: list[str] = []
    emit(rules[g.root_rule], out)
    return "".join(out)


def _sample_class(cls: _CharClass, rng: random.Random) -> str:
    if not cls.negated:
        lo, hi = rng.choice(cls.ranges)
        return chr(rng.randint(ord(lo), ord(hi)))
    pool = [c for c in _SAMPLE_POOL if cls.matches(c)]
    if not pool:
        raise GrammarError("cannot sample from exhausted negated class")
    return rng.choice(pool)


def _min_depths(rules: dict[str, object]) -> dict[str, int]:
    """Fixpoint of minimal derivation depth per rule; unreachable stays inf."""
    INF = float("inf")
    depths: dict[str, float] = {name: INF for name in rules}

    def node_depth(node: object) -> float:
        if isinstance(node, (_Lit, _CharClass)):
            return 0
        if isinstance(node, _Ref):
            return depths[node.name] + 1
        if isinstance(node, _Seq):
            return max(node_depth(i) for i in node.items)
        if isinstance(node, _Alt):
            return min(node_depth(o) for o in node.options)
        if isinstance(node, _Rep):
            return 0 if node.lo == 0 else node_depth(node.item)
        raise GrammarError(f"unknown node {node!r}")

    changed = True
    while changed:
        changed = False
        for name, body in rules.items():
            d = node_depth(body)
            if d < depths[name]:
                depths[name] = d
                changed = True
    for name, d in depths.items():
        if d == INF:
            raise GrammarError(f"rule {name!r} cannot terminate")
    return {name: int(d) for name, d in depths.items()}

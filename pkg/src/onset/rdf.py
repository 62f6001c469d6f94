"""Minimal Turtle / N-Triples reader.

Parses the subset of Turtle needed to ingest ontology schemas at desk scale:
prefix directives, IRIs, prefixed names, the ``a`` keyword, literals
(short/long, language tags, datatypes), and ``;`` / ``,`` object lists.
Blank-node and collection syntax is skipped as opaque groups; anything the
ontology loader cares about lives in plain IRI-subject statements.

N-Triples documents are a syntactic subset of Turtle and go through the
same code path.
"""

from __future__ import annotations

from dataclasses import dataclass


class RdfParseError(ValueError):
    """Malformed document; carries a 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Iri:
    value: str


@dataclass(frozen=True)
class Literal:
    value: str
    lang: str = ""
    datatype: str = ""


Term = Iri | Literal

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

_WS = " \t\r\n"
_ESCAPES = {
    't': '\t', 'b': '\b', 'n': '\n', 'r': '\r', 'f': '\f',
    '"': '"', "'": "'", '\\': '\\',
}


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def error(self, message: str) -> RdfParseError:
        return RdfParseError(message, self.line)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self, n: int = 1) -> str:
        chunk = self.text[self.pos:self.pos + n]
        self.line += chunk.count("\n")
        self.pos += n
        return chunk

    def skip_ws(self) -> None:
        while not self.eof():
            c = self.peek()
            if c in _WS:
                self.advance()
            elif c == "#":
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            raise self.error(f"expected {token!r}")
        self.advance(len(token))


def _is_name_char(c: str) -> bool:
    return c.isalnum() or c in "_-.%:"


class _TurtleParser:
    """Statement-at-a-time recursive descent over a _Scanner."""

    def __init__(self, text: str):
        self.s = _Scanner(text)
        self.prefixes: dict[str, str] = {}
        self.base = ""
        self.triples: list[tuple[str, str, Term]] = []

    def parse(self) -> list[tuple[str, str, Term]]:
        while True:
            self.s.skip_ws()
            if self.s.eof():
                return self.triples
            if self._directive():
                continue
            self._triples_statement()

    # -- directives ---------------------------------------------------------

    def _directive(self) -> bool:
        text, pos = self.s.text, self.s.pos
        lowered = text[pos:pos + 8].lower()
        if text.startswith("@prefix", pos) or lowered.startswith("prefix "):
            self.s.advance(7 if text.startswith("@prefix", pos) else 6)
            self.s.skip_ws()
            name = self._read_prefix_name()
            self.s.skip_ws()
            iri = self._read_iriref()
            self._end_directive(sparql_form=not text.startswith("@", pos))
            self.prefixes[name] = iri
            return True
        if text.startswith("@base", pos) or lowered.startswith("base "):
            self.s.advance(5 if text.startswith("@base", pos) else 4)
            self.s.skip_ws()
            self.base = self._read_iriref()
            self._end_directive(sparql_form=not text.startswith("@", pos))
            return True
        return False

    def _end_directive(self, sparql_form: bool) -> None:
        self.s.skip_ws()
        if self.s.peek() == ".":
            self.s.advance()
        elif not sparql_form:
            raise self.s.error("expected '.' after directive")

    def _read_prefix_name(self) -> str:
        start = self.s.pos
        while not self.s.eof() and self.s.peek() != ":":
            if self.s.peek() in _WS:
                raise self.s.error("bad prefix declaration")
            self.s.advance()
        name = self.s.text[start:self.s.pos]
        self.s.expect(":")
        return name

    # -- triples ------------------------------------------------------------

    def _triples_statement(self) -> None:
        if self.s.peek() in "[(":
            self._skip_group()
            self.s.skip_ws()
            if self.s.peek() not in ".":  # anonymous subject with predicates
                self._predicate_object_list(subject=None)
            self.s.expect(".")
            return
        subject = self._read_iri_term()
        self._predicate_object_list(subject)
        self.s.expect(".")

    def _predicate_object_list(self, subject: str | None) -> None:
        while True:
            self.s.skip_ws()
            predicate = self._read_predicate()
            while True:
                obj = self._read_object()
                if subject is not None and obj is not None:
                    self.triples.append((subject, predicate, obj))
                self.s.skip_ws()
                if self.s.peek() == ",":
                    self.s.advance()
                    continue
                break
            if self.s.peek() == ";":
                self.s.advance()
                self.s.skip_ws()
                if self.s.peek() in ".;":  # trailing semicolon
                    while self.s.peek() == ";":
                        self.s.advance()
                        self.s.skip_ws()
                    return
                continue
            return

    def _read_predicate(self) -> str:
        self.s.skip_ws()
        if self.s.peek() == "a" and not _is_name_char(self.s.text[self.s.pos + 1:self.s.pos + 2]):
            self.s.advance()
            return RDF_TYPE
        return self._read_iri_term()

    def _read_object(self) -> Term | None:
        self.s.skip_ws()
        c = self.s.peek()
        if c == "":
            raise self.s.error("unexpected end of input in object position")
        if c in "[(":
            self._skip_group()
            return None
        if c in "\"'":
            return self._read_literal()
        if c == "<":
            return Iri(self._read_iriref())
        if c.isdigit() or c in "+-" or self.s.text.startswith(("true", "false"), self.s.pos):
            return self._read_numeric_or_bool()
        if self.s.text.startswith("_:", self.s.pos):
            self._read_name()
            return None
        return Iri(self._read_iri_term())

    # -- terms --------------------------------------------------------------

    def _read_iri_term(self) -> str:
        self.s.skip_ws()
        if self.s.peek() == "<":
            return self._resolve(self._read_iriref())
        name = self._read_name()
        if ":" not in name:
            raise self.s.error(f"expected IRI or prefixed name, got {name!r}")
        prefix, _, local = name.partition(":")
        if prefix not in self.prefixes:
            raise self.s.error(f"undeclared prefix {prefix!r}")
        return self.prefixes[prefix] + local

    def _resolve(self, iri: str) -> str:
        if self.base and "://" not in iri and not iri.startswith(("urn:", "mailto:")):
            return self.base + iri
        return iri

    def _read_iriref(self) -> str:
        self.s.expect("<")
        start = self.s.pos
        while not self.s.eof() and self.s.peek() != ">":
            if self.s.peek() in " \n":
                raise self.s.error("whitespace inside IRI")
            self.s.advance()
        if self.s.eof():
            raise self.s.error("unterminated IRI")
        iri = self.s.text[start:self.s.pos]
        self.s.advance()
        return iri

    def _read_name(self) -> str:
        start = self.s.pos
        text = self.s.text
        while self.s.pos < len(text):
            c = text[self.s.pos]
            if c == "." and (self.s.pos + 1 >= len(text) or not _is_name_char(text[self.s.pos + 1])):
                break  # statement-terminating dot
            if not _is_name_char(c):
                break
            self.s.advance()
        if self.s.pos == start:
            raise self.s.error(f"expected name at {text[self.s.pos:self.s.pos+10]!r}")
        return text[start:self.s.pos]

    def _read_literal(self) -> Literal:
        quote = self.s.peek()
        long_quote = quote * 3
        if self.s.text.startswith(long_quote, self.s.pos):
            self.s.advance(3)
            value = self._read_quoted_body(long_quote)
        else:
            self.s.advance()
            value = self._read_quoted_body(quote)
        lang, datatype = "", ""
        if self.s.peek() == "@":
            self.s.advance()
            start = self.s.pos
            while not self.s.eof() and (self.s.peek().isalnum() or self.s.peek() == "-"):
                self.s.advance()
            lang = self.s.text[start:self.s.pos]
        elif self.s.text.startswith("^^", self.s.pos):
            self.s.advance(2)
            datatype = self._read_iri_term()
        return Literal(value, lang, datatype)

    def _read_quoted_body(self, closer: str) -> str:
        out: list[str] = []
        while True:
            if self.s.eof():
                raise self.s.error("unterminated string literal")
            if self.s.text.startswith(closer, self.s.pos):
                self.s.advance(len(closer))
                return "".join(out)
            c = self.s.advance()
            if c != "\\":
                out.append(c)
                continue
            esc = self.s.advance()
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
            elif esc == "u":
                out.append(chr(int(self.s.advance(4), 16)))
            elif esc == "U":
                out.append(chr(int(self.s.advance(8), 16)))
            else:
                raise self.s.error(f"bad escape \\{esc}")

    def _read_numeric_or_bool(self) -> Literal:
        start = self.s.pos
        text = self.s.text
        if text.startswith("true", start) or text.startswith("false", start):
            word = "true" if text.startswith("true", start) else "false"
            self.s.advance(len(word))
            return Literal(word, datatype="http://www.w3.org/2001/XMLSchema#boolean")
        while not self.s.eof() and (self.s.peek().isdigit() or self.s.peek() in "+-.eE"):
            if self.s.peek() == "." and not self.s.text[self.s.pos + 1:self.s.pos + 2].isdigit():
                break
            self.s.advance()
        return Literal(text[start:self.s.pos], datatype="http://www.w3.org/2001/XMLSchema#integer")

    def _skip_group(self) -> None:
        """Skip a balanced [ ] or ( ) group, honoring string literals."""
        opener = self.s.advance()
        closer = "]" if opener == "[" else ")"
        depth = 1
        while depth > 0:
            if self.s.eof():
                raise self.s.error(f"unterminated {opener!r} group")
            c = self.s.peek()
            if c in "\"'":
                self._read_literal()
                continue
            if c == "#":
                self.s.skip_ws()
                continue
            if c in "[(":
                depth += 1
            elif c in "])":
                depth -= 1
            self.s.advance()


def parse_rdf(text: str) -> list[tuple[str, str, Term]]:
    """Parse a Turtle or N-Triples document into (subject, predicate, object) triples.

    Blank nodes and collections are skipped; only IRI-subject statements are
    returned. Raises RdfParseError on malformed input.
    """
    return _TurtleParser(text).parse()

"""Text format for diagrams.

    calculus zw                      # optional: reject qudit-only generators
    diagram 2 -> 1 {
      layer { split ; id }
      layer { id ; merge }
    }

Generators inside a layer are separated by ``;``.  Amplitude lists are
``[c1, c2, ...]`` with an optional infinite tail ``~geom(c)``, ``~const(c)``,
``~quad(x)``, ``~fact(x)``, ``~(f*g)`` or ``~(f+g)``.  Complex literals are
written ``a+bi``, ``bi`` or ``a``.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from zwinf.amplitudes import AmplitudeSeq, Family
from zwinf.diagram import Diagram, DiagramError, Generator, make_generator, to_token


class DslError(DiagramError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line, self.col = line, col


_NUM = r"(?:(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan)"
_TOKEN = re.compile(rf"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<complex>[+-]?{_NUM}(?:[+-]{_NUM}i|i)?(?![\w.]))
  | (?P<arrow>->)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[{{}}()\[\],;~*+])
""", re.VERBOSE)

# name -> (kind, number of integer parameters, takes an amplitude list)
_GENS = {
    "z": ("Z", 2, True), "zstate": ("ZState", 1, True), "x": ("X", 3, False),
    "w": ("W", 1, False), "wdag": ("WDag", 1, False), "ket": ("Ket", 1, False),
    "bra": ("Bra", 1, False), "mult": ("Mult", 1, False), "projm": ("ProjModes", 1, False),
    "projn": ("ProjN", 2, False), "split": ("Split", 0, False), "merge": ("Merge", 0, False),
    "swap": ("Swap", 0, False), "id": ("Id", 0, False), "cap": ("Cap", 0, False),
    "cup": ("Cup", 0, False), "dualiser": ("Dualiser", 0, False),
    "triangle": ("Triangle", 0, False), "had": ("H", 0, False), "haddag": ("HDag", 0, False),
    "vbox": ("V", 0, False), "mbox": ("M", 0, False), "proj2": ("ProjPair", 0, False),
}


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def _lex(text: str) -> list[Tok]:
    out, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line, col)
        kind, s = m.lastgroup, m.group()
        if kind != "ws":
            out.append(Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Tok("eof", "", line, col))
    return out


def parse_complex(s: str) -> complex:
    s = s.strip()
    if s.endswith("i"):
        m = re.fullmatch(rf"([+-]?{_NUM})([+-]{_NUM})i", s)
        if m:
            return complex(float(m.group(1)), float(m.group(2)))
        return complex(0.0, float(s[:-1]))
    return complex(float(s))


@dataclass
class DslDocument:
    source: str
    diagram: Diagram
    calculus: str | None
    spans: dict  # (layer, position) -> (line, col)


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise DslError(msg, tok.line, tok.col)

    def take(self, kind: str, text: str | None = None) -> Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = repr(text) if text else {"complex": "a number", "name": "a name"}.get(kind, kind)
            self.fail(f"expected {want}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def peek(self, text: str) -> bool:
        return self.tok.text == text

    def integer(self) -> int:
        t = self.take("complex")
        if not re.fullmatch(r"\d+", t.text):
            self.fail(f"expected a nonnegative integer, found {t.text!r}", t)
        return int(t.text)

    def number(self) -> complex:
        return parse_complex(self.take("complex").text)

    def family(self) -> Family:
        if self.peek("("):
            self.take("punct", "(")
            a = self.family()
            op = self.take("punct")
            if op.text not in "*+":
                self.fail(f"expected '*' or '+', found {op.text!r}", op)
            b = self.family()
            self.take("punct", ")")
            return Family("prod" if op.text == "*" else "sum", (a, b))
        t = self.take("name")
        if t.text not in ("const", "geom", "quad", "fact"):
            self.fail(f"unknown amplitude family {t.text!r}", t)
        self.take("punct", "(")
        v = self.number()
        self.take("punct", ")")
        if t.text in ("quad", "fact"):
            return Family(t.text, (v.real,))
        return Family(t.text, (v,))

    def amplitudes(self) -> AmplitudeSeq:
        self.take("punct", "[")
        entries, tail = [], None
        while not self.peek("]"):
            if self.peek("~"):
                self.take("punct", "~")
                tail = self.family()
                break
            entries.append(self.number())
            if not self.peek("]"):
                self.take("punct", ",")
        self.take("punct", "]")
        return AmplitudeSeq(tuple(entries), tail)

    def generator(self) -> Generator:
        t = self.tok
        if t.kind != "name":
            self.fail(f"expected a generator name, found {t.text or 'end of input'!r}")
        self.i += 1
        if t.text == "scalar":
            self.take("punct", "(")
            c = self.number()
            self.take("punct", ")")
            return make_generator("Scalar", c)
        if t.text not in _GENS:
            self.fail(f"unknown generator {t.text!r}", t)
        kind, nint, _ = _GENS[t.text]
        params = []
        if nint:
            self.take("punct", "(")
            for k in range(nint):
                if k:
                    self.take("punct", ",")
                if kind == "X" and k == 2:
                    params.append(int(self.number().real))
                else:
                    params.append(self.integer())
            self.take("punct", ")")
        try:
            if kind == "Z":
                a = self.amplitudes() if self.peek("[") else None
                return make_generator("Z", params[0], params[1], a)
            if kind == "ZState":
                return make_generator("ZState", params[0], self.amplitudes())
            return make_generator(kind, *params)
        except (ValueError, TypeError) as e:
            if isinstance(e, DslError):
                raise
            self.fail(str(e), t)

    def document(self, text: str) -> DslDocument:
        calc = None
        if self.peek("calculus"):
            self.take("name")
            c = self.take("name")
            if c.text not in ("zw", "zxw"):
                self.fail(f"unknown calculus {c.text!r}", c)
            calc = c.text
        head = self.take("name", "diagram")
        n_in = self.integer()
        self.take("arrow")
        n_out = self.integer()
        self.take("punct", "{")
        width, layers, spans = n_in, [], {}
        while self.peek("layer"):
            lt = self.take("name")
            self.take("punct", "{")
            gens = []
            while not self.peek("}"):
                gt = self.tok
                g = self.generator()
                if calc == "zw" and g.zxw_only:
                    self.fail(f"{to_token(g)} is not allowed under 'calculus zw'", gt)
                spans[(len(layers), len(gens))] = (gt.line, gt.col)
                gens.append(g)
                if not self.peek("}"):
                    self.take("punct", ";")
            self.take("punct", "}")
            consumed = sum(g.n_in for g in gens)
            if consumed != width:
                self.fail(f"layer consumes {consumed} wires but {width} arrive", lt)
            width = sum(g.n_out for g in gens)
            layers.append(tuple(gens))
        self.take("punct", "}")
        if width != n_out:
            self.fail(f"diagram ends with {width} wires, declared {n_out}", head)
        self.take("eof")
        return DslDocument(text, Diagram(n_in, n_out, tuple(layers)), calc, spans)


def parse_document(text: str) -> DslDocument:
    return _Parser(text).document(text)


def parse_dsl(text: str) -> Diagram:
    return parse_document(text).diagram


def print_dsl(diagram: Diagram, calculus: str | None = None) -> str:
    lines = [f"calculus {calculus}"] if calculus else []
    lines.append(f"diagram {diagram.n_in} -> {diagram.n_out} {{")
    for lay in diagram.layers:
        lines.append("  layer { " + " ; ".join(to_token(g) for g in lay) + " }")
    lines.append("}")
    return "\n".join(lines) + "\n"

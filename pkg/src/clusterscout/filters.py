"""Row-filter mini-language: comparisons, & / | combinators, substring terms.

Grammar (in precedence order, & binds tighter than |):

    expr    := and_expr ('|' and_expr)*
    and_expr:= term ('&' term)*
    term    := '(' expr ')' | comparison | bare
    comparison := IDENT op NUMBER        op in {==, !=, <, <=, >, >=}
    bare    := IDENT | 'quoted text' | NUMBER

A bare term selects rows whose row id or any stringified value contains
the token (case-insensitive). Feature names are matched case-insensitively.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Selection
from .errors import ParseError, UnknownFeature

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<num>[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)
  | (?P<str>'[^']*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Comparison:
    feature: str
    op: str
    value: float


@dataclass(frozen=True)
class TextTerm:
    token: str


@dataclass(frozen=True)
class BoolOp:
    kind: str  # '&' or '|'
    operands: tuple


@dataclass(frozen=True)
class FilterPredicate:
    ast: object
    text: str


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", len(self.text))
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            kind, val, pos = self.peek()
            raise ParseError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        operands = [self.and_expr()]
        while self.peek() and self.peek()[0] == "or":
            self.take()
            operands.append(self.and_expr())
        return operands[0] if len(operands) == 1 else BoolOp("|", tuple(operands))

    def and_expr(self):
        operands = [self.term()]
        while self.peek() and self.peek()[0] == "and":
            self.take()
            operands.append(self.term())
        return operands[0] if len(operands) == 1 else BoolOp("&", tuple(operands))

    def term(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", len(self.text))
        kind, val, pos = tok
        if kind == "lp":
            self.take()
            node = self.expr()
            closing = self.peek()
            if closing is None or closing[0] != "rp":
                raise ParseError("missing closing parenthesis", pos)
            self.take()
            return node
        if kind == "ident":
            self.take()
            nxt = self.peek()
            if nxt is not None and nxt[0] == "op":
                _, op, _ = self.take()
                lit = self.peek()
                if lit is None or lit[0] != "num":
                    where = lit[2] if lit else len(self.text)
                    raise ParseError("comparison requires a numeric literal", where)
                self.take()
                return Comparison(val, op, float(lit[1]))
            return TextTerm(val)
        if kind == "str":
            self.take()
            return TextTerm(val[1:-1])
        if kind == "num":
            self.take()
            return TextTerm(val)
        raise ParseError(f"unexpected {val!r}", pos)


def parse_filter(text: str) -> FilterPredicate:
    """Parse a filter expression; raises ParseError with the bad offset."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return FilterPredicate(_Parser(_tokenize(text), text).parse(), text)


_OPS = {
    "==": np.equal, "!=": np.not_equal,
    "<": np.less, "<=": np.less_equal,
    ">": np.greater, ">=": np.greater_equal,
}


def _format_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _eval(node, ds: Dataset) -> np.ndarray:
    if isinstance(node, Comparison):
        idx = ds.feature_index(node.feature)
        if idx is None:
            raise UnknownFeature(f"unknown feature {node.feature!r}")
        return _OPS[node.op](ds.values[:, idx], node.value)
    if isinstance(node, TextTerm):
        needle = node.token.lower()
        mask = np.zeros(ds.n_rows, dtype=bool)
        for i in range(ds.n_rows):
            if needle in ds.row_ids[i].lower():
                mask[i] = True
                continue
            mask[i] = any(needle in _format_value(v) for v in ds.values[i])
        return mask
    if isinstance(node, BoolOp):
        masks = [_eval(op, ds) for op in node.operands]
        combine = np.logical_and if node.kind == "&" else np.logical_or
        out = masks[0]
        for m in masks[1:]:
            out = combine(out, m)
        return out
    raise TypeError(f"unknown AST node {node!r}")


def evaluate(pred: FilterPredicate, ds: Dataset) -> Selection:
    """Evaluate a parsed filter against a dataset, yielding a Selection."""
    mask = _eval(pred.ast, ds)
    return Selection(tuple(int(i) for i in np.flatnonzero(mask)))

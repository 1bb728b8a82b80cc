"""Tokenizer and s-expression reader for SMT-LIB 2 text."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Union

from .errors import IllegalCharacter, UnbalancedParens, UnterminatedString

_SYMBOL_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789~!@$%^&*_-+=<>.?/"
)


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int

    def __str__(self):
        return self.text


def tokenize(text: str) -> List[Token]:
    """Split SMT-LIB text into parenthesis, atom and string tokens.

    Comments (``;`` to end of line) are dropped.  Quoted symbols keep their
    bars, strings keep their quotes.
    """
    tokens: List[Token] = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(k: int):
        nonlocal i, line, col
        for ch in text[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch in " \t\r\n\f\v":
            advance(1)
        elif ch == ";":
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            advance(1)
        elif ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise UnterminatedString("unterminated string literal", line, col)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            tokens.append(Token(text[i:j + 1], line, col))
            advance(j + 1 - i)
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise UnterminatedString("unterminated quoted symbol", line, col)
            tokens.append(Token(text[i:j + 1], line, col))
            advance(j + 1 - i)
        elif ch == "#":
            j = i + 1
            if j < n and text[j] in "bx":
                j += 1
                digits = "01" if text[i + 1] == "b" else "0123456789abcdefABCDEF"
                while j < n and text[j] in digits:
                    j += 1
            if j == i + 2 or j == i + 1:
                raise IllegalCharacter(f"malformed literal {text[i:j + 1]!r}", line, col)
            tokens.append(Token(text[i:j], line, col))
            advance(j - i)
        elif ch == ":" or ch in _SYMBOL_CHARS:
            j = i + 1
            while j < n and text[j] in _SYMBOL_CHARS:
                j += 1
            tokens.append(Token(text[i:j], line, col))
            advance(j - i)
        else:
            raise IllegalCharacter(f"illegal character {ch!r}", line, col)
    return tokens


@dataclass(frozen=True)
class Atom:
    token: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    def __str__(self):
        return self.token


@dataclass(frozen=True)
class SList:
    children: tuple
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.children)

    def __getitem__(self, k):
        return self.children[k]

    def __iter__(self):
        return iter(self.children)

    def __str__(self):
        return "(" + " ".join(str(c) for c in self.children) + ")"


SExpr = Union[Atom, SList]


def read_sexprs(tokens: Sequence[Token]) -> List[SExpr]:
    """Assemble tokens into a list of top-level s-expressions."""
    stack: List[tuple] = []
    out: List[SExpr] = []
    for tok in tokens:
        if tok.text == "(":
            stack.append((tok, []))
        elif tok.text == ")":
            if not stack:
                raise UnbalancedParens("unexpected ')'", tok.line, tok.column)
            open_tok, items = stack.pop()
            node = SList(tuple(items), open_tok.line, open_tok.column)
            (stack[-1][1] if stack else out).append(node)
        else:
            node = Atom(tok.text, tok.line, tok.column)
            (stack[-1][1] if stack else out).append(node)
    if stack:
        tok = stack[-1][0]
        raise UnbalancedParens("unclosed '('", tok.line, tok.column)
    return out


def parse_sexprs(text: str) -> List[SExpr]:
    return read_sexprs(tokenize(text))


def walk(e: SExpr) -> Iterator[SExpr]:
    """Pre-order, left-to-right traversal."""
    yield e
    if isinstance(e, SList):
        for c in e.children:
            yield from walk(c)

"""Tokenizer for ``.jv`` model files."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, ModelError

PUNCT = set("+-*/^()[]{},=_;")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, DEC, NEWLINE, EOF or the punctuation character itself
    text: str
    line: int
    col: int

    @property
    def length(self) -> int:
        return max(len(self.text), 1)

    def diag(self, message: str, severity: str = "error") -> Diagnostic:
        return Diagnostic(severity, message, self.line, self.col, self.length)


def tokenize(text: str) -> list[Token]:
    """Split source text into tokens.

    Newlines are significant statement separators except inside ``()`` and
    ``[]``.  ``#`` starts a comment that runs to the end of the line.
    """
    out: list[Token] = []
    errors: list[Diagnostic] = []
    depth = 0
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            if depth == 0:
                out.append(Token("NEWLINE", "\n", line, col))
            line, col, i = line + 1, 1, i + 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start, scol = i, col
        if ch.isalpha():
            while i < n and (text[i].isalnum() and text[i].isascii()):
                i += 1
            out.append(Token("IDENT", text[start:i], line, scol))
        elif ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            kind = "INT"
            if i + 1 < n and text[i] == "." and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
                kind = "DEC"
            out.append(Token(kind, text[start:i], line, scol))
        elif ch in PUNCT:
            i += 1
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth = max(depth - 1, 0)
            out.append(Token(ch, ch, line, scol))
        else:
            i += 1
            errors.append(Diagnostic("error", f"unexpected character {ch!r}", line, scol, 1))
        col = scol + (i - start)
    out.append(Token("EOF", "", line, col))
    if errors:
        raise ModelError(errors)
    return out

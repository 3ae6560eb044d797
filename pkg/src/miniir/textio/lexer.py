from __future__ import annotations

import re
from dataclasses import dataclass


class LexError(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(message)
        self.message = message
        self.pos = pos


@dataclass(frozen=True)
class Token:
    kind: str  # value block sym hash capture string int hexint float ident punct arrow eof
    text: str
    pos: int
    end: int


_SKIP = re.compile(r"(?:\s+|//[^\n]*)+")
_RULES = [
    ("value", re.compile(r"%[A-Za-z0-9_$.]+")),
    ("block", re.compile(r"\^[A-Za-z0-9_$.]+")),
    ("sym", re.compile(r"@[A-Za-z_$.][A-Za-z0-9_$.]*")),
    ("hash", re.compile(r"#[A-Za-z_][A-Za-z0-9_$.]*")),
    ("bang", re.compile(r"![A-Za-z_][A-Za-z0-9_.]*")),
    ("capture", re.compile(r"\$[A-Za-z_][A-Za-z0-9_]*")),
    ("hexint", re.compile(r"0x[0-9A-Fa-f]+")),
    ("float", re.compile(r"[0-9]+(?:\.[0-9]*(?:[eE][+-]?[0-9]+)?|[eE][+-]?[0-9]+)")),
    ("int", re.compile(r"[0-9]+")),
    ("ident", re.compile(r"[A-Za-z_][A-Za-z0-9_$.]*")),
    ("arrow", re.compile(r"->")),
    ("punct", re.compile(r"[()\[\]{}<>,:=+\-*?]")),
]


class Lexer:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0

    def next(self) -> Token:
        m = _SKIP.match(self.src, self.pos)
        if m:
            self.pos = m.end()
        if self.pos >= len(self.src):
            return Token("eof", "", self.pos, self.pos)
        c = self.src[self.pos]
        if c == '"':
            return self._string()
        if c == "@" and self.src.startswith('@"', self.pos):
            start = self.pos
            self.pos += 1
            s = self._string()
            return Token("sym", "@" + s.text, start, s.end)
        for kind, rx in _RULES:
            m = rx.match(self.src, self.pos)
            if m:
                start, self.pos = self.pos, m.end()
                return Token(kind, m.group(), start, self.pos)
        raise LexError(f"unexpected character {c!r}", self.pos)

    def _string(self) -> Token:
        start = self.pos
        i = start + 1
        out = bytearray()
        src = self.src
        while True:
            if i >= len(src) or src[i] == "\n":
                raise LexError("unterminated string literal", start)
            c = src[i]
            if c == '"':
                break
            if c == "\\":
                nxt = src[i + 1 : i + 2]
                if nxt in ('"', "\\"):
                    out += nxt.encode()
                    i += 2
                elif nxt == "n":
                    out += b"\n"
                    i += 2
                elif nxt == "t":
                    out += b"\t"
                    i += 2
                elif re.fullmatch(r"[0-9A-Fa-f]{2}", src[i + 1 : i + 3]):
                    out.append(int(src[i + 1 : i + 3], 16))
                    i += 3
                else:
                    raise LexError("invalid escape in string literal", i)
                continue
            out += c.encode()
            i += 1
        self.pos = i + 1
        try:
            text = out.decode()
        except UnicodeDecodeError:
            raise LexError("string literal is not valid UTF-8", start) from None
        return Token("string", text, start, self.pos)


def escape_string(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch.isprintable():
            out.append(ch)
        else:
            out.append("".join(f"\\{b:02X}" for b in ch.encode()))
    return '"' + "".join(out) + '"'


def line_col(src: str, pos: int) -> tuple[int, int]:
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col

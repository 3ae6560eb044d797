"""Textual pass pipelines: ``builtin.module(cse,func.func(canonicalize{max-iterations=5}))``."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union


class PipelineError(Exception):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.message = message
        self.pos = pos


@dataclass
class PassInvocation:
    name: str
    options: dict[str, str] = field(default_factory=dict)

    def __str__(self):
        if not self.options:
            return self.name
        return self.name + "{" + ",".join(f"{k}={v}" for k, v in self.options.items()) + "}"


@dataclass
class PipelineSpec:
    anchor: str
    entries: list[Union[PassInvocation, "PipelineSpec"]] = field(default_factory=list)

    def __str__(self):
        return f"{self.anchor}({','.join(map(str, self.entries))})"


_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_.\-]*)|(.))")
_VALUE = re.compile(r"\s*([^,}=\s]+)")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        m = _TOKEN.match(self.text, self.pos)
        if m is None or m.end() == m.start() or (m.group(1) is None and m.group(2) is None):
            return ("eof", "", len(self.text))
        start = m.start(1) if m.group(1) is not None else m.start(2)
        return ("name" if m.group(1) is not None else "punct", m.group(1) or m.group(2), start)

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        m = _TOKEN.match(self.text, self.pos)
        self.pos = m.end() if tok[0] != "eof" else len(self.text)
        return tok

    def expect(self, ch: str) -> None:
        kind, text, pos = self.next()
        if text != ch or kind != "punct":
            raise PipelineError(f"expected '{ch}', found '{text or 'end of input'}'", pos)


def parse_pipeline(text: str, known_passes=None) -> PipelineSpec:
    """Parse a pipeline; ``known_passes`` (names) defaults to the pass registry."""
    if known_passes is None:
        from miniir.passes.registry import PASSES

        known_passes = PASSES
    r = _Reader(text)
    kind, name, pos = r.next()
    if kind != "name":
        raise PipelineError("pipeline must start with an anchor op name", pos)
    spec = _nested(r, name, known_passes)
    kind, rest, pos = r.peek()
    if kind != "eof":
        raise PipelineError(f"unexpected '{rest}' after pipeline", pos)
    return spec


def _nested(r: _Reader, anchor: str, known) -> PipelineSpec:
    spec = PipelineSpec(anchor)
    r.expect("(")
    if r.peek()[1] == ")":
        r.next()
        return spec
    while True:
        kind, name, pos = r.next()
        if kind != "name":
            raise PipelineError(f"expected pass name, found '{name or 'end of input'}'", pos)
        if r.peek()[1] == "(":
            spec.entries.append(_nested(r, name, known))
        else:
            if name not in known:
                raise PipelineError(f"unknown pass '{name}'", pos)
            inv = PassInvocation(name)
            if r.peek()[1] == "{":
                r.next()
                inv.options = _options(r)
            spec.entries.append(inv)
        kind, sep, pos = r.next()
        if sep == ")":
            return spec
        if sep != ",":
            raise PipelineError(f"expected ',' or ')', found '{sep or 'end of input'}'", pos)


def _options(r: _Reader) -> dict[str, str]:
    opts: dict[str, str] = {}
    while True:
        kind, key, pos = r.next()
        if kind != "name":
            raise PipelineError(f"expected option name, found '{key}'", pos)
        r.expect("=")
        m = _VALUE.match(r.text, r.pos)
        if m is None:
            raise PipelineError(f"missing value for option '{key}'", r.pos)
        if key in opts:
            raise PipelineError(f"duplicate option '{key}'", pos)
        opts[key] = m.group(1)
        r.pos = m.end()
        kind, sep, pos = r.next()
        if sep == "}":
            return opts
        if sep != ",":
            raise PipelineError(f"expected ',' or '}}' in options, found '{sep}'", pos)

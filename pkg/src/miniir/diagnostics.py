"""Diagnostics with source locations."""

from __future__ import annotations

from dataclasses import dataclass, field

from miniir.ir import types as T


@dataclass
class Diagnostic:
    severity: str
    message: str
    location: T.Location = T.UNKNOWN_LOC
    rule: str = ""
    notes: list["Diagnostic"] = field(default_factory=list)

    def render(self) -> str:
        lines = [f"{_loc_prefix(self.location)}: {self.severity}: {self.message}"]
        for n in self.notes:
            lines.append("  " + n.render())
        return "\n".join(lines)

    def __str__(self):
        return self.render()


def _loc_prefix(loc: T.Location) -> str:
    f = T.innermost_file_loc(loc)
    if f is not None:
        return f"{f.file}:{f.line}:{f.col}"
    if isinstance(loc, T.NameLoc):
        return loc.tag
    return "<unknown>"


def op_location(op) -> T.Location:
    """The op's own file location, else the position it was parsed from."""
    if T.innermost_file_loc(op.location) is not None:
        return op.location
    pos = getattr(op, "_src_pos", None)
    if pos is not None:
        return T.FileLineColLoc(*pos)
    return op.location


def error(message: str, op=None, rule: str = "", location: T.Location | None = None) -> Diagnostic:
    if location is None:
        location = op_location(op) if op is not None else T.UNKNOWN_LOC
    return Diagnostic("error", message, location, rule)


def render_all(diags) -> str:
    return "\n".join(d.render() for d in diags)

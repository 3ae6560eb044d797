"""Shipped dialects and context construction."""

from __future__ import annotations

from miniir.ir.context import Context


def _builtin_factories():
    from miniir.dialects import affine, arith, builtin, cf, func, memref, ml

    return [builtin, func, arith, cf, memref, affine, ml]


def register_builtin_dialects(ctx: Context) -> Context:
    """Register builtin, func, arith, cf, memref, affine and ml. Raises on double registration."""
    for mod in _builtin_factories():
        ctx.register_dialect(mod.make_dialect())
    return ctx


def register_all_dialects(ctx: Context) -> Context:
    """The shipped dialects plus ``pat``, the dialect matcher programs are written in."""
    from miniir.pdl import dialect as pat

    register_builtin_dialects(ctx)
    ctx.register_dialect(pat.make_dialect())
    return ctx


def make_context(strict: bool = False) -> Context:
    return register_all_dialects(Context(allow_unregistered=not strict))

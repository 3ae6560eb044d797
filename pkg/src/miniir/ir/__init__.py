from miniir.ir import types
from miniir.ir.affine import (
    AffineBinary,
    AffineConst,
    AffineDim,
    AffineError,
    AffineExpr,
    AffineMap,
    AffineSym,
    eval_affine_map,
    simplify_expr,
)
from miniir.ir.context import (
    AttrConstraint,
    Context,
    Dialect,
    InlinerInterface,
    OpDefinition,
    RegistrationError,
    Trait,
    TypeConstraint,
    UnregisteredOpError,
)
from miniir.ir.core import (
    Block,
    BlockArgument,
    Builder,
    IRError,
    Operation,
    OpOperand,
    OpResult,
    Region,
    Value,
    audit_use_lists,
)
from miniir.ir.dominance import DominanceInfo, DomTree, properly_dominates
from miniir.ir.equality import structural_equal
from miniir.ir.symbols import SymbolTable, lookup_symbol, resolve_symbol, symbol_name
from miniir.ir.types import ValidationError

__all__ = [name for name in dir() if not name.startswith("_")]

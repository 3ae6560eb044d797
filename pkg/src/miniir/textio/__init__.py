from miniir.textio.parser import ParseError, Parser, parse_affine_map, parse_attribute, parse_source, parse_type
from miniir.textio.printer import Printer, format_float, print_op

__all__ = [
    "ParseError",
    "Parser",
    "Printer",
    "format_float",
    "parse_affine_map",
    "parse_attribute",
    "parse_source",
    "parse_type",
    "print_op",
]

"""A small language for writing functional equations as text."""
from .compiler import CompiledSystem, Derivation, compile_system, compile_text, space_for
from .formatter import format_expr, format_system
from .normalize import canonical
from .parser import parse_system

__all__ = [
    "CompiledSystem", "Derivation", "canonical", "compile_system", "compile_text",
    "format_expr", "format_system", "parse_system", "space_for",
]

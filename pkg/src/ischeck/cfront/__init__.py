"""C front end: preprocessor, parser, semantic model and control-flow graphs."""

from .lexer import FrontendError, ParseError, UnsupportedConstruct
from .model import CModule, parse_module

__all__ = ["CModule", "FrontendError", "ParseError", "UnsupportedConstruct", "parse_module"]

"""Parse arithmetic expressions in the symbol ``k`` into exact κ-rationals.

The grammar is ordinary infix arithmetic: ``+ - * /``, integer powers
written ``^`` (or ``**``), integer literals (rationals are written as
quotients), parentheses and the single symbol ``k``.  ``^`` is rewritten to
``**`` so it gets power precedence, then Python's ``ast`` module does the
tokenizing; only a whitelisted handful of node types is accepted.
"""

from __future__ import annotations

import ast

from .kappa import ONE, K, KappaRational, PoleError, as_krat

__all__ = ["RhoSyntaxError", "parse_rho", "format_rho", "MAX_EXPONENT"]

MAX_EXPONENT = 64


class RhoSyntaxError(ValueError):
    """Raised for malformed input; ``position`` is a 0-based column of the source."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _rewrite(text: str):
    """Replace ``^`` by ``**``; also return a column map back into ``text``."""
    out, cols = [], []
    for i, ch in enumerate(text):
        if ch == "^":
            out.append("**")
            cols.extend((i, i))
        else:
            out.append(ch)
            cols.append(i)
    cols.append(len(text))
    return "".join(out), cols


class _Located(Exception):
    def __init__(self, kind, message, col):
        self.kind, self.message, self.col = kind, message, col


def _evaluate(node) -> KappaRational:
    if isinstance(node, ast.Expression):
        return _evaluate(node.body)
    if isinstance(node, ast.Constant):
        if type(node.value) is not int:
            raise _Located(RhoSyntaxError, f"unsupported literal {node.value!r}", node.col_offset)
        return as_krat(node.value)
    if isinstance(node, ast.Name):
        if node.id != "k":
            raise _Located(RhoSyntaxError, f"unknown symbol {node.id!r}", node.col_offset)
        return K
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        v = _evaluate(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            return _power(node)
        left = _evaluate(node.left)
        right = _evaluate(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right:
                raise _Located(ZeroDivisionError, "zero denominator", node.right.col_offset)
            return left / right
    raise _Located(RhoSyntaxError, f"unsupported construct {type(node).__name__}",
                   getattr(node, "col_offset", 0))


def _power(node: ast.BinOp) -> KappaRational:
    base = _evaluate(node.left)
    exp_node = node.right
    sign = 1
    if isinstance(exp_node, ast.UnaryOp) and isinstance(exp_node.op, (ast.USub, ast.UAdd)):
        sign = -1 if isinstance(exp_node.op, ast.USub) else 1
        exp_node = exp_node.operand
    if not (isinstance(exp_node, ast.Constant) and type(exp_node.value) is int):
        raise _Located(RhoSyntaxError, "exponent must be an integer literal",
                       node.right.col_offset)
    n = sign * exp_node.value
    if abs(n) > MAX_EXPONENT:
        raise _Located(RhoSyntaxError, f"exponent larger than {MAX_EXPONENT}",
                       node.right.col_offset)
    if n < 0:
        if not base:
            raise _Located(ZeroDivisionError, "zero denominator", node.left.col_offset)
        return ONE / base ** (-n)
    return base ** n


def parse_rho(src: str) -> KappaRational:
    """Exact value of ``src``; whitespace is ignored.

    >>> str(parse_rho("(k-4)/2"))
    '1/2*k - 2'
    """
    if not isinstance(src, str) or not src.strip():
        raise RhoSyntaxError("empty expression", 0)
    for bad in "\n\r":
        if bad in src:
            raise RhoSyntaxError("line breaks are not allowed", src.index(bad))
    text, cols = _rewrite(src)
    lead = len(text) - len(text.lstrip())
    body = text.strip()

    def where(col):
        return cols[min(col + lead, len(cols) - 1)]

    try:
        tree = ast.parse(body, mode="eval")
    except SyntaxError as exc:
        if not exc.offset:
            raise RhoSyntaxError("unexpected end of input", len(src)) from None
        raise RhoSyntaxError(exc.msg, where(exc.offset - 1)) from None
    try:
        return _evaluate(tree)
    except _Located as err:
        if err.kind is ZeroDivisionError:
            raise ZeroDivisionError(f"{err.message} at position {where(err.col)}") from None
        raise RhoSyntaxError(err.message, where(err.col)) from None
    except PoleError as exc:
        raise ZeroDivisionError(str(exc)) from None


def format_rho(value) -> str:
    """Printed form that :func:`parse_rho` reads back to the same value."""
    return str(as_krat(value))

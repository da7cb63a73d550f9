"""Polynomial expressions in ``x`` for config-defined boundary functions.

Grammar: real constants, ``x``, ``+``, ``-``, ``*``, ``^`` (or ``**``) with
nonnegative integer exponents, and parentheses. The expression is validated
on its Python AST and then evaluated on :class:`numpy.polynomial.Polynomial`
objects, so the result is an exact coefficient representation.
"""

from __future__ import annotations

import ast

from numpy.polynomial import Polynomial


class ExpressionError(ValueError):
    pass


_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Pow)


def _build(node: ast.AST) -> Polynomial:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return Polynomial([float(node.value)])
    if isinstance(node, ast.Name):
        if node.id != "x":
            raise ExpressionError(f"unknown variable {node.id!r}; only 'x' is allowed")
        return Polynomial([0.0, 1.0])
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _build(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and exp.value >= 0):
                raise ExpressionError("exponents must be nonnegative integer literals")
            return _build(node.left) ** exp.value
        left, right = _build(node.left), _build(node.right)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        return left * right
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_polynomial(text: str) -> Polynomial:
    """Parse ``text`` such as ``"2 - x^2"`` into a polynomial."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return _build(tree)

"""Tiny closed-form expression vocabulary for configuring the data.

Initial vorticity is an expression in ``x, y``; the boundary flux is one in
``t, s`` (``s`` the boundary parameter).  Available pieces: numbers, ``pi``,
the arithmetic operators, ``sin cos exp sqrt abs``, positive/negative parts
``pos``/``neg``, and the bump ``gauss(cx, cy, sigma)`` = exp(-|r-c|^2 /
(2 sigma^2)) (field expressions only).  Everything unknown is rejected by
name, so configs stay data, not code.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ConfigError

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "pos": lambda v: np.maximum(v, 0.0),
    "neg": lambda v: np.maximum(-v, 0.0),
    "min": np.minimum,
    "max": np.maximum,
}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


def _eval_node(node, env):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)):
            return float(node.value)
        raise ConfigError(f"literal {node.value!r} is not a number")
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        raise ConfigError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, env), _eval_node(node.right, env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ConfigError("only plain calls to named functions are allowed")
        name = node.func.id
        args = [_eval_node(a, env) for a in node.args]
        if name == "gauss":
            if "x" not in env or "y" not in env:
                raise ConfigError("gauss(...) is only available in field expressions")
            if len(args) != 3:
                raise ConfigError("gauss takes (cx, cy, sigma)")
            cx, cy, sigma = args
            return np.exp(
                -((env["x"] - cx) ** 2 + (env["y"] - cy) ** 2) / (2.0 * sigma**2)
            )
        if name in _FUNCS:
            try:
                return _FUNCS[name](*args)
            except TypeError as exc:
                raise ConfigError(f"bad arguments for {name}: {exc}") from None
        raise ConfigError(f"unknown function {name!r} in expression")
    raise ConfigError(f"unsupported expression element: {ast.dump(node)[:60]}")


def _compile(text: str, var_names: tuple[str, str]):
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from None
    # trial evaluation surfaces unknown names and disallowed constructs now,
    # not in the middle of a run; numeric corner cases stay a runtime concern
    probe = {var_names[0]: 0.5, var_names[1]: 0.5, "pi": np.pi}
    with np.errstate(all="ignore"):
        _eval_node(tree, probe)

    def fn(a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        env = {var_names[0]: a, var_names[1]: b, "pi": np.pi}
        out = _eval_node(tree, env)
        # force full broadcast so constant expressions still return arrays
        return np.asarray(out, dtype=float) + 0.0 * (a + b)

    fn.source = text
    return fn


def parse_field_expr(text: str):
    """Compile an expression in (x, y) into a vectorized callable."""
    return _compile(text, ("x", "y"))


def parse_boundary_expr(text: str):
    """Compile an expression in (t, s) into a vectorized callable."""
    return _compile(text, ("t", "s"))

"""Model configuration files and the coefficient expression grammar.

A configuration is line-oriented ``key = value`` text; ``#`` starts a comment.
It names either a built-in model::

    model = heston
    kappa = 1
    theta = 1
    xi = 2
    rho = -0.5
    x0 = 1

or a custom diffusion given by expressions in ``x``::

    drift = 0.5 * (1 - x)
    diffusion = sqrt(x)
    exponent = sqrt(x)
    left = 0
    right = inf
    x0 = 1
    rho = -0.5

Expressions use numbers, ``x``, the constants ``pi`` and ``e``, the operators
``+ - * /`` and ``^`` or ``**`` for powers, parentheses, and the functions
``exp``, ``log``, ``sqrt`` and ``abs``.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .model import MODEL_IDS, DiffusionSpec, builtin, model_parameters


class ConfigError(ValueError):
    """A configuration or expression error with its 1-based line and column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str = "<config>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")


FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
_BINARY = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


@dataclass(frozen=True)
class Expression:
    """A parsed coefficient expression, callable on numpy arrays."""

    text: str
    tree: ast.expr

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return np.broadcast_to(_eval(self.tree, x), x.shape).astype(float)

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"


def _eval(node: ast.expr, x: np.ndarray):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return x if node.id == "x" else CONSTANTS[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, x)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        return _BINARY[type(node.op)](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, ast.Call):
        return FUNCTIONS[node.func.id](_eval(node.args[0], x))
    raise AssertionError(f"unvalidated node {node!r}")


def parse_expression(text: str, line: int | None = None, column_offset: int = 0,
                     source: str = "<expression>") -> Expression:
    """Parse and validate ``text``; error columns refer to ``text`` shifted by ``column_offset``."""
    # '^' is exponentiation here; map it to '**' and remember the shift so
    # error columns still point into the original text
    carets = [i for i, ch in enumerate(text) if ch == "^"]
    py = text.replace("^", "**")

    def column(py_col: int) -> int:
        shift = sum(1 for k, i in enumerate(carets) if i + k < py_col)
        return column_offset + py_col - shift + 1

    stripped = py.strip()
    if not stripped:
        raise ConfigError("empty expression", line, column_offset + 1, source)
    lead = len(py) - len(py.lstrip())
    try:
        tree = ast.parse(stripped, mode="eval").body
    except SyntaxError as exc:
        col = (exc.offset or 1) - 1 + lead
        raise ConfigError(f"syntax error: {exc.msg}", line, column(col), source) from None

    callees = {id(n.func) for n in ast.walk(tree) if isinstance(n, ast.Call)}
    for node in ast.walk(tree):
        if id(node) in callees:
            continue
        col = column(getattr(node, "col_offset", 0) + lead)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ConfigError(f"unsupported literal {node.value!r}", line, col, source)
        elif isinstance(node, ast.Name):
            if node.id != "x" and node.id not in CONSTANTS:
                raise ConfigError(f"unknown name {node.id!r}; only x, pi and e are defined", line, col, source)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ConfigError("unsupported unary operator", line, col, source)
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINARY:
                raise ConfigError("unsupported operator", line, col, source)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                name = getattr(node.func, "id", "?")
                raise ConfigError(f"unknown function {name!r}; expected one of {', '.join(FUNCTIONS)}",
                                  line, col, source)
            if len(node.args) != 1 or node.keywords:
                raise ConfigError(f"{node.func.id} takes exactly one argument", line, col, source)
        elif isinstance(node, (ast.operator, ast.unaryop, ast.Load)):
            continue
        else:
            raise ConfigError(f"unsupported syntax ({type(node).__name__})", line, col, source)
    return Expression(text.strip(), tree)


def _number(text: str, line: int, col: int, source: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    expr = parse_expression(text, line, col - 1, source)
    val = expr(np.zeros(()))
    if any(isinstance(n, ast.Name) and n.id == "x" for n in ast.walk(expr.tree)):
        raise ConfigError("a numeric value may not depend on x", line, col, source)
    v = float(val)
    if math.isnan(v):
        raise ConfigError(f"value {text.strip()!r} is not a number", line, col, source)
    return v


EXPRESSION_KEYS = ("drift", "diffusion", "exponent")
CUSTOM_KEYS = EXPRESSION_KEYS + ("left", "right", "x0", "rho", "c")
COMMON_BUILTIN_KEYS = ("model", "x0", "c", "state_space")


@dataclass(frozen=True)
class ModelConfig:
    """A parsed configuration: either a built-in model or custom expressions."""

    spec: DiffusionSpec
    model_id: str | None
    values: tuple[tuple[str, str], ...]


def parse_config(text: str, source: str = "<config>") -> ModelConfig:
    entries: dict[str, tuple[str, int, int]] = {}
    key_cols: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col, source)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key.replace("_", "").isalnum():
            raise ConfigError(f"invalid key {key!r}", lineno, key_col, source)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno, key_col, source)
        if not value_part.strip():
            raise ConfigError(f"missing value for {key!r}", lineno, len(body) + 1, source)
        val_col = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        entries[key] = (value_part.strip(), lineno, val_col)
        key_cols[key] = key_col
    if not entries:
        raise ConfigError("configuration is empty", None, None, source)

    def pos(k):
        return entries[k][1], entries[k][2]

    def key_pos(k):
        return entries[k][1], key_cols[k]

    values = tuple((k, v[0]) for k, v in entries.items())
    if "model" in entries:
        model_id = entries["model"][0]
        if model_id not in MODEL_IDS:
            raise ConfigError(f"unknown model {model_id!r}; expected one of {', '.join(MODEL_IDS)}", *pos("model"), source)
        names = model_parameters(model_id)
        allowed = set(names) | set(COMMON_BUILTIN_KEYS)
        for k in entries:
            if k not in allowed:
                hint = " (expressions cannot be combined with a built-in model)" if k in CUSTOM_KEYS else ""
                raise ConfigError(f"unknown key {k!r} for model {model_id}{hint}", *key_pos(k), source)
        missing = [n for n in names if n not in entries]
        if missing:
            raise ConfigError(f"model {model_id} is missing parameters: {', '.join(missing)}", None, None, source)
        params = {n: _number(entries[n][0], *pos(n), source) for n in names}
        x0 = _number(entries["x0"][0], *pos("x0"), source) if "x0" in entries else 1.0
        c = _number(entries["c"][0], *pos("c"), source) if "c" in entries else None
        space = entries["state_space"][0] if "state_space" in entries else None
        try:
            spec = builtin(model_id, params, x0=x0, reference_point=c, state_space=space)
        except ValueError as exc:
            raise ConfigError(str(exc), None, None, source) from None
        return ModelConfig(spec, model_id, values)

    for k in entries:
        if k not in CUSTOM_KEYS:
            raise ConfigError(f"unknown key {k!r}", *key_pos(k), source)
    # located errors in the expressions that are present come before missing keys
    funcs = {k: parse_expression(entries[k][0], entries[k][1], entries[k][2] - 1, source)
             for k in EXPRESSION_KEYS if k in entries}
    missing = [k for k in CUSTOM_KEYS if k not in entries and k not in ("rho", "c")]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}", None, None, source)
    left = _number(entries["left"][0], *pos("left"), source)
    right = _number(entries["right"][0], *pos("right"), source)
    x0 = _number(entries["x0"][0], *pos("x0"), source)
    rho = _number(entries["rho"][0], *pos("rho"), source) if "rho" in entries else 0.0
    c = _number(entries["c"][0], *pos("c"), source) if "c" in entries else None
    try:
        spec = DiffusionSpec(funcs["drift"], funcs["diffusion"], funcs["exponent"], (left, right), x0, rho, c)
    except ValueError as exc:
        raise ConfigError(str(exc), None, None, source) from None
    return ModelConfig(spec, None, values)


def load_config(path: str | Path) -> ModelConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", None, None, str(p)) from None
    return parse_config(text, str(p))

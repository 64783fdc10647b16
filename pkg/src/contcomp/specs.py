"""Text formats: safe numeric expressions and term-stream specifications.

Expressions are arithmetic over decimal literals plus a fixed set of mpmath
functions and constants, e.g. ``1+2*sqrt(3)*sin(20*deg)``. Term specs name a
generator with parameters (``const:a=2``, ``arith:start=1,step=1``,
``periodic:a=2,pre=+,signs=-+``) or list terms explicitly (``1,2,3``).
"""

from __future__ import annotations

import ast
import operator
from typing import Callable

import mpmath

from .engine import DEFAULT_PRECISION, TermRecord, TermStream, to_mp

_FUNCS: dict[str, Callable] = {
    "sqrt": mpmath.sqrt,
    "cbrt": mpmath.cbrt,
    "root": lambda x, n: mpmath.root(x, int(n)),
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "tan": mpmath.tan,
    "asin": mpmath.asin,
    "acos": mpmath.acos,
    "atan": mpmath.atan,
    "exp": mpmath.exp,
    "log": mpmath.log,
    "abs": abs,
}
_CONSTS: dict[str, Callable] = {
    "pi": lambda: +mpmath.pi,
    "e": lambda: +mpmath.e,
    "deg": lambda: mpmath.pi / 180,
    "phi": lambda: +mpmath.phi,
    "inf": lambda: mpmath.inf,
}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def evaluate(text: str, names: dict | None = None):
    """Evaluate an arithmetic expression at the current mpmath precision."""
    names = names or {}
    text = text.strip()  # source offsets below refer to the parsed text

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            # Re-read the literal text so decimals are not rounded through binary floats.
            return mpmath.mpf(ast.get_source_segment(text, node) or repr(node.value))
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else +v
        if isinstance(node, ast.Name):
            if node.id in names:
                return to_mp(names[node.id])
            if node.id in _CONSTS:
                return _CONSTS[node.id]()
            raise ValueError(f"unknown name {node.id!r} in expression {text!r}")
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            if node.keywords:
                raise ValueError("keyword arguments are not allowed in expressions")
            return _FUNCS[node.func.id](*[walk(a) for a in node.args])
        raise ValueError(f"unsupported syntax in expression {text!r}")

    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"malformed expression {text!r}") from exc
    return walk(tree)


def parse_params(text: str) -> dict[str, str]:
    """Split ``k=v,k=v`` into a dict of raw strings."""
    out: dict[str, str] = {}
    if not text.strip():
        return out
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_signs(text: str) -> list[int]:
    signs = []
    for ch in text:
        if ch == "+":
            signs.append(1)
        elif ch == "-":
            signs.append(-1)
        elif not ch.isspace():
            raise ValueError(f"sign strings use only '+' and '-', got {text!r}")
    return signs


def mcguffin_wong_stream(x, n, a) -> TermStream:
    """Terms of x+n+a = √(ax+(n+a)² + x√(a(x+n)+(n+a)² + (x+n)√(…)))."""
    x, n, a = to_mp(x), to_mp(n), to_mp(a)
    return TermStream.from_functions(
        lambda i: a * (x + i * n) + (n + a) ** 2,
        lambda i: x + i * n,
        description=f"nest for x+n+a with x={x}, n={n}, a={a}",
    )


def signed_stream(addend, pre: list[int], period: list[int], multiplier=1) -> TermStream:
    """Constant addend with signs given by a preperiod then a repeating block."""
    if not period:
        raise ValueError("sign period must be nonempty")

    def sign(i: int) -> int:
        if i < len(pre):
            return pre[i]
        return period[(i - len(pre)) % len(period)]

    return TermStream.from_functions(
        lambda i: addend,
        lambda i: multiplier,
        sign,
        period=None if pre else len(period),
        description=f"addend {addend}, signs {pre}|{period}",
    )


_PARAMETERLESS = ("ramanujan1", "ramanujan2")


def _num(params: dict, key: str, default=None):
    if key not in params:
        if default is None:
            raise ValueError(f"missing parameter {key!r}")
        return to_mp(default)
    return evaluate(params[key])


def parse_terms(text: str, precision: int = DEFAULT_PRECISION) -> TermStream:
    """Build a TermStream from a generator spec or an explicit comma list.

    Numeric parameters are evaluated once at the given precision.
    """
    with mpmath.workprec(precision):
        return _parse_terms(text)


def _parse_terms(text: str) -> TermStream:
    text = text.strip()
    if not text:
        raise ValueError("empty term spec")
    name, sep, rest = text.partition(":")
    name = name.strip().lower()
    if not sep and name not in _PARAMETERLESS:
        return TermStream.from_list([evaluate(t) for t in text.split(",")])
    p = parse_params(rest)
    if name == "const":
        return TermStream.constant(_num(p, "a"), _num(p, "b", 1), int(_num(p, "s", 1)))
    if name == "arith":
        return TermStream.arithmetic(_num(p, "start"), _num(p, "step", 1), _num(p, "b", 1))
    if name == "geom":
        start, ratio, b = _num(p, "start"), _num(p, "ratio"), _num(p, "b", 1)
        return TermStream.from_functions(lambda i: start * ratio**i, lambda i: b,
                                         description=f"geometric start={start} ratio={ratio}")
    if name == "dexp":
        # c * base^(q^n): doubly exponential growth
        c, base, q = _num(p, "c", 1), _num(p, "base"), _num(p, "q")
        if q == int(q):
            q = int(q)  # exact integer exponents keep base**(q**i) exact for integer bases
        return TermStream.from_functions(lambda i: c * base ** (q**i),
                                         description=f"{c}*{base}^({q}^n)")
    if name == "ramanujan1":
        return mcguffin_wong_stream(2, 1, 0)
    if name == "ramanujan2":
        return mcguffin_wong_stream(2, 1, 1)
    if name in ("mcguffin", "mcguffin-wong"):
        return mcguffin_wong_stream(_num(p, "x"), _num(p, "n"), _num(p, "a"))
    if name in ("periodic", "signs"):
        pre = parse_signs(p.get("pre", ""))
        period = parse_signs(p.get("signs", "+"))
        return signed_stream(_num(p, "a", 2), pre, period, _num(p, "b", 1))
    if name == "list":
        raise ValueError("explicit lists are written without a name, e.g. 1,2,3")
    raise ValueError(f"unknown term generator {name!r}")


def describe_record(rec: TermRecord) -> str:
    return f"a={mpmath.nstr(to_mp(rec.addend), 10)} b={mpmath.nstr(to_mp(rec.multiplier), 10)} s={rec.sign:+d}"

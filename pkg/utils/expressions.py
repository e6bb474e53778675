"""
Polynomial expressions in x and y for sources, fluxes and coefficients.
Expressions are parsed by sympy against a fixed symbol table and evaluated through lambdify.
"""
import re
from tokenize import TokenError
from typing import Union
import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.polyerrors import BasePolynomialError
from utils.errors import ValidationError

MAX_DEGREE = 4

X, Y = sympy.symbols("x y", real=True)

NAMES = {
    "x": X,
    "y": Y,
    "pi": sympy.pi,
    "e": sympy.E,
}

# only what the number and symbol transformations emit
_GLOBALS = {
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}

_TRANSFORMATIONS = standard_transformations + (convert_xor,)

_ALLOWED = re.compile(r"[0-9A-Za-z.+\-*/^()\s]*")
_IDENTIFIER = re.compile(r"(?<![0-9])[A-Za-z]\w*")


class Polynomial:
    """Real polynomial in (x, y) held as a sympy expression."""

    def __init__(self, expr, source: str = ""):
        self.expr = sympy.expand(sympy.sympify(expr))
        self.source = source or str(self.expr)
        self._func = sympy.lambdify((X, Y), self.expr, "numpy")

    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls(sympy.Float(float(value)), repr(float(value)))

    @classmethod
    def parse(cls, expression: Union[str, float, int], field: str = "expression") -> "Polynomial":
        """
        Parse a polynomial expression.

        Args:
            expression: Number or string such as "1 + 2*x - y^2"
            field: Config key reported on failure

        Returns:
            Polynomial

        Raises:
            ValidationError: If the expression is not a polynomial of degree <= 4
        """
        if isinstance(expression, bool):
            raise ValidationError("Expression must be a number or a string", field)
        if isinstance(expression, (int, float)):
            return cls.constant(float(expression))

        if not _ALLOWED.fullmatch(str(expression)):
            raise ValidationError(f"Unsupported characters in expression {expression!r}", field)
        unknown = sorted(set(_IDENTIFIER.findall(str(expression))) - set(NAMES))
        if unknown:
            raise ValidationError(f"Unknown name {', '.join(unknown)} in expression", field)
        try:
            expr = parse_expr(str(expression), local_dict=dict(NAMES), global_dict=dict(_GLOBALS),
                              transformations=_TRANSFORMATIONS, evaluate=True)
        except (SyntaxError, TokenError, TypeError, NameError, ValueError, sympy.SympifyError):
            raise ValidationError(f"Cannot parse expression {expression!r}", field)

        if not isinstance(expr, sympy.Expr):
            raise ValidationError(f"Expression {expression!r} is not a number", field)
        unknown = expr.free_symbols - {X, Y}
        if unknown:
            names = ", ".join(sorted(str(s) for s in unknown))
            raise ValidationError(f"Unknown name {names} in expression", field)
        if expr.has(sympy.zoo, sympy.oo, -sympy.oo, sympy.nan):
            raise ValidationError(f"Expression {expression!r} is not finite", field)
        try:
            degree = sympy.Poly(expr, X, Y).total_degree()
        except BasePolynomialError:
            raise ValidationError(f"Expression {expression!r} is not a polynomial in x, y", field)
        if degree > MAX_DEGREE:
            raise ValidationError(
                f"Expression {expression!r} has degree {degree} > {MAX_DEGREE}", field
            )
        return cls(expr, str(expression))

    @property
    def degree(self) -> int:
        if self.is_zero:
            return 0
        return int(sympy.Poly(self.expr, X, Y).total_degree())

    @property
    def is_zero(self) -> bool:
        return self.expr.is_zero is True

    def partial(self, variable: str) -> "Polynomial":
        """Derivative with respect to "x" or "y"."""
        if variable not in ("x", "y"):
            raise ValidationError(f"Unknown variable {variable!r}", "variable")
        return Polynomial(sympy.diff(self.expr, NAMES[variable]), f"d({self.source})/d{variable}")

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        # lambdify returns a scalar for constant expressions
        return np.zeros(np.broadcast(x, y).shape) + np.asarray(self._func(x, y), dtype=float)

    def at(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (n, 2) array of points."""
        points = np.asarray(points, dtype=float)
        return self(points[..., 0], points[..., 1])

    def __repr__(self) -> str:
        return f"Polynomial({self.source!r})"

"""Complex-step differentiation through an auxiliary imaginary unit.

All special functions in this package are holomorphic, so their
derivatives can be taken with the complex-step trick.  The ordinary
imaginary unit is already used by the functions themselves, so the step
is taken along a second unit ``j`` with ``j**2 == -1`` that commutes
with ``1j``.  A value ``a + b*j`` is stored as the pair ``(a, b)``.

The parts may themselves be :class:`Bicomplex`, which gives exact mixed
partial derivatives by nesting.
"""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

#: default step along the auxiliary direction
STEP = 1e-30


class Bicomplex:
    """Number ``a + b*j`` with complex (or array, or nested) parts."""

    __slots__ = ("a", "b")
    # keep numpy from broadcasting over us; our dunder methods win
    __array_ufunc__ = None

    def __init__(self, a: Any, b: Any = 0.0):
        self.a = a
        self.b = b

    # arithmetic -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Bicomplex):
            return Bicomplex(self.a + other.a, self.b + other.b)
        return Bicomplex(self.a + other, self.b)

    __radd__ = __add__

    def __neg__(self):
        return Bicomplex(-self.a, -self.b)

    def __sub__(self, other):
        if isinstance(other, Bicomplex):
            return Bicomplex(self.a - other.a, self.b - other.b)
        return Bicomplex(self.a - other, self.b)

    def __rsub__(self, other):
        return Bicomplex(other - self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Bicomplex):
            return Bicomplex(self.a * other.a - self.b * other.b,
                             self.a * other.b + self.b * other.a)
        return Bicomplex(self.a * other, self.b * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Bicomplex):
            den = other.a * other.a + other.b * other.b
            num = self * other.conj_aux()
            return Bicomplex(num.a / den, num.b / den)
        return Bicomplex(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        return Bicomplex(other, 0.0 * self.b) / self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = Bicomplex(1.0 + 0.0 * self.a, 0.0 * self.b)
        for _ in range(int(n)):
            out = out * self
        return out

    def conj_aux(self) -> "Bicomplex":
        """Conjugate in the auxiliary unit only."""
        return Bicomplex(self.a, -self.b)

    # helpers --------------------------------------------------------
    def sum(self) -> "Bicomplex":
        return Bicomplex(asum(self.a), asum(self.b))

    def __repr__(self) -> str:
        return f"Bicomplex({self.a!r}, {self.b!r})"


def asum(x):
    """Sum over all entries, recursing through nested parts."""
    if isinstance(x, Bicomplex):
        return x.sum()
    return np.sum(x)


def aexp(x):
    """``exp`` that understands :class:`Bicomplex`.

    ``exp(a + b j) = exp(a) (cos b + j sin b)``.  The trigonometric parts
    are evaluated directly (never as differences of exponentials) so a
    tiny ``b`` keeps full relative precision.
    """
    if not isinstance(x, Bicomplex):
        return np.exp(x)
    ea = aexp(x.a)
    return Bicomplex(ea * acos(x.b), ea * asin(x.b))


def asin(x):
    """``sin`` over nested :class:`Bicomplex` (``sin(b j) = j sinh b``)."""
    if not isinstance(x, Bicomplex):
        return np.sin(x)
    return Bicomplex(asin(x.a) * acosh(x.b), acos(x.a) * asinh(x.b))


def acos(x):
    """``cos`` over nested :class:`Bicomplex` (``cos(b j) = cosh b``)."""
    if not isinstance(x, Bicomplex):
        return np.cos(x)
    return Bicomplex(acos(x.a) * acosh(x.b), -(asin(x.a) * asinh(x.b)))


def asinh(x):
    """``sinh`` over nested :class:`Bicomplex`."""
    if not isinstance(x, Bicomplex):
        return np.sinh(x)
    return Bicomplex(asinh(x.a) * acos(x.b), acosh(x.a) * asin(x.b))


def acosh(x):
    """``cosh`` over nested :class:`Bicomplex`."""
    if not isinstance(x, Bicomplex):
        return np.cosh(x)
    return Bicomplex(acosh(x.a) * acos(x.b), asinh(x.a) * asin(x.b))


def base(x) -> complex:
    """Strip every auxiliary part and return the plain value."""
    while isinstance(x, Bicomplex):
        x = x.a
    return x


def is_aux(x) -> bool:
    return isinstance(x, Bicomplex)


def aux_part(x):
    """The ``j`` coefficient of ``x`` (zero for plain numbers)."""
    if isinstance(x, Bicomplex):
        return x.b
    return 0.0 * x


def real_part(x):
    """The non-``j`` part of ``x``."""
    if isinstance(x, Bicomplex):
        return x.a
    return x


def complex_step(f: Callable[[Any], Any], x, h: float = STEP):
    """Derivative of a holomorphic ``f`` at ``x`` by an auxiliary step.

    Args:
        f: function built from ``+ - * /`` and :func:`aexp`.
        x: evaluation point (complex, or already :class:`Bicomplex`).
        h: step along the auxiliary unit.

    Returns:
        ``f'(x)`` with no subtractive cancellation.
    """
    val = f(Bicomplex(x, h))
    if not isinstance(val, Bicomplex):
        # f did not depend on x
        return 0.0 * np.asarray(val)
    return val.b / h

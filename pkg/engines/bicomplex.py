"""
Bicomplex numbers q = sc + vec*k with complex sc, vec.

The complex unit i commutes with k and k*k = -1, so the ring is
commutative but has zero divisors (vec = +-i*sc). Components may be Python
complex scalars or complex numpy arrays of a common shape; every operation
acts elementwise, which lets field closures evaluate whole grids or
quadrature node sets in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Sequence, Union

import numpy as np

from config.settings import numerics
from engines.errors import ZeroDivisorOrZero

Scalar = Union[complex, float, int, np.ndarray]


def _as_component(value: Any):
    if np.ndim(value) == 0:
        return complex(value)
    return np.asarray(value, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class Bicomplex:
    sc: Any = 0j
    vec: Any = 0j

    # keeps ndarray * Bicomplex from building object arrays
    __array_ufunc__ = None

    def __post_init__(self):
        sc, vec = _as_component(self.sc), _as_component(self.vec)
        if np.ndim(sc) or np.ndim(vec):
            # a scalar component next to an array takes the array's shape
            shape = np.broadcast_shapes(np.shape(sc), np.shape(vec))
            sc = np.broadcast_to(sc, shape).astype(np.complex128, copy=True)
            vec = np.broadcast_to(vec, shape).astype(np.complex128, copy=True)
        object.__setattr__(self, "sc", sc)
        object.__setattr__(self, "vec", vec)

    # --- constructors ---
    @classmethod
    def coerce(cls, value: Any) -> "Bicomplex":
        if isinstance(value, Bicomplex):
            return value
        return cls(value, 0j)

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Bicomplex":
        """Inverse of `to_list`: [re_sc, im_sc, re_vec, im_vec]."""
        if len(values) != 4:
            raise ValueError(f"bicomplex needs 4 reals, got {len(values)}")
        re_sc, im_sc, re_vec, im_vec = (float(v) for v in values)
        return cls(complex(re_sc, im_sc), complex(re_vec, im_vec))

    @classmethod
    def variable(cls, x: Any, y: Any) -> "Bicomplex":
        """z = x + y*k."""
        return cls(x, y)

    def to_list(self) -> List[float]:
        if np.ndim(self.sc) or np.ndim(self.vec):
            raise ValueError("only scalar bicomplex values serialise to a 4-list")
        return [self.sc.real, self.sc.imag, self.vec.real, self.vec.imag]

    # --- structure ---
    @property
    def shape(self):
        return np.broadcast_shapes(np.shape(self.sc), np.shape(self.vec))

    def __getitem__(self, idx) -> "Bicomplex":
        sc, vec = np.broadcast_arrays(np.asarray(self.sc), np.asarray(self.vec))
        return Bicomplex(sc[idx], vec[idx])

    def broadcast_to(self, shape) -> "Bicomplex":
        return Bicomplex(np.broadcast_to(self.sc, shape), np.broadcast_to(self.vec, shape))

    def apply(self, fn) -> "Bicomplex":
        """Apply a linear componentwise map (stencils, sums, slicing)."""
        return Bicomplex(fn(self.sc), fn(self.vec))

    def conj(self) -> "Bicomplex":
        return Bicomplex(self.sc, -self.vec)

    def modulus_sq(self):
        """q*conj(q) = sc^2 + vec^2, a pure (complex) scalar."""
        return self.sc * self.sc + self.vec * self.vec

    def norm(self):
        return np.sqrt(np.abs(self.sc) ** 2 + np.abs(self.vec) ** 2)

    def isclose(self, other: Any, rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        other = Bicomplex.coerce(other)
        diff = (self - other).norm()
        scale = np.maximum(self.norm(), other.norm())
        return bool(np.all(diff <= atol + rtol * scale))

    # --- arithmetic ---
    def __add__(self, other):
        other = Bicomplex.coerce(other)
        return Bicomplex(self.sc + other.sc, self.vec + other.vec)

    __radd__ = __add__

    def __sub__(self, other):
        other = Bicomplex.coerce(other)
        return Bicomplex(self.sc - other.sc, self.vec - other.vec)

    def __rsub__(self, other):
        return Bicomplex.coerce(other) - self

    def __neg__(self):
        return Bicomplex(-self.sc, -self.vec)

    def __mul__(self, other):
        if not isinstance(other, Bicomplex):
            other = _as_component(other)
            return Bicomplex(self.sc * other, self.vec * other)
        return Bicomplex(
            self.sc * other.sc - self.vec * other.vec,
            self.sc * other.vec + self.vec * other.sc,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Bicomplex):
            other = _as_component(other)
            return Bicomplex(self.sc / other, self.vec / other)
        return self * inverse(other)

    def __rtruediv__(self, other):
        return Bicomplex.coerce(other) * inverse(self)

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers are defined")
        result = Bicomplex(np.ones_like(self.sc), np.zeros_like(self.vec))
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __repr__(self):
        return f"Bicomplex({self.sc!r}, {self.vec!r})"


ONE = Bicomplex(1.0, 0.0)
K = Bicomplex(0.0, 1.0)


class Sign(str, Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class Projector:
    """P+ = (1 + i*k)/2 and P- = (1 - i*k)/2."""
    sign: Sign

    def as_bicomplex(self) -> Bicomplex:
        s = 1.0 if Sign(self.sign) is Sign.PLUS else -1.0
        return Bicomplex(0.5, 0.5j * s)

    def __call__(self, q: Bicomplex) -> Bicomplex:
        return self.as_bicomplex() * q


def mul(a: Bicomplex, b: Bicomplex) -> Bicomplex:
    return Bicomplex.coerce(a) * Bicomplex.coerce(b)


def conj(q: Bicomplex) -> Bicomplex:
    return Bicomplex.coerce(q).conj()


def _tol(tol):
    if tol is None:
        return numerics.tolerances.get('zero_divisor', 1e-10)
    return tol


def _singular_mask(q: Bicomplex, tol: float):
    return np.abs(q.modulus_sq()) <= tol * q.norm() ** 2


def inverse(q: Bicomplex, tol: float = None) -> Bicomplex:
    q = Bicomplex.coerce(q)
    tol = _tol(tol)
    if np.any(_singular_mask(q, tol)):
        raise ZeroDivisorOrZero(f"{q!r} is zero or a bicomplex zero divisor")
    mod = q.modulus_sq()
    return Bicomplex(q.sc / mod, -q.vec / mod)


def exp(q: Bicomplex) -> Bicomplex:
    """exp(sc + vec*k) = e^sc (cos vec + k sin vec), complex cos/sin."""
    q = Bicomplex.coerce(q)
    scale = np.exp(q.sc)
    return Bicomplex(scale * np.cos(q.vec), scale * np.sin(q.vec))


def is_zero_divisor(q: Bicomplex, tol: float = None):
    q = Bicomplex.coerce(q)
    tol = _tol(tol)
    result = (q.norm() > tol) & _singular_mask(q, tol)
    if np.ndim(result) == 0:
        return bool(result)
    return result


def project(q: Bicomplex, sign: Union[Sign, str]) -> Bicomplex:
    return Projector(Sign(sign))(Bicomplex.coerce(q))

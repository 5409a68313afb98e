"""
Complex quaternions H(C), the Moisil-Theodorescu operator D, the fixed
energy operators R_omega and Dirac_omega, and the transform A relating
spinors to biquaternion fields.

Biquaternion values are stored as arrays of shape (..., 4) over the basis
e0..e3 with e1 e2 = e3 (cyclic) and ek^2 = -1; the complex unit i commutes
with every ek. Spinor values are plain complex arrays of shape (..., 4).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import ujson

from engines.bicomplex import Bicomplex, K
from engines.calculus import gradient_2d, gradient_3d

SpinorValue = np.ndarray
PointField = Callable[[np.ndarray], np.ndarray]


def _stack(*components) -> np.ndarray:
    comps = np.broadcast_arrays(*[np.asarray(c, dtype=np.complex128) for c in components])
    return np.stack(comps, axis=-1)


@dataclass(frozen=True, eq=False)
class Biquaternion:
    c0: complex = 0j
    c1: complex = 0j
    c2: complex = 0j
    c3: complex = 0j

    __array_ufunc__ = None

    @classmethod
    def from_array(cls, arr) -> "Biquaternion":
        arr = np.asarray(arr, dtype=np.complex128)
        parts = [arr[..., j] for j in range(4)]
        if arr.ndim == 1:
            parts = [complex(p) for p in parts]
        return cls(*parts)

    def as_array(self) -> np.ndarray:
        return _stack(self.c0, self.c1, self.c2, self.c3)

    @property
    def sc(self):
        return self.c0

    @property
    def vec(self) -> "Biquaternion":
        return Biquaternion(0j, self.c1, self.c2, self.c3)

    def conj(self) -> "Biquaternion":
        return Biquaternion(self.c0, -self.c1, -self.c2, -self.c3)

    def norm(self):
        return np.linalg.norm(self.as_array(), axis=-1)

    def isclose(self, other: "Biquaternion", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        a, b = self.as_array(), other.as_array()
        return bool(np.all(np.linalg.norm(a - b, axis=-1)
                           <= atol + rtol * np.maximum(np.linalg.norm(a, axis=-1),
                                                       np.linalg.norm(b, axis=-1))))

    def __add__(self, other):
        return Biquaternion.from_array(self.as_array() + other.as_array())

    def __sub__(self, other):
        return Biquaternion.from_array(self.as_array() - other.as_array())

    def __neg__(self):
        return Biquaternion.from_array(-self.as_array())

    def __mul__(self, other):
        if isinstance(other, Biquaternion):
            return qmul(self, other)
        return Biquaternion.from_array(self.as_array() * other)

    def __rmul__(self, other):
        return Biquaternion.from_array(other * self.as_array())

    def __repr__(self):
        return f"Biquaternion({self.c0!r}, {self.c1!r}, {self.c2!r}, {self.c3!r})"


E0 = Biquaternion(1, 0, 0, 0)
E1 = Biquaternion(0, 1, 0, 0)
E2 = Biquaternion(0, 0, 1, 0)
E3 = Biquaternion(0, 0, 0, 1)
BASIS = (E0, E1, E2, E3)


def qmul_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3 = (a[..., j] for j in range(4))
    b0, b1, b2, b3 = (b[..., j] for j in range(4))
    return _stack(
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def qmul(a: Biquaternion, b: Biquaternion) -> Biquaternion:
    return Biquaternion.from_array(qmul_arrays(a.as_array(), b.as_array()))


def right_mul(q: Biquaternion, p: Biquaternion) -> Biquaternion:
    """M^p q = q p."""
    return qmul(q, p)


def split(q: Biquaternion) -> Tuple[Bicomplex, Bicomplex]:
    """q = Q1 + Q2 e2 with Q1 = q0 + q3 k, Q2 = q2 - q1 k (k = e3)."""
    return Bicomplex(q.c0, q.c3), Bicomplex(q.c2, -q.c1)


def assemble(Q1: Bicomplex, Q2: Bicomplex) -> Biquaternion:
    Q1, Q2 = Bicomplex.coerce(Q1), Bicomplex.coerce(Q2)
    return Biquaternion(Q1.sc, -Q2.vec, Q2.sc, Q1.vec)


# Rows act on (Phi0..Phi3) / (F0..F3) of the x3-reflected field.
A_MATRIX = 0.5 * np.array([
    [0, -1, 1, 0],
    [1j, 0, 0, -1j],
    [-1, 0, 0, -1],
    [0, 1j, 1j, 0],
], dtype=np.complex128)

A_INV_MATRIX = np.array([
    [0, -1j, -1, 0],
    [-1, 0, 0, -1j],
    [1, 0, 0, -1j],
    [0, 1j, -1, 0],
], dtype=np.complex128)


def transform_A(phi: SpinorValue) -> Biquaternion:
    """Pointwise part of A; reflecting x3 is up to the caller."""
    phi = np.asarray(phi, dtype=np.complex128)
    return Biquaternion.from_array(phi @ A_MATRIX.T)


def transform_Ainv(F: Biquaternion) -> SpinorValue:
    return F.as_array() @ A_INV_MATRIX.T


# --- gamma matrices ---

@dataclass(frozen=True, eq=False)
class GammaMatrices:
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    label: str = "bjorken-drell"

    @classmethod
    def bjorken_drell(cls) -> "GammaMatrices":
        sigma = [
            np.array([[0, 1], [1, 0]], dtype=np.complex128),
            np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
            np.array([[1, 0], [0, -1]], dtype=np.complex128),
        ]
        zero = np.zeros((2, 2), dtype=np.complex128)
        eye = np.eye(2, dtype=np.complex128)
        g0 = np.block([[eye, zero], [zero, -eye]])
        spatial = [np.block([[zero, s], [-s, zero]]) for s in sigma]
        return cls(g0, *spatial)

    def flipped(self) -> "GammaMatrices":
        """Spatial matrices negated (negative control for the intertwining check)."""
        return GammaMatrices(self.g0, -self.g1, -self.g2, -self.g3, label=f"{self.label}-flipped")

    @property
    def spatial(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.g1, self.g2, self.g3

    def product123(self) -> np.ndarray:
        return self.g1 @ self.g2 @ self.g3

    def to_dict(self) -> dict:
        def enc(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in m]
        return {
            "label": self.label,
            "gamma": [enc(m) for m in (self.g0, self.g1, self.g2, self.g3)],
        }

    def to_json(self) -> str:
        return ujson.dumps(self.to_dict())


def gamma_matrices_json(flip: bool = False) -> str:
    gammas = GammaMatrices.bjorken_drell()
    return (gammas.flipped() if flip else gammas).to_json()


# --- fields and potentials ---

@dataclass
class FieldSampler:
    """Vectorised 3-D field: points (..., 3) -> values (..., 4).

    `derivative`, when given, returns exact partials of shape (..., 3, 4)
    and bypasses differencing.
    """
    func: PointField
    step: Optional[float] = None
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=np.complex128)

    def partials(self, points, check: bool = True, tol: float = None) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(points), dtype=np.complex128)
        return gradient_3d(self.__call__, points, h=self.step, check=check, tol=tol)

    def reflected(self) -> "FieldSampler":
        """x -> f(x1, x2, -x3)."""
        return FieldSampler(lambda p: self.func(reflect(p)), step=self.step)

    def mapped(self, matrix: np.ndarray) -> "FieldSampler":
        """Pointwise linear map of the values, e.g. A or A^-1."""
        return FieldSampler(lambda p: np.asarray(self.func(p), dtype=np.complex128) @ matrix.T,
                            step=self.step)


def reflect(points: np.ndarray) -> np.ndarray:
    points = np.array(points, dtype=float, copy=True)
    points[..., 2] = -points[..., 2]
    return points


def _zero(points: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(points)[:-1])


@dataclass
class PotentialData:
    m: float = 0.0
    omega: complex = 0.0
    p_el: Callable = field(default=_zero)
    p_sc: Callable = field(default=_zero)
    A1: Callable = field(default=_zero)
    A2: Callable = field(default=_zero)
    A3: Callable = field(default=_zero)

    def a_field(self, points: np.ndarray) -> np.ndarray:
        """a = i(A1 e1 + A2 e2 - A3 e3) at the x3-reflected points."""
        r = reflect(points)
        A1, A2, A3 = (np.asarray(f(r), dtype=np.complex128) for f in (self.A1, self.A2, self.A3))
        return _stack(np.zeros_like(A1), 1j * A1, 1j * A2, -1j * A3)

    def b_field(self, points: np.ndarray) -> np.ndarray:
        """b = -i((p_el + omega) e1 - i(p_sc + m) e2) at the x3-reflected points."""
        r = reflect(points)
        pel = np.asarray(self.p_el(r), dtype=np.complex128)
        psc = np.asarray(self.p_sc(r), dtype=np.complex128)
        return _stack(np.zeros_like(pel), -1j * (pel + self.omega), -(psc + self.m), np.zeros_like(pel))


def apply_D(f: FieldSampler, x) -> Biquaternion:
    """D f = sum_k e_k d_k f."""
    grads = f.partials(x)                       # (..., 3, 4)
    total = np.zeros(grads.shape[:-2] + (4,), dtype=np.complex128)
    for k in range(3):
        total = total + qmul_arrays(BASIS[k + 1].as_array(), grads[..., k, :])
    return Biquaternion.from_array(total)


def apply_R_omega(f: FieldSampler, x, pot: PotentialData) -> Biquaternion:
    """R_omega f = D f + a f + f b."""
    x = np.asarray(x, dtype=float)
    value = f(x)
    result = apply_D(f, x).as_array()
    result = result + qmul_arrays(pot.a_field(x), value) + qmul_arrays(value, pot.b_field(x))
    return Biquaternion.from_array(result)


def apply_Dirac_omega(phi: FieldSampler, x, pot: PotentialData,
                      gammas: GammaMatrices = None) -> SpinorValue:
    """i omega g0 + sum gk dk + i(m + p_el g0 + sum A_k g_k + p_sc)."""
    gammas = gammas or GammaMatrices.bjorken_drell()
    x = np.asarray(x, dtype=float)
    value = phi(x)
    grads = phi.partials(x)
    pel = np.asarray(pot.p_el(x), dtype=np.complex128)[..., None]
    psc = np.asarray(pot.p_sc(x), dtype=np.complex128)[..., None]
    A = [np.asarray(f(x), dtype=np.complex128)[..., None] for f in (pot.A1, pot.A2, pot.A3)]

    g0v = value @ gammas.g0.T
    result = 1j * (pot.omega + pel) * g0v + 1j * (pot.m + psc) * value
    for k, g in enumerate(gammas.spatial):
        result = result + grads[..., k, :] @ g.T + 1j * A[k] * (value @ g.T)
    return result


def intertwining_residual(phi: FieldSampler, x, pot: PotentialData,
                          gammas: GammaMatrices = None) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of A g1 g2 g3 Dirac_omega Phi = R_omega A Phi at x.

    With F(x) = A_MATRIX Phi(x~) the left side is A_MATRIX g1g2g3
    (Dirac_omega Phi)(x~), x~ = (x1, x2, -x3).
    """
    gammas = gammas or GammaMatrices.bjorken_drell()
    x = np.asarray(x, dtype=float)
    F = phi.reflected().mapped(A_MATRIX)
    rhs = apply_R_omega(F, x, pot).as_array()
    dirac = apply_Dirac_omega(phi, reflect(x), pot, gammas)
    lhs = dirac @ (A_MATRIX @ gammas.product123()).T
    return lhs, rhs


def vekua_system_residuals(Q1: Callable, Q2: Callable, z, pot: PotentialData) -> Tuple[Bicomplex, Bicomplex]:
    """Residuals of the coupled system for x3-independent Q1, Q2.

    z = (x, y) with x = x2, y = x1; D2 = d_x - k d_y acts on the
    conjugated components. The D1 = e3 d3 terms vanish.
    """
    x, y = (np.asarray(c, dtype=float) for c in z)
    points = np.stack(np.broadcast_arrays(y, x, np.zeros_like(x)), axis=-1)
    q1, q2 = Q1(x, y), Q2(x, y)

    def D2_conj(Q):
        gx, gy = gradient_2d(lambda xs, ys: Q(xs, ys).conj(), x, y)
        return gx - K * gy

    A1 = np.asarray(pot.A1(points), dtype=np.complex128)
    A2 = np.asarray(pot.A2(points), dtype=np.complex128)
    A3 = np.asarray(pot.A3(points), dtype=np.complex128)
    pel = np.asarray(pot.p_el(points), dtype=np.complex128)
    psc = np.asarray(pot.p_sc(points), dtype=np.complex128)

    A_1 = Bicomplex(np.zeros_like(A3), -1j * A3)
    A_2 = Bicomplex(1j * A2, -1j * A1)
    B = Bicomplex(-(psc + pot.m), 1j * (pel + pot.omega))

    r1 = -D2_conj(Q2) + A_1 * q1 - A_2 * q2.conj() - B.conj() * q2
    r2 = D2_conj(Q1) + A_2 * q1.conj() + A_1 * q2 + B * q1
    return r1, r2

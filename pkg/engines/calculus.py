"""
Finite differences and quadrature shared by the engines.

Field closures are vectorised: a 2-D field takes arrays (x, y) and returns
a Bicomplex (or complex array) of the broadcast shape, a 3-D field takes
points of shape (..., 3) and returns values of shape (..., 4). Every
stencil is evaluated in a single call.
"""
from __future__ import annotations

from typing import Any, Callable, Tuple

import numpy as np

from config.settings import numerics
from engines.bicomplex import Bicomplex
from engines.errors import StepTooLarge
from system.metrics import metrics
from utils.logger import log

# 4th-order central first derivative
D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0

# 4th-order central second derivative
D2_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
D2_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


def _combine(values: Any, weights: np.ndarray, scale) -> Any:
    """Weighted sum over the trailing stencil axis."""
    op = lambda c: np.tensordot(c, weights, axes=([-1], [0])) / scale
    if isinstance(values, Bicomplex):
        return values.apply(op)
    return op(np.asarray(values))


def _magnitude(value: Any):
    if isinstance(value, Bicomplex):
        return value.norm()
    return np.abs(value)


def _record_richardson(worst: float, tol: float):
    metrics.increment_counter("richardson_checks")
    metrics.max_gauge("richardson_max_estimate", worst)
    if worst > tol:
        metrics.increment_counter("richardson_rejected")


def _richardson(coarse: Any, fine: Any, tol: float, what: str):
    err = _magnitude(coarse - fine)
    scale = 1.0 + _magnitude(fine)
    worst = float(np.max(err / scale)) if np.size(err) else 0.0
    _record_richardson(worst, tol)
    if worst > tol:
        raise StepTooLarge(f"{what}: Richardson estimate {worst:.3e} exceeds {tol:.1e}")
    return worst


def _on_stencil(value: Any, shape) -> Any:
    """Constant closures return scalars; spread them over the stencil."""
    if isinstance(value, Bicomplex):
        return value.broadcast_to(shape)
    return np.broadcast_to(np.asarray(value), shape)


def _slice_last(value: Any, sl) -> Any:
    if isinstance(value, Bicomplex):
        return value.apply(lambda c: c[..., sl])
    return value[..., sl]


def gradient_2d(f: Callable, x, y, h: float = None, check: bool = True,
                tol: float = None) -> Tuple[Any, Any]:
    """(f_x, f_y) at (x, y) with 4th-order central differences.

    With `check`, the stencil is repeated with h/2 and the fine value is
    returned after a Richardson comparison.
    """
    h = numerics.differencing.get('step_2d', 1e-3) if h is None else h
    tol = numerics.differencing.get('rtol', 1e-6) if tol is None else tol
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]

    steps = [h, h / 2.0] if check else [h]
    offs = np.concatenate([D1_OFFSETS * s for s in steps])
    zeros = np.zeros_like(offs)
    # x-shifts then y-shifts in one evaluation
    xs = x + np.concatenate([offs, zeros])
    ys = y + np.concatenate([zeros, offs])
    xs, ys = np.broadcast_arrays(xs, ys)
    values = _on_stencil(f(xs, ys), xs.shape)

    n = len(D1_OFFSETS)
    out = []
    for axis in range(2):
        base = axis * n * len(steps)
        parts = [
            _combine(_slice_last(values, slice(base + i * n, base + (i + 1) * n)), D1_WEIGHTS, s)
            for i, s in enumerate(steps)
        ]
        if check:
            _richardson(parts[0], parts[1], tol, f"d/d{'xy'[axis]}")
        out.append(parts[-1])
    return out[0], out[1]


def laplacian_2d(u: Callable, x, y, h: float = None, check: bool = True,
                 tol: float = None) -> Any:
    """4th-order cross-stencil Laplacian of a complex (or bicomplex) field."""
    h = numerics.differencing.get('step_2d', 1e-3) if h is None else h
    tol = numerics.differencing.get('rtol', 1e-6) if tol is None else tol
    x = np.asarray(x, dtype=float)[..., None]
    y = np.asarray(y, dtype=float)[..., None]

    steps = [h, h / 2.0] if check else [h]
    n = len(D2_OFFSETS)
    offs = np.concatenate([D2_OFFSETS * s for s in steps])
    zeros = np.zeros_like(offs)
    xs = x + np.concatenate([offs, zeros])
    ys = y + np.concatenate([zeros, offs])
    xs, ys = np.broadcast_arrays(xs, ys)
    values = _on_stencil(u(xs, ys), xs.shape)

    results = []
    for i, s in enumerate(steps):
        dxx = _combine(_slice_last(values, slice(i * n, (i + 1) * n)), D2_WEIGHTS, s * s)
        start = len(steps) * n + i * n
        dyy = _combine(_slice_last(values, slice(start, start + n)), D2_WEIGHTS, s * s)
        results.append(dxx + dyy)
    if check:
        _richardson(results[0], results[1], tol, "laplacian")
    return results[-1]


def gradient_3d(func: Callable[[np.ndarray], np.ndarray], point, h: float = None,
                check: bool = True, tol: float = None) -> np.ndarray:
    """Partials of a vector-valued 3-D field.

    `func` maps points (..., 3) to values (..., 4); the result has shape
    (..., 3, 4) with axis -2 indexing x1, x2, x3. The default step is
    step_3d_rel * (1 + |x|).
    """
    point = np.asarray(point, dtype=float)
    tol = numerics.differencing.get('rtol', 1e-6) if tol is None else tol
    if h is None:
        rel = numerics.differencing.get('step_3d_rel', 1e-4)
        h = rel * (1.0 + np.linalg.norm(point, axis=-1))
    h = np.asarray(h, dtype=float)

    steps = [1.0, 0.5] if check else [1.0]
    offs = np.concatenate([D1_OFFSETS * s for s in steps])          # (S,)
    eye = np.eye(3)                                                  # (3 axes, 3 coords)
    shift = eye[:, None, :] * offs[None, :, None]                    # (3, S, 3)
    pts = point[..., None, None, :] + h[..., None, None, None] * shift
    values = np.asarray(func(pts))                                   # (..., 3, S, 4)

    n = len(D1_OFFSETS)
    parts = []
    for i, s in enumerate(steps):
        block = values[..., i * n:(i + 1) * n, :]
        scale = (h * s)[..., None, None]
        parts.append(np.einsum('...asv,s->...av', block, D1_WEIGHTS) / scale)
    if check:
        err = np.abs(parts[0] - parts[1]).max(axis=(-1, -2))
        worst = float(np.max(err / (1.0 + np.abs(parts[1]).max(axis=(-1, -2)))))
        _record_richardson(worst, tol)
        if worst > tol:
            raise StepTooLarge(f"3-D gradient: Richardson estimate {worst:.3e} exceeds {tol:.1e}")
    return parts[-1]


def cumulative_cubic(values, dt: float, axis: int = -1) -> np.ndarray:
    """Prefix integrals on a uniform grid, fourth order at every node.

    Each interval is integrated with the cubic through its four nearest
    nodes (one-sided at both ends), so the result is a valid integral
    value at every prefix, unlike composite Simpson which only closes at
    even nodes. out[..., 0] == 0.
    """
    f = np.moveaxis(np.asarray(values), axis, -1)
    n = f.shape[-1] - 1
    if n < 3:
        raise ValueError("cumulative_cubic needs at least 4 nodes")
    inc = np.empty(f.shape[:-1] + (n,), dtype=np.result_type(f.dtype, np.float64))
    inc[..., 0] = 9 * f[..., 0] + 19 * f[..., 1] - 5 * f[..., 2] + f[..., 3]
    inc[..., 1:n - 1] = (-f[..., 0:n - 2] + 13 * f[..., 1:n - 1]
                         + 13 * f[..., 2:n] - f[..., 3:n + 1])
    inc[..., n - 1] = f[..., n - 3] - 5 * f[..., n - 2] + 19 * f[..., n - 1] + 9 * f[..., n]
    inc *= dt / 24.0
    out = np.zeros(f.shape, dtype=inc.dtype)
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return np.moveaxis(out, -1, axis)


def gauss_legendre_panels(order: int, panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    log.debug(f"Gauss-Legendre: order={order} panels={panels}")
    return nodes, weights

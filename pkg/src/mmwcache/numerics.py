"""Small numerical helpers shared across modules."""

from __future__ import annotations

import math

# Floating-point guard used when clamping arccos/arcsin arguments at
# geometric boundaries.
CLAMP_EPS = 1e-12


def clamp_unit(x: float, eps: float = CLAMP_EPS) -> float:
    """Clamp x into [-1, 1], tolerating overshoot up to eps.

    Raises ValueError when x is outside [-1-eps, 1+eps]; values inside the
    tolerance band are snapped to the boundary.
    """
    if x > 1.0:
        if x > 1.0 + eps:
            raise ValueError(f"value {x!r} outside [-1, 1] beyond tolerance")
        return 1.0
    if x < -1.0:
        if x < -1.0 - eps:
            raise ValueError(f"value {x!r} outside [-1, 1] beyond tolerance")
        return -1.0
    return x


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""

    def __init__(self, message: str, value: float, achieved: float):
        super().__init__(message)
        self.value = value
        self.achieved = achieved


def _simpson(f, a, fa, b, fb, m, fm):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9,
                     max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature of f over [a, b].

    Bisects intervals until the local Simpson error estimate falls below the
    (distributed) absolute tolerance. Intended for smooth integrands; raises
    QuadratureError with the achieved error estimate when max_depth is hit.
    """
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(f, a, fa, b, fb, m, fm)

    worst = [0.0]

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(f, a, fa, m, fm, lm, flm)
        right = _simpson(f, m, fm, b, fb, rm, frm)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol or depth >= max_depth:
            if abs(err) > tol:
                worst[0] = max(worst[0], abs(err))
            return left + right + err
        return (recurse(a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1)
                + recurse(m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1))

    value = recurse(a, fa, b, fb, m, fm, whole, tol, 0)
    if worst[0] > 0.0:
        raise QuadratureError(
            f"quadrature tolerance {tol:g} not met (achieved {worst[0]:g})",
            value=value, achieved=worst[0])
    return value


def wrap_angle(angle: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    a = math.fmod(angle, 2.0 * math.pi)
    if a < 0.0:
        a += 2.0 * math.pi
    return a


def angle_diff(a: float, b: float) -> float:
    """Signed smallest difference a-b wrapped to (-pi, pi]."""
    d = math.fmod(a - b, 2.0 * math.pi)
    if d <= -math.pi:
        d += 2.0 * math.pi
    elif d > math.pi:
        d -= 2.0 * math.pi
    return d

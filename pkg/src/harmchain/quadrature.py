"""Adaptive Simpson quadrature for smooth scalar integrands."""

from __future__ import annotations

from typing import Callable

from .errors import ConvergenceError


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Returns ``(value, error_estimate)``.  Raises ConvergenceError if some
    panel hits ``max_depth`` without meeting its share of the tolerance.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = adaptive_simpson(f, b, a, tol, max_depth)
        return -value, err

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    failed = []

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0, abs(delta) / 15.0
        if depth >= max_depth:
            failed.append((a, b, abs(delta) / 15.0))
            return left + right + delta / 15.0, abs(delta) / 15.0
        lv, le = recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        rv, re = recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
        return lv + rv, le + re

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    value, err = recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 0)
    if failed:
        lo, hi, res = failed[0]
        raise ConvergenceError(
            f"adaptive Simpson hit depth {max_depth} on [{lo:.6g}, {hi:.6g}] "
            f"(residual estimate {res:.3e}, total {err:.3e})"
        )
    return value, err

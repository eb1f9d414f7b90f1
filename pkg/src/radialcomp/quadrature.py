"""Adaptive Simpson quadrature for smooth scalar integrands."""

import math

__all__ = ["QuadratureError", "adaptive_simpson"]


class QuadratureError(RuntimeError):
    """Raised when the recursion budget is exhausted before convergence."""


def adaptive_simpson(func, a, b, tol=1e-10, rel_tol=0.0, max_depth=48):
    """Integrate ``func`` over ``[a, b]`` by adaptive Simpson bisection.

    Each panel is accepted once the difference between the one-panel and
    two-panel Simpson estimates is below ``15 * tol_panel``; the accepted
    value carries the usual Richardson correction.

    Parameters
    ----------
    func : callable
        Scalar integrand ``x -> float``.
    a, b : float
        Integration limits. ``a > b`` flips the sign of the result.
    tol : float
        Absolute tolerance for the whole interval.
    rel_tol : float
        Optional relative tolerance, measured against the coarse estimate.
    max_depth : int
        Maximum bisection depth of any panel.

    Returns
    -------
    value : float
    error : float
        Sum of the per-panel error estimates ``|S2 - S1| / 15``.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = adaptive_simpson(func, b, a, tol, rel_tol, max_depth)
        return -value, err

    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(tol, rel_tol * abs(whole))

    total = 0.0
    err_total = 0.0
    # (a, b, fa, fm, fb, whole, tol, depth); explicit stack avoids recursion limits
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s_whole, panel_tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = func(lm), func(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s_whole
        if abs(delta) <= 15.0 * panel_tol or (hi - lo) < 1e-15 * max(1.0, abs(mid)):
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{lo!r}, {hi!r}]")
        if not (math.isfinite(left) and math.isfinite(right)):
            raise QuadratureError(f"non-finite integrand near x={mid!r}")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * panel_tol, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * panel_tol, depth + 1))
    return total, err_total

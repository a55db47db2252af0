"""Pure numpy pivot kernel for the bounded-variable revised simplex.

Twin of the compiled kernel in ``_simplex_cy.pyx``: identical pivot rules
(Dantzig pricing with first-index tie-break, switching to Bland's rule
after a stall; ratio ties by largest pivot magnitude then smallest variable
index), so both backends walk essentially the same vertex sequence.

Variable status codes: 0 at lower bound, 1 at upper bound, 2 basic,
3 free at zero. Kernel status codes: 0 optimal, 1 unbounded,
2 iteration limit, 3 singular basis.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

PIV_TOL = 1e-9
TIE_TOL = 1e-9
ZERO_STEP = 1e-11
STALL_LIMIT = 40


def _nonbasic_values(lower: np.ndarray, upper: np.ndarray, vstat: np.ndarray) -> np.ndarray:
    vals = np.where(vstat == 1, upper, lower)
    vals = np.where((vstat == 2) | (vstat == 3), 0.0, vals)
    return vals


def _refactor(A, b, lower, upper, basis, vstat):
    B = A[:, basis]
    try:
        Binv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        return None, None
    vals = _nonbasic_values(lower, upper, vstat)
    xB = Binv @ (b - A @ vals)
    return Binv, xB


def _price(c, d, vstat, lower, upper, opt_tol, bland):
    """Entering column, or -1 when dual-feasible. Fixed columns never enter."""
    movable = (upper - lower) > 0.0
    viol = np.zeros_like(d)
    at_lo = (vstat == 0) & movable
    at_up = (vstat == 1) & movable
    free = vstat == 3
    viol[at_lo] = -d[at_lo]
    viol[at_up] = d[at_up]
    viol[free] = np.abs(d[free])
    if bland:
        elig = viol > opt_tol
        if not elig.any():
            return -1
        return int(np.argmax(elig))  # first eligible index
    j = int(np.argmax(viol))
    if viol[j] <= opt_tol:
        return -1
    return j


def run(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    basis: np.ndarray,
    vstat: np.ndarray,
    opt_tol: float = 1e-7,
    max_iter: int = 20000,
    refactor_every: int = 64,
):
    """Iterate to optimality from the given starting basis.

    Mutates ``basis`` and ``vstat`` in place. Returns
    (status, iterations, x, y) with the full primal vector and row duals
    (x and y are None unless status is 0).
    """
    m, n = A.shape
    if m == 0:
        # pure box problem: every variable sits at its cheaper bound
        x = np.zeros(n)
        for k in range(n):
            if c[k] > 0:
                if not np.isfinite(lower[k]):
                    return 1, 0, None, None
                x[k] = lower[k]
            elif c[k] < 0:
                if not np.isfinite(upper[k]):
                    return 1, 0, None, None
                x[k] = upper[k]
            elif np.isfinite(lower[k]):
                x[k] = lower[k]
            elif np.isfinite(upper[k]):
                x[k] = upper[k]
        return 0, 0, x, np.zeros(0)

    Binv, xB = _refactor(A, b, lower, upper, basis, vstat)
    if Binv is None:
        return 3, 0, None, None

    bland = False
    stall = 0
    since_refactor = 0
    it = 0
    status = 2
    while it < max_iter:
        it += 1
        since_refactor += 1
        if since_refactor >= refactor_every:
            Binv, xB = _refactor(A, b, lower, upper, basis, vstat)
            since_refactor = 0
            if Binv is None:
                return 3, it, None, None

        y = c[basis] @ Binv
        d = c - y @ A
        j = _price(c, d, vstat, lower, upper, opt_tol, bland)
        if j < 0:
            if since_refactor > 0:
                # confirm optimality on a fresh factorisation
                Binv, xB = _refactor(A, b, lower, upper, basis, vstat)
                since_refactor = 0
                if Binv is None:
                    return 3, it, None, None
                y = c[basis] @ Binv
                d = c - y @ A
                j = _price(c, d, vstat, lower, upper, opt_tol, bland)
            if j < 0:
                status = 0
                break

        sigma = 1.0
        if vstat[j] == 1 or (vstat[j] == 3 and d[j] > 0):
            sigma = -1.0

        w = Binv @ A[:, j]
        delta = sigma * w  # basic i moves by -delta per unit step

        lbB = lower[basis]
        ubB = upper[basis]
        ratios = np.full(m, np.inf)
        dec = delta > PIV_TOL
        inc = delta < -PIV_TOL
        with np.errstate(invalid="ignore"):
            ratios[dec] = (xB[dec] - lbB[dec]) / delta[dec]
            ratios[inc] = (ubB[inc] - xB[inc]) / (-delta[inc])
        np.maximum(ratios, 0.0, out=ratios)

        t_row = float(ratios.min()) if m else np.inf
        t_bound = upper[j] - lower[j]

        if not np.isfinite(min(t_row, t_bound)):
            return 1, it, None, None

        if t_bound <= t_row + TIE_TOL:
            # entering variable runs to its other bound, basis unchanged
            xB = xB - t_bound * delta
            vstat[j] = 1 - vstat[j]
            step = t_bound
        else:
            tie = ratios <= t_row + TIE_TOL
            cand = np.where(tie)[0]
            if bland:
                leave = int(cand[np.argmin(basis[cand])])
            else:
                order = np.lexsort((basis[cand], -np.abs(w[cand])))
                leave = int(cand[order[0]])
            piv = w[leave]
            if abs(piv) < PIV_TOL:
                Binv, xB = _refactor(A, b, lower, upper, basis, vstat)
                since_refactor = 0
                if Binv is None:
                    return 3, it, None, None
                continue
            lv = int(basis[leave])
            if vstat[j] == 0:
                start = lower[j]
            elif vstat[j] == 1:
                start = upper[j]
            else:
                start = 0.0
            xB = xB - t_row * delta
            xB[leave] = start + sigma * t_row
            vstat[lv] = 0 if delta[leave] > 0 else 1
            basis[leave] = j
            vstat[j] = 2
            # product-form update of the basis inverse
            Binv[leave, :] /= piv
            w_others = w.copy()
            w_others[leave] = 0.0
            Binv -= np.outer(w_others, Binv[leave, :])
            step = t_row

        if step <= ZERO_STEP:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

    if status != 0:
        return status, it, None, None

    x = _nonbasic_values(lower, upper, vstat)
    x[basis] = xB
    y = c[basis] @ Binv
    return 0, it, x, y

"""Limit of the horizon-T solutions as the horizon grows.

:func:`limit_closed_form` evaluates the limiting capital, consumption
and shadow-price formulas directly; :func:`limit_numeric` extracts the
same object from any finite-horizon solver by growing the horizon until
successive solutions stop moving (a Cauchy criterion, so it also works
for problems without closed forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .finite_solver import FiniteSolution, _limit_log_levels
from .model import GrowthParams, NoConvergenceError, ParameterError, Path, ProblemSpec

CLOSED_FORM = "closed-form"
NUMERIC = "numeric"


@dataclass(frozen=True, eq=False)
class LimitPath:
    """Pointwise limit of the finite-horizon optimal solutions.

    ``provenance`` is ``closed-form`` (formulas valid at any date) or
    ``numeric`` (tabulated up to the requested date window, together
    with the horizon at which the Cauchy stop fired and the residual it
    achieved).

    The shadow price is the marginal payoff of consumption, ``1/c`` for
    log payoffs.  At finite horizons that identification is a modeling
    choice (nothing in the problem statement pins it down), but its
    limit reproduces the closed-form shadow-price formula exactly.
    """

    params: GrowthParams | None
    provenance: str
    k_table: np.ndarray | None = None
    c_table: np.ndarray | None = None
    converged_horizon: int | None = None
    cauchy_residual: float | None = None

    @property
    def t_max(self) -> int | None:
        """Largest tabulated date for numeric provenance; None otherwise."""
        if self.k_table is None:
            return None
        return len(self.k_table) - 1

    def _eval(self, t, table: np.ndarray | None, closed: Callable):
        t_arr = np.asarray(t)
        if np.any(t_arr < 0):
            raise ParameterError("date must be >= 0")
        if self.provenance == CLOSED_FORM:
            out = closed(t_arr)
        else:
            if np.any(t_arr > self.t_max):
                raise ParameterError(f"numeric limit path tabulated only through t={self.t_max}")
            out = table[t_arr]
        return float(out) if np.ndim(t) == 0 else out

    def k(self, t):
        """Limit capital at date(s) t."""
        return self._eval(t, self.k_table, lambda tt: np.exp(_limit_log_levels(self.params, tt)[0]))

    def c(self, t):
        """Limit consumption at date(s) t."""
        return self._eval(t, self.c_table, lambda tt: np.exp(_limit_log_levels(self.params, tt)[1]))

    def lam(self, t):
        """Limit shadow price at date(s) t (reciprocal consumption)."""
        return 1.0 / self.c(t)

    def path(self, T: int) -> Path:
        """Materialize dates 0..T as a :class:`Path` with origin ``limit``."""
        t = np.arange(T + 1)
        return Path(t, self.k(t), self.c(t), "limit")


def limit_closed_form(params: GrowthParams) -> LimitPath:
    """Limit path from the closed forms.

    Capital converges to ``(ab)**(1/(1-alpha))`` with ``ab = alpha*beta``;
    the initial condition enters through an ``alpha**t`` exponent, so
    ``k(0)`` is reproduced exactly and the fixed point is reached in the
    tail.  Consumption is the constant saving-ratio complement
    ``(1-ab) * k(t)**alpha``.
    """
    return LimitPath(params=params, provenance=CLOSED_FORM)


def limit_numeric(
    spec: ProblemSpec,
    solver: Callable[[int], FiniteSolution],
    t_max: int,
    tol: float,
    T_cap: int | None = None,
    params: GrowthParams | None = None,
) -> LimitPath:
    """Limit path as a numeric limit of finite solutions.

    Grows the horizon one step at a time and stops when capital at every
    date up to ``t_max`` moves by less than ``tol`` between successive
    horizons.  Raises :class:`NoConvergenceError` if that never happens
    by ``T_cap`` (default ``10*t_max + 500``).
    """
    if t_max < 0:
        raise ParameterError("t_max must be >= 0")
    if T_cap is None:
        T_cap = 10 * t_max + 500
    prev = solver(t_max)
    gap = math.inf
    for T in range(t_max + 1, T_cap + 1):
        cur = solver(T)
        gap = float(np.max(np.abs(cur.path.k[: t_max + 1] - prev.path.k[: t_max + 1])))
        if gap < tol:
            return LimitPath(
                params=params,
                provenance=NUMERIC,
                k_table=cur.path.k[: t_max + 1].copy(),
                c_table=cur.path.c[: t_max + 1].copy(),
                converged_horizon=T,
                cauchy_residual=gap,
            )
        prev = cur
    raise NoConvergenceError(
        f"capital still moving by {gap:.3e} (tol {tol:.1e}) at horizon cap {T_cap}"
    )


def shadow_price(limit_path: LimitPath, t) -> float:
    """Shadow price along the limit path; equals reciprocal consumption."""
    return limit_path.lam(t)

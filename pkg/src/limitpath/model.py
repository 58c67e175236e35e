"""Time-indexed capital accumulation problems and their feasibility rules.

A :class:`ProblemSpec` bundles everything the solvers and criterion
checkers need to know about a control problem: the per-period payoff
``gain(t, c, k)``, the capital transition ``transition(t, c, k)`` giving
next-period capital, a feasibility predicate for decisions, per-period
state bounds, and the terminal rule ``eat_up(t, k)`` returning the
consumption level that drives next-period capital to zero.

:func:`make_growth_model` builds the concrete one-sector model with log
payoffs, Cobb-Douglas output ``k**alpha`` and geometric discounting.

All callables are expected to broadcast over numpy arrays.  Every type
here is frozen and every operation pure, so instances are safe to share
across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize

NONNEGATIVE = "nonnegative"
NONPOSITIVE = "nonpositive"

_UTILITY_SIGNS = (NONNEGATIVE, NONPOSITIVE)
_SIGN_SLACK = 1e-12

PATH_ORIGINS = ("finite-solution", "limit", "challenger", "converted")


class ParameterError(ValueError):
    """A constructor or operation argument violates its documented range."""


class PathTooShortError(ValueError):
    """A path does not reach the horizon required by an operation."""


class SeriesTooShortError(ValueError):
    """A series has too few entries for tail estimation."""


class SignMismatchError(ValueError):
    """Sampled payoffs contradict the declared utility sign."""


class NoConvergenceError(RuntimeError):
    """An iterative limit computation failed to reach its tolerance."""


class InfeasibleGridError(RuntimeError):
    """Grid-based dynamic programming found no feasible decision."""


class InfeasibleStrategyError(ValueError):
    """A challenger strategy left the feasible set."""


@dataclass(frozen=True)
class GrowthParams:
    """Parameters of the one-sector growth model.

    ``alpha`` is the output elasticity of capital, ``beta`` the discount
    factor (values above 1, i.e. negative discount rates, are allowed as
    long as ``beta < 1/alpha``), ``k0`` the initial capital stock.
    """

    alpha: float
    beta: float
    k0: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError("alpha must lie in (0, 1)")
        if not 0.0 < self.beta < 1.0 / self.alpha:
            raise ParameterError("beta must lie in (0, 1/alpha)")
        if not 0.0 < self.k0 < 1.0:
            raise ParameterError("k0 must lie in (0, 1)")

    @property
    def ab(self) -> float:
        """The product alpha*beta; always in (0, 1) for valid parameters."""
        return self.alpha * self.beta


@dataclass(frozen=True, eq=False)
class Path:
    """A capital/consumption trajectory sampled at integer dates 0..horizon.

    ``origin`` records how the path was produced (one of
    ``finite-solution``, ``limit``, ``challenger``, ``converted``); it is
    the only feasibility metadata carried by the type itself — transition
    consistency is checked by :func:`validate_path`.
    """

    t: np.ndarray
    k: np.ndarray
    c: np.ndarray
    origin: str

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.int64)
        k = np.asarray(self.k, dtype=float)
        c = np.asarray(self.c, dtype=float)
        if len(t) == 0 or not (len(t) == len(k) == len(c)):
            raise ParameterError("path arrays must be nonempty and equally long")
        if t[0] != 0 or (len(t) > 1 and not np.all(np.diff(t) == 1)):
            raise ParameterError("path dates must increase from 0 in unit steps")
        if self.origin not in PATH_ORIGINS:
            raise ParameterError(f"origin must be one of {PATH_ORIGINS}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def horizon(self) -> int:
        return int(self.t[-1])

    def truncate(self, T: int) -> "Path":
        """Restrict the path to dates 0..T (consumption left untouched)."""
        if self.horizon < T:
            raise PathTooShortError(f"path ends at {self.horizon}, needs {T}")
        return Path(self.t[: T + 1], self.k[: T + 1], self.c[: T + 1], self.origin)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Contract between a control problem and the solvers/checkers.

    ``state_domain(t)`` returns capital bounds ``(lo, hi)`` at date t.
    ``utility_sign`` declares whether payoffs are uniformly nonnegative or
    nonpositive; the comparators need this orientation and refuse to infer
    it from samples.  ``eat_up(t, k)`` defaults to bracketed root-finding
    on consumption (tolerance 1e-12); supply a closed form when one
    exists.  ``invert_transition(t, k, k_next)`` returns the consumption
    reaching ``k_next`` from ``k`` and has the same default.
    """

    gain: Callable
    transition: Callable
    feasible: Callable
    state_domain: Callable[[int], tuple[float, float]]
    utility_sign: str
    initial_capital: float
    eat_up: Callable | None = None
    invert_transition: Callable | None = None

    def __post_init__(self):
        if self.utility_sign not in _UTILITY_SIGNS:
            raise ParameterError(f"utility_sign must be one of {_UTILITY_SIGNS}")
        if self.invert_transition is None:
            object.__setattr__(self, "invert_transition", self._bracketed_inverse)
        if self.eat_up is None:
            inv = self.invert_transition
            object.__setattr__(self, "eat_up", lambda t, k: inv(t, k, 0.0))

    def _bracketed_inverse(self, t, k, k_next):
        """Solve ``transition(t, c, k) = k_next`` for c by bracketing.

        Assumes the transition is strictly decreasing in consumption,
        which holds for budget-constraint models.
        """

        def f(c):
            return float(self.transition(t, c, k)) - float(k_next)

        hi = 1.0
        for _ in range(64):
            if f(hi) < 0.0:
                break
            hi *= 2.0
        else:
            raise ParameterError("could not bracket the consumption solving the transition")
        lo = 1e-300
        if f(lo) <= 0.0:
            raise ParameterError("transition cannot reach the requested next capital")
        root = optimize.brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)
        return float(root)


def make_growth_model(params: GrowthParams) -> ProblemSpec:
    """One-sector growth problem: payoff ``beta**t * ln(c)`` and budget
    ``c + k_next = k**alpha``.

    The terminal rule has the closed form ``c = k**alpha`` (consume all
    output, leaving zero capital), overriding the generic root-finder.
    Payoffs are nonpositive because capital, hence consumption, stays
    below 1.
    """
    alpha = params.alpha
    beta = params.beta

    def gain(t, c, k):
        return beta**t * np.log(c)

    def transition(t, c, k):
        return k**alpha - c

    def feasible(t, c, k):
        return (c > 0.0) & (c <= k**alpha)

    def state_domain(t):
        return (0.0, 1.0)

    def eat_up(t, k):
        return k**alpha

    def invert_transition(t, k, k_next):
        return k**alpha - k_next

    return ProblemSpec(
        gain=gain,
        transition=transition,
        feasible=feasible,
        state_domain=state_domain,
        utility_sign=NONPOSITIVE,
        initial_capital=params.k0,
        eat_up=eat_up,
        invert_transition=invert_transition,
    )


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Outcome of re-checking a path against a problem's transition.

    ``passed`` depends only on transition residuals; feasibility, domain
    and payoff-sign findings are informational.
    """

    residuals: np.ndarray
    max_residual: float
    worst_step: int | None
    feasibility_violations: tuple[int, ...]
    domain_violations: tuple[int, ...]
    sign_warnings: tuple[int, ...]
    tol: float
    passed: bool


def validate_path(spec: ProblemSpec, path: Path, tol: float = 1e-9,
                  terminal_zero: bool | None = None) -> ValidationReport:
    """Recompute every transition along ``path`` and report residuals.

    The path passes iff the largest residual does not exceed ``tol``.
    When ``terminal_zero`` is true (the default for ``finite-solution``
    and ``converted`` paths) the final point must additionally drive
    next-period capital to zero.  State-domain breaches (e.g. capital at
    or above the upper bound, which formula-level parameter sweeps can
    produce) are flagged but do not fail the path.
    """
    if terminal_zero is None:
        terminal_zero = path.origin in ("finite-solution", "converted")
    t, k, c = path.t, path.k, path.c

    if len(path) > 1:
        with np.errstate(all="ignore"):
            predicted = np.asarray(spec.transition(t[:-1], c[:-1], k[:-1]), float)
        residuals = np.abs(k[1:] - predicted)
    else:
        residuals = np.empty(0)
    if terminal_zero:
        with np.errstate(all="ignore"):
            last = abs(float(spec.transition(int(t[-1]), float(c[-1]), float(k[-1]))))
        residuals = np.append(residuals, last)

    with np.errstate(all="ignore"):
        feas = np.broadcast_to(np.asarray(spec.feasible(t, c, k), bool), t.shape)
        gains = np.asarray(spec.gain(t, c, k), float)
    feasibility_violations = tuple(int(i) for i in np.nonzero(~feas)[0])

    bounds = np.array([spec.state_domain(int(tt)) for tt in t])
    in_domain = (k > bounds[:, 0]) & (k < bounds[:, 1])
    domain_violations = tuple(int(i) for i in np.nonzero(~in_domain)[0])

    if spec.utility_sign == NONPOSITIVE:
        bad = gains > _SIGN_SLACK
    else:
        bad = gains < -_SIGN_SLACK
    sign_warnings = tuple(int(i) for i in np.nonzero(bad)[0])

    if len(residuals):
        worst = int(np.argmax(residuals))
        max_residual = float(residuals[worst])
    else:
        worst, max_residual = None, 0.0
    return ValidationReport(
        residuals=residuals,
        max_residual=max_residual,
        worst_step=worst,
        feasibility_violations=feasibility_violations,
        domain_violations=domain_violations,
        sign_warnings=sign_warnings,
        tol=tol,
        passed=max_residual <= tol,
    )

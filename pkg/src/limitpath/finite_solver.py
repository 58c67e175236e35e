"""Horizon-T solvers with the zero terminal-capital boundary condition.

Three independent routes produce the optimal path of the growth model
for a fixed horizon T:

* :func:`solve_policy_recursion` iterates the optimal saving rule
  forward from the initial capital stock;
* :func:`solve_closed_form` / :func:`eval_closed_form` evaluate the
  closed-form products for capital and consumption, entirely in log
  space (the factors carry exponents like ``alpha**(t-1)`` that would
  underflow as plain powers);
* :func:`solve_dp_oracle` runs backward induction on a capital grid and
  knows nothing about either formula.

Cross-checking the three is the package's main correctness argument:
the recursion is treated as ground truth, and any disagreement beyond
tolerance is a bug, not something to paper over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .model import (
    GrowthParams,
    InfeasibleGridError,
    ParameterError,
    Path,
    PathTooShortError,
    ProblemSpec,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_NEG_SENTINEL = -1e30


@dataclass(frozen=True, eq=False)
class FiniteSolution:
    """Optimal path for a fixed horizon plus its objective value.

    The path covers dates 0..horizon; the implied capital at horizon+1
    is zero, so the final consumption equals the eat-up level.
    ``objective`` is the discounted payoff sum over the whole path.
    """

    horizon: int
    path: Path
    objective: float
    method: str  # recursion | closed-form | dp-oracle


def objective_value(spec: ProblemSpec, path: Path, T: int) -> float:
    """Partial payoff sum through date T with the eat-up terminal term.

    Sums ``gain(t, c(t), k(t))`` for t < T and adds the payoff of
    consuming the eat-up level at T, i.e. the value the path would earn
    if it were terminated at T with nothing wasted.
    """
    if T < 0:
        raise ParameterError("horizon must be >= 0")
    if path.horizon < T:
        raise PathTooShortError(f"path ends at {path.horizon}, needs {T}")
    t, c, k = path.t[:T], path.c[:T], path.k[:T]
    gains = np.asarray(spec.gain(t, c, k), float)
    kT = float(path.k[T])
    term_c = float(spec.eat_up(T, kT))
    term = float(spec.gain(T, term_c, kT))
    return math.fsum(gains.tolist() + [term])


def _growth_objective(params: GrowthParams, log_c: np.ndarray) -> float:
    t = np.arange(len(log_c), dtype=float)
    return math.fsum((params.beta**t * log_c).tolist())


def solve_policy_recursion(params: GrowthParams, T: int) -> FiniteSolution:
    """Forward-iterate the optimal saving rule for horizon T.

    Next-period capital is the fraction
    ``ab * (1 - ab**(T-t)) / (1 - ab**(T-t+1))`` of current output,
    with ``ab = alpha*beta``.  At t = T the numerator vanishes, so
    terminal capital is exactly zero and the last period consumes all
    output.
    """
    if T < 0:
        raise ParameterError("horizon must be >= 0")
    ab = params.ab
    k = np.empty(T + 2)
    c = np.empty(T + 1)
    k[0] = params.k0
    for t in range(T + 1):
        out = k[t] ** params.alpha
        save = ab * (1.0 - ab ** (T - t)) / (1.0 - ab ** (T - t + 1))
        k[t + 1] = save * out
        c[t] = out - k[t + 1]
    path = Path(np.arange(T + 1), k[: T + 1], c, "finite-solution")
    objective = _growth_objective(params, np.log(c))
    return FiniteSolution(T, path, objective, "recursion")


def _suffix_scaled_sums(alpha: float, g: np.ndarray) -> np.ndarray:
    """V[u] = sum_{s=u..T} alpha**(s-u) * g[s-1] for u = 1..T+1.

    ``g`` holds the per-index terms for s = 1..T; V[T+1] = 0.  Computed
    through the linear recurrence V[u] = g[u-1] + alpha*V[u+1] so no
    negative powers of alpha ever appear.
    """
    T = len(g)
    V = np.zeros(T + 2)
    if T:
        rev = lfilter([1.0], [1.0, -alpha], g[::-1])
        V[1 : T + 1] = rev[::-1]
    return V


def _limit_log_levels(params: GrowthParams, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Log capital and log consumption of the limit path at dates ``t``."""
    alpha = params.alpha
    L = math.log(params.ab) / (1.0 - alpha)  # log of the capital fixed point
    drift = math.log(params.k0) - L
    at = alpha ** np.asarray(t, dtype=float)
    log_k = L + at * drift
    log_c = math.log1p(-params.ab) + alpha * L + alpha * at * drift
    return log_k, log_c


def consumption_log_gap(params: GrowthParams, T: int) -> np.ndarray:
    """Log consumption of the horizon-T solution minus the limit path's.

    Returns the gap for t = 0..T as a sum of strictly positive terms
    (no cancellation), so every entry is nonnegative to machine
    precision.  Entry T uses the terminal consumption of the finite
    solution, i.e. all remaining output.
    """
    if T < 0:
        raise ParameterError("horizon must be >= 0")
    alpha, ab = params.alpha, params.ab
    s = np.arange(1, T + 2, dtype=float)
    neg_log = -np.log1p(-(ab**s))  # -ln(1-ab**s) > 0, accurate for tiny ab**s
    V = _suffix_scaled_sums(alpha, neg_log[:T])
    t = np.arange(T + 1)
    return (1.0 - alpha) * V[T - t + 1] + alpha ** t.astype(float) * neg_log[T]


def _closed_form_logs(params: GrowthParams, T: int) -> tuple[np.ndarray, np.ndarray]:
    """Log-space closed forms for the horizon-T path, t = 0..T.

    Both are evaluated as the limit-path level plus an exponent-weighted
    sum of ``-ln(1 - ab**s)`` factor logs.
    """
    alpha, ab = params.alpha, params.ab
    t = np.arange(T + 1)
    log_k, log_c = _limit_log_levels(params, t)

    s = np.arange(1, T + 2, dtype=float)
    neg_log = -np.log1p(-(ab**s))
    V = _suffix_scaled_sums(alpha, neg_log[:T])

    log_c = log_c + (1.0 - alpha) * V[T - t + 1] + alpha ** t.astype(float) * neg_log[T]
    if T >= 1:
        tt = t[1:]
        log_k = log_k.copy()
        # factor ln(1-ab**(T-t+1)) enters positively; the rest are the
        # (1-alpha)*alpha**m weighted denominators plus the alpha**(t-1)
        # weight on the final 1-ab**(T+1) factor
        log_k[1:] = (
            log_k[1:]
            - neg_log[T - tt]
            + (1.0 - alpha) * V[T - tt + 2]
            + alpha ** (tt - 1).astype(float) * neg_log[T]
        )
    return log_k, log_c


def solve_closed_form(params: GrowthParams, T: int) -> FiniteSolution:
    """Evaluate the closed-form horizon-T path for all dates at once."""
    if T < 0:
        raise ParameterError("horizon must be >= 0")
    log_k, log_c = _closed_form_logs(params, T)
    path = Path(np.arange(T + 1), np.exp(log_k), np.exp(log_c), "finite-solution")
    return FiniteSolution(T, path, _growth_objective(params, log_c), "closed-form")


def eval_closed_form(params: GrowthParams, T: int, t: int) -> tuple[float, float]:
    """Closed-form capital and consumption of the horizon-T solution at date t."""
    if not 0 <= t <= T:
        raise ParameterError("date must satisfy 0 <= t <= T")
    if not 0.0 < params.ab < 1.0:
        # every factor 1 - ab**s must stay positive
        raise ParameterError("alpha*beta must lie in (0, 1)")
    log_k, log_c = _closed_form_logs(params, T)
    return float(np.exp(log_k[t])), float(np.exp(log_c[t]))


def _maximize_stage(spec, t, k_nodes, grid_next, v_next, iters=72):
    """Best consumption per capital node at date t, by golden-section.

    The continuation value is piecewise-linear on ``grid_next``; the
    stage objective is concave in consumption for concave payoffs and
    transitions, so golden-section search over the feasible consumption
    interval converges to the maximizer.  Infeasible consumption levels
    evaluate to -inf and the interval shrinks away from them.
    """
    lo_next, hi_next = spec.state_domain(t + 1)
    with np.errstate(all="ignore"):
        c_hi = np.asarray(spec.eat_up(t, k_nodes), float)
    c_hi = np.where(np.isfinite(c_hi) & (c_hi > 0.0), c_hi, 0.0)
    c_lo = c_hi * 1e-12

    def value(c):
        with np.errstate(all="ignore"):
            nxt = np.asarray(spec.transition(t, c, k_nodes), float)
            g = np.asarray(spec.gain(t, c, k_nodes), float)
            ok = np.asarray(spec.feasible(t, c, k_nodes), bool)
            ok = ok & np.isfinite(g) & np.isfinite(nxt)
            ok = ok & (nxt >= lo_next) & (nxt <= hi_next)
            cont = np.interp(np.clip(nxt, lo_next, hi_next), grid_next, v_next)
        return np.where(ok, g + cont, -np.inf)

    a, b = c_lo.copy(), c_hi.copy()
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = value(x1), value(x2)
    for _ in range(iters):
        right = f2 >= f1
        a = np.where(right, x1, a)
        b = np.where(right, b, x2)
        x1 = b - _GOLDEN * (b - a)
        x2 = a + _GOLDEN * (b - a)
        f1, f2 = value(x1), value(x2)
    c_best = 0.5 * (a + b)
    return value(c_best), c_best


def solve_dp_oracle(spec: ProblemSpec, T: int, grid_size: int) -> FiniteSolution:
    """Backward induction on uniform capital grids, blind to closed forms.

    Terminal values are the payoff of eating up; earlier values come from
    maximizing payoff plus the linearly interpolated continuation value.
    The extracted path is feasible by construction, so its (exactly
    recomputed) objective never exceeds the true optimum and converges to
    it as the grid refines.

    Raises :class:`InfeasibleGridError` when the forward extraction
    reaches a state with no feasible decision.
    """
    if T < 0:
        raise ParameterError("horizon must be >= 0")
    if grid_size < 2:
        raise ParameterError("grid_size must be >= 2")

    grids = [np.linspace(*spec.state_domain(t), grid_size) for t in range(T + 1)]
    with np.errstate(all="ignore"):
        eat_c = np.asarray(spec.eat_up(T, grids[T]), float)
        v = np.asarray(spec.gain(T, eat_c, grids[T]), float)
    v = np.where(np.isfinite(v), v, _NEG_SENTINEL)

    tables = [None] * (T + 1)
    tables[T] = v
    for t in range(T - 1, -1, -1):
        val, _ = _maximize_stage(spec, t, grids[t], grids[t + 1], tables[t + 1])
        tables[t] = np.where(np.isfinite(val), val, _NEG_SENTINEL)

    k = float(spec.initial_capital)
    ks = [k]
    cs = []
    for t in range(T):
        val, c = _maximize_stage(spec, t, np.array([k]), grids[t + 1], tables[t + 1])
        if not np.isfinite(val[0]) or val[0] <= _NEG_SENTINEL / 2:
            raise InfeasibleGridError(f"no feasible decision at date {t} from capital {k}")
        c = float(c[0])
        k = float(spec.transition(t, c, k))
        cs.append(c)
        ks.append(k)
    with np.errstate(all="ignore"):
        c_term = float(spec.eat_up(T, ks[-1]))
        g_term = float(spec.gain(T, c_term, ks[-1]))
    if not np.isfinite(g_term):
        raise InfeasibleGridError(f"eat-up payoff undefined at terminal capital {ks[-1]}")
    cs.append(c_term)

    path = Path(np.arange(T + 1), np.array(ks), np.array(cs), "finite-solution")
    gains = [float(spec.gain(t, cs[t], ks[t])) for t in range(T + 1)]
    return FiniteSolution(T, path, math.fsum(gains), "dp-oracle")

"""Optimality-criterion checkers built on partial payoff sums.

The comparators all work on the same raw material: for a horizon T, the
value of a path terminated at T with nothing wasted is the payoff sum
through T-1 plus the payoff of consuming the eat-up level at T (see
:func:`limitpath.finite_solver.objective_value`).  Collecting those
values over a ladder of horizons gives a :class:`PartialSumSeries`;
:func:`liminf_estimate` condenses a series into a tail minimum plus a
trend classification.

A genuine liminf over an infinite horizon is undecidable from finite
data, so every verdict here embeds its window and trend rather than
pretending to certainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .finite_solver import consumption_log_gap, _limit_log_levels, objective_value
from .model import (
    GrowthParams,
    InfeasibleStrategyError,
    NONPOSITIVE,
    ParameterError,
    Path,
    PathTooShortError,
    ProblemSpec,
    SeriesTooShortError,
    SignMismatchError,
)

DEFAULT_ZERO_TOL = 1e-6      # for "this limit is zero" checks
DEFAULT_CAUCHY_TOL = 1e-8    # for "this series has settled" checks
DEFAULT_BURN_IN = 5

TREND_CONVERGING = "converging"
TREND_OSCILLATING = "oscillating"
TREND_DIVERGING_DOWN = "diverging-down"
TREND_DIVERGING_UP = "diverging-up"

SERIES_KINDS = ("single-path", "difference", "ratio", "delta-C", "terminal-term")

CHALLENGER_STRATEGIES = ("constant-saving", "greedy", "perturb-limit")


@dataclass(frozen=True, eq=False)
class PartialSumSeries:
    """A horizon-indexed sequence of partial-sum (or derived) values.

    For kinds ``single-path`` and ``difference`` every entry is
    reproducible from the underlying path(s) via ``objective_value``;
    ``ratio``, ``delta-C`` and ``terminal-term`` hold derived
    diagnostics.
    """

    horizons: np.ndarray
    values: np.ndarray
    kind: str
    params: GrowthParams | None = None

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ParameterError(f"kind must be one of {SERIES_KINDS}")
        object.__setattr__(self, "horizons", np.asarray(self.horizons, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.horizons) != len(self.values):
            raise ParameterError("horizons and values must be equally long")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LiminfEstimate:
    """Finite-sample surrogate for a liminf.

    ``estimate`` is the minimum over the post-burn-in tail, ``window``
    the horizon range it was taken over, ``cauchy_gap`` the largest
    absolute successive difference over the last quarter of the window.
    """

    estimate: float
    window: tuple[int, int]
    trend: str
    cauchy_gap: float


@dataclass(frozen=True, eq=False)
class CriterionReport:
    """Outcome of one optimality check.

    ``passed`` is a pure function of the series, the tolerance and the
    check's rule.  ``applicable`` is False when the check's own
    preconditions exclude the parameter regime (e.g. the vanishing
    terminal term requires a discount factor below 1); inapplicable
    reports never count as failures in aggregate verdicts.
    """

    name: str
    series: PartialSumSeries | None
    liminf: LiminfEstimate | float | None
    passed: bool
    tolerance: float
    notes: str = ""
    applicable: bool = True


def _classify_trend(diffs: np.ndarray, cauchy_gap: float, cauchy_tol: float) -> str:
    if cauchy_gap <= cauchy_tol:
        return TREND_CONVERGING
    mags = np.abs(diffs)
    active = mags > cauchy_tol
    if not active.any():
        return TREND_CONVERGING
    signs = np.sign(diffs[active])
    flips = int(np.count_nonzero(signs[1:] != signs[:-1]))
    flip_rate = flips / max(1, len(signs) - 1)
    half = max(1, len(diffs) // 2)
    quarter = max(1, len(diffs) // 4)
    early = float(np.mean(mags[:half]))
    late = float(np.mean(mags[-quarter:]))
    shrinking = late <= 0.5 * early
    if flip_rate > 0.25:
        return TREND_CONVERGING if shrinking else TREND_OSCILLATING
    if shrinking:
        return TREND_CONVERGING
    return TREND_DIVERGING_DOWN if float(np.mean(diffs)) < 0.0 else TREND_DIVERGING_UP


def liminf_estimate(series: PartialSumSeries, burn_in: int = DEFAULT_BURN_IN,
                    cauchy_tol: float = DEFAULT_CAUCHY_TOL) -> LiminfEstimate:
    """Tail minimum plus trend classification for a series.

    The trend is derived from the tail's successive differences: a small
    Cauchy gap or shrinking step sizes read as converging; persistent
    sign flips as oscillating; one-signed non-shrinking steps as
    diverging in the step direction.
    """
    values = series.values
    if len(values) <= burn_in + 2:
        raise SeriesTooShortError(
            f"series of length {len(values)} needs more than burn_in + 2 = {burn_in + 2} entries"
        )
    tail = values[burn_in:]
    window = (int(series.horizons[burn_in]), int(series.horizons[-1]))
    quarter = max(2, len(tail) // 4)
    last = tail[-quarter:]
    cauchy_gap = float(np.max(np.abs(np.diff(last)))) if len(last) >= 2 else 0.0
    trend = _classify_trend(np.diff(tail), cauchy_gap, cauchy_tol)
    return LiminfEstimate(float(tail.min()), window, trend, cauchy_gap)


def convert_path(spec: ProblemSpec, path: Path, T: int) -> Path:
    """Terminate ``path`` at T with nothing wasted.

    Dates before T are unchanged; consumption at T becomes the eat-up
    level, so the implied capital at T+1 is zero.  Dates after T are
    dropped (they carry zeros conceptually).  Converting twice at the
    same date is a no-op.
    """
    if path.horizon < T:
        raise PathTooShortError(f"path ends at {path.horizon}, needs {T}")
    k = path.k[: T + 1].copy()
    c = path.c[: T + 1].copy()
    c[T] = float(spec.eat_up(T, k[T]))
    return Path(path.t[: T + 1], k, c, "converted")


def _check_sign(spec: ProblemSpec, path: Path, T_max: int) -> None:
    t = path.t[: T_max + 1]
    with np.errstate(all="ignore"):
        g = np.asarray(spec.gain(t, path.c[: T_max + 1], path.k[: T_max + 1]), float)
    if spec.utility_sign == NONPOSITIVE and np.any(g > 1e-12):
        raise SignMismatchError("path payoffs are positive but the problem declares nonpositive gains")
    if spec.utility_sign != NONPOSITIVE and np.any(g < -1e-12):
        raise SignMismatchError("path payoffs are negative but the problem declares nonnegative gains")


def single_path_series(spec: ProblemSpec, path: Path, T_max: int,
                       params: GrowthParams | None = None) -> PartialSumSeries:
    """Partial sums with eat-up terminal term for T = 1..T_max."""
    horizons = np.arange(1, T_max + 1)
    values = np.array([objective_value(spec, path, int(T)) for T in horizons])
    return PartialSumSeries(horizons, values, "single-path", params)


def _difference_series(spec, challenger, incumbent, T_max, params, raw=False):
    horizons = np.arange(1, T_max + 1)
    if raw:
        def partial(path, T):
            t = path.t[: T + 1]
            g = np.asarray(spec.gain(t, path.c[: T + 1], path.k[: T + 1]), float)
            return math.fsum(g.tolist())
    else:
        def partial(path, T):
            return objective_value(spec, path, T)
    values = np.array(
        [partial(challenger, int(T)) - partial(incumbent, int(T)) for T in horizons]
    )
    return PartialSumSeries(horizons, values, "difference", params)


def overtakes(spec: ProblemSpec, challenger: Path, incumbent: Path, T_max: int, *,
              tolerance: float = DEFAULT_ZERO_TOL, burn_in: int = DEFAULT_BURN_IN,
              cauchy_tol: float = DEFAULT_CAUCHY_TOL,
              params: GrowthParams | None = None) -> CriterionReport:
    """Overtaking comparison of two attainable paths.

    Builds the difference of eat-up-terminated partial sums, challenger
    minus incumbent, for T = 1..T_max.  The challenger overtakes when
    the liminf estimate is strictly positive with a converging or
    upward-diverging trend; the incumbent is not overtaken when the
    estimate stays within ``tolerance`` of zero or below.  ``passed``
    reports the latter (the incumbent's defense), which is the
    optimality claim the package verifies.
    """
    if challenger.horizon < T_max or incumbent.horizon < T_max:
        raise PathTooShortError("both paths must be defined through T_max")
    _check_sign(spec, challenger, T_max)
    _check_sign(spec, incumbent, T_max)
    series = _difference_series(spec, challenger, incumbent, T_max, params)
    est = liminf_estimate(series, burn_in, cauchy_tol)
    challenger_wins = est.estimate > 0.0 and est.trend in (TREND_CONVERGING, TREND_DIVERGING_UP)
    defended = est.estimate <= tolerance
    return CriterionReport(
        name="overtaking",
        series=series,
        liminf=est,
        passed=defended,
        tolerance=tolerance,
        notes=f"challenger overtakes: {challenger_wins}; incumbent not overtaken: {defended}",
    )


def challenger_prevails(report: CriterionReport) -> bool:
    """Whether the challenger overtakes, per the positive-liminf rule."""
    est = report.liminf
    return est.estimate > 0.0 and est.trend in (TREND_CONVERGING, TREND_DIVERGING_UP)


def _sum_criterion(spec, challenger, incumbent, T_max, raw, name, *,
                   tolerance, burn_in, cauchy_tol, params):
    if challenger.horizon < T_max or incumbent.horizon < T_max:
        raise PathTooShortError("both paths must be defined through T_max")
    _check_sign(spec, challenger, T_max)
    _check_sign(spec, incumbent, T_max)
    series = _difference_series(spec, challenger, incumbent, T_max, params, raw=raw)
    est = liminf_estimate(series, burn_in, cauchy_tol)
    # A downward-diverging difference satisfies the nonpositive-limit
    # criterion a fortiori; only upward or unsettled tails fail it.
    passed = est.estimate <= tolerance and est.trend in (TREND_CONVERGING, TREND_DIVERGING_DOWN)
    return CriterionReport(
        name=name,
        series=series,
        liminf=est,
        passed=passed,
        tolerance=tolerance,
        notes=f"limit estimate {est.estimate:.6g}, trend {est.trend}",
    )


def sum_criterion_converted(spec: ProblemSpec, challenger: Path, incumbent: Path,
                            T_max: int, *, tolerance: float = DEFAULT_ZERO_TOL,
                            burn_in: int = DEFAULT_BURN_IN,
                            cauchy_tol: float = DEFAULT_CAUCHY_TOL,
                            params: GrowthParams | None = None) -> CriterionReport:
    """Sum-of-utilities comparison with the eat-up terminal adjustment.

    The incumbent is the unique optimum under this criterion when every
    challenger's difference series has a nonpositive limit; ``passed``
    reports that defense for the given challenger.
    """
    return _sum_criterion(spec, challenger, incumbent, T_max, False,
                          "sum-of-utilities-converted", tolerance=tolerance,
                          burn_in=burn_in, cauchy_tol=cauchy_tol, params=params)


def sum_criterion_raw(spec: ProblemSpec, challenger: Path, incumbent: Path,
                      T_max: int, *, tolerance: float = DEFAULT_ZERO_TOL,
                      burn_in: int = DEFAULT_BURN_IN,
                      cauchy_tol: float = DEFAULT_CAUCHY_TOL,
                      params: GrowthParams | None = None) -> CriterionReport:
    """Sum-of-utilities comparison on raw partial sums through T.

    Identical to :func:`sum_criterion_converted` except no eat-up
    terminal term is added; the two verdicts agree whenever both paths'
    terminal terms vanish in the limit.
    """
    return _sum_criterion(spec, challenger, incumbent, T_max, True,
                          "sum-of-utilities-raw", tolerance=tolerance,
                          burn_in=burn_in, cauchy_tol=cauchy_tol, params=params)


def consumption_gap_sum(params: GrowthParams, T: int) -> float:
    """Discounted total of log-consumption gaps, horizon-T vs limit path.

    Sums ``beta**t * (ln c_T(t) - ln c_lim(t))`` over t = 0..T, where the
    entry at T uses the finite solution's terminal (eat-up) consumption.
    Vanishes as T grows when beta < 1; settles at a finite positive value
    when beta = 1.  Every term is nonnegative: finite horizons consume
    weakly more than the limit path at every date.
    """
    if T < 1:
        raise ParameterError("horizon must be >= 1")
    gap = consumption_log_gap(params, T)
    t = np.arange(T + 1, dtype=float)
    return float(np.dot(params.beta**t, gap))


def consumption_gap_series(params: GrowthParams, T_max: int) -> PartialSumSeries:
    """:func:`consumption_gap_sum` over T = 1..T_max as a series."""
    horizons = np.arange(1, T_max + 1)
    values = np.array([consumption_gap_sum(params, int(T)) for T in horizons])
    return PartialSumSeries(horizons, values, "delta-C", params)


def consumption_gap_report(params: GrowthParams, T_max: int, *,
                           tolerance: float = DEFAULT_ZERO_TOL,
                           burn_in: int = DEFAULT_BURN_IN,
                           cauchy_tol: float = DEFAULT_CAUCHY_TOL) -> CriterionReport:
    """Convergence verdict on the discounted consumption-gap totals.

    For beta < 1 the totals must converge to zero within ``tolerance``;
    for beta >= 1 they must settle (Cauchy gap below ``cauchy_tol``) at a
    strictly positive value.
    """
    series = consumption_gap_series(params, T_max)
    est = liminf_estimate(series, burn_in, cauchy_tol)
    final = float(series.values[-1])
    if params.beta < 1.0:
        passed = est.trend == TREND_CONVERGING and abs(final) <= tolerance
        notes = f"final gap total {final:.3e}, trend {est.trend}; zero-limit rule"
    else:
        passed = (
            est.trend == TREND_CONVERGING
            and est.cauchy_gap <= cauchy_tol
            and est.estimate > 0.0
        )
        notes = f"final gap total {final:.6g}, trend {est.trend}; positive-finite-limit rule"
    return CriterionReport("consumption-gap", series, est, passed, tolerance, notes)


def optimality_ratio(params: GrowthParams, T_max: int, *,
                     tolerance: float = DEFAULT_ZERO_TOL,
                     burn_in: int = DEFAULT_BURN_IN,
                     cauchy_tol: float = DEFAULT_CAUCHY_TOL) -> CriterionReport:
    """Ratio of the finite-vs-limit payoff loss to the total payoff.

    For each T the numerator is the payoff sum of the horizon-T solution
    minus the payoff sum of the limit path terminated at T with nothing
    wasted; the denominator is the horizon-T solution's own total.  The
    limit path is optimal under the overtaking criterion whenever this
    ratio vanishes, so the check passes when the |ratio| trend converges
    and the final |ratio| is within ``tolerance``.

    Trend and Cauchy statistics are computed on |R(T)|; the stored
    series keeps the sign.
    """
    if T_max < 2:
        raise ParameterError("T_max must be >= 2")
    beta = params.beta
    t_all = np.arange(T_max + 1)
    log_c_lim = _limit_log_levels(params, t_all)[1]
    beta_pow = beta ** t_all.astype(float)
    log_keep = math.log1p(-params.ab)  # eat-up vs limit consumption differ by this

    horizons = np.arange(1, T_max + 1)
    ratios = np.empty(T_max)
    for i, T in enumerate(horizons):
        gap = consumption_log_gap(params, int(T))
        w = beta_pow[: T + 1]
        delta = float(np.dot(w, gap))
        numer = delta + beta_pow[T] * log_keep
        denom = float(np.dot(w, log_c_lim[: T + 1])) + delta
        if denom == 0.0:
            raise ArithmeticError("total payoff is zero; ratio undefined")
        ratios[i] = numer / denom
    series = PartialSumSeries(horizons, ratios, "ratio", params)

    abs_series = PartialSumSeries(horizons, np.abs(ratios), "ratio", params)
    try:
        est = liminf_estimate(abs_series, burn_in, cauchy_tol)
    except SeriesTooShortError:
        return CriterionReport(
            name="ratio-condition",
            series=series,
            liminf=None,
            passed=False,
            tolerance=tolerance,
            notes="inconclusive: too few horizons for a trend classification",
        )
    final = abs(float(ratios[-1]))
    passed = est.trend == TREND_CONVERGING and final <= tolerance
    return CriterionReport(
        name="ratio-condition",
        series=series,
        liminf=est,
        passed=passed,
        tolerance=tolerance,
        notes=f"|ratio| at T_max: {final:.3e}, trend {est.trend} (statistics on |R|)",
    )


@dataclass(frozen=True)
class SeriesBound:
    """Partial sum of ``alpha**s * (-ln(1 - alpha**s))`` and its companions.

    ``integral_bound`` is the displayed log-integral quantity
    ``(1/ln a)[(1-a^T)ln(1-a^T) - (1-a)ln(1-a) - (1-a^T) + (1-a)]``.
    It is reported, not asserted against the sum: as transcribed the
    inequality fails (the sum of a decreasing function from s=1 exceeds
    the integral from s=1), while boundedness of the partial sums holds
    regardless and is what the tests check.  ``dominance_ok`` records
    the termwise comparison ``-ln(1-(ab)^s) <= -ln(1-a^s)`` (valid for
    beta <= 1; None otherwise).
    """

    partial_sum: float
    integral_bound: float
    dominance_ok: bool | None


def gap_series_bound(params: GrowthParams, T: int) -> SeriesBound:
    """Bounding series behind the consumption-gap convergence argument."""
    if T < 1:
        raise ParameterError("horizon must be >= 1")
    alpha = params.alpha
    s = np.arange(1, T + 1, dtype=float)
    terms = alpha**s * (-np.log1p(-(alpha**s)))
    partial = float(np.sum(terms))
    aT = alpha**T
    bracket = (
        (1.0 - aT) * math.log1p(-aT)
        - (1.0 - alpha) * math.log1p(-alpha)
        - (1.0 - aT)
        + (1.0 - alpha)
    )
    integral = bracket / math.log(alpha)
    dominance: bool | None = None
    if params.beta <= 1.0:
        lhs = -np.log1p(-(params.ab**s))
        rhs = -np.log1p(-(alpha**s))
        dominance = bool(np.all(lhs <= rhs + 1e-15))
    return SeriesBound(partial, integral, dominance)


def terminal_term_limit(params: GrowthParams, path: Path, T_max: int, *,
                        tolerance: float = DEFAULT_ZERO_TOL,
                        burn_in: int = DEFAULT_BURN_IN,
                        cauchy_tol: float = DEFAULT_CAUCHY_TOL) -> CriterionReport:
    """Vanishing of the discounted eat-up payoff along a path.

    Builds ``beta**T * |ln(k(T)**alpha)|`` for T = 0..T_max and passes
    when the final value is within ``tolerance`` with a converging
    trend.  Only meaningful for beta in (0, 1); outside that range the
    report is marked not applicable (and not passed).
    """
    if params.beta >= 1.0:
        return CriterionReport(
            name="terminal-term",
            series=None,
            liminf=None,
            passed=False,
            tolerance=tolerance,
            notes="not applicable: requires a discount factor in (0, 1)",
            applicable=False,
        )
    if path.horizon < T_max:
        raise PathTooShortError(f"path ends at {path.horizon}, needs {T_max}")
    horizons = np.arange(T_max + 1)
    values = params.beta ** horizons.astype(float) * np.abs(
        params.alpha * np.log(path.k[: T_max + 1])
    )
    series = PartialSumSeries(horizons, values, "terminal-term", params)
    est = liminf_estimate(series, burn_in, cauchy_tol)
    final = float(values[-1])
    passed = final <= tolerance and est.trend == TREND_CONVERGING
    return CriterionReport(
        name="terminal-term",
        series=series,
        liminf=est,
        passed=passed,
        tolerance=tolerance,
        notes=f"final discounted terminal payoff {final:.3e}, trend {est.trend}",
    )


def make_challenger(spec: ProblemSpec, strategy: str, param: float, T_max: int, *,
                    perturb_time: int = 3, base_path: Path | None = None) -> Path:
    """Forward-simulate an attainable challenger path through T_max.

    Strategies:

    * ``constant-saving``: next capital is ``param`` times gross output
      (the transition evaluated at zero consumption);
    * ``greedy``: next capital pinned at the small floor ``param`` (an
      exact zero would make log payoffs blow up downstream);
    * ``perturb-limit``: copy ``base_path`` (a limit-path truncation),
      shift consumption at ``perturb_time`` by ``param`` and rebalance
      the budget one date later so the path rejoins the original.

    Raises :class:`InfeasibleStrategyError` whenever a step would leave
    the feasible set.
    """
    if strategy not in CHALLENGER_STRATEGIES:
        raise ParameterError(f"strategy must be one of {CHALLENGER_STRATEGIES}")

    if strategy == "perturb-limit":
        if base_path is None:
            raise ParameterError("perturb-limit requires a base_path to perturb")
        if base_path.horizon < T_max:
            raise PathTooShortError("base_path must be defined through T_max")
        if not 0 <= perturb_time <= T_max - 2:
            raise ParameterError("perturb_time must leave room for the rebalancing date")
        k = base_path.k[: T_max + 1].copy()
        c = base_path.c[: T_max + 1].copy()
        ts = perturb_time
        c[ts] = c[ts] + param
        k[ts + 1] = float(spec.transition(ts, c[ts], k[ts]))
        c[ts + 1] = float(spec.invert_transition(ts + 1, k[ts + 1], base_path.k[ts + 2]))
        lo, hi = spec.state_domain(ts + 1)
        if not (lo < k[ts + 1] < hi) or c[ts] <= 0.0 or c[ts + 1] <= 0.0:
            raise InfeasibleStrategyError("perturbation leaves the feasible set")
        if not (spec.feasible(ts, c[ts], k[ts]) and spec.feasible(ts + 1, c[ts + 1], k[ts + 1])):
            raise InfeasibleStrategyError("perturbation leaves the feasible set")
        return Path(base_path.t[: T_max + 1], k, c, "challenger")

    k = np.empty(T_max + 1)
    c = np.empty(T_max + 1)
    k[0] = spec.initial_capital
    for t in range(T_max + 1):
        if strategy == "constant-saving":
            gross = float(spec.transition(t, 0.0, k[t]))
            k_next = param * gross
        else:  # greedy
            k_next = param
        c[t] = float(spec.invert_transition(t, k[t], k_next))
        if not spec.feasible(t, c[t], k[t]):
            raise InfeasibleStrategyError(f"strategy infeasible at date {t}")
        if t < T_max:
            lo, hi = spec.state_domain(t + 1)
            if not (lo < k_next < hi):
                raise InfeasibleStrategyError(
                    f"strategy leaves the state domain at date {t + 1} (capital {k_next})"
                )
            k[t + 1] = k_next
    return Path(np.arange(T_max + 1), k, c, "challenger")

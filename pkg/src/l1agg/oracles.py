"""Oracle coefficient vectors, sparsity-class memberships, and tail bounds.

Everything here is population-level: oracle vectors minimize the L2(mu)
approximation error at a fixed sparsity level, membership flags compare
that error against the tuning rate, and the tail-bound evaluators compute
the explicit exponential bounds that control the probability of the
good events

    E1          -- noise/dictionary correlations 2|V_j| <= omega_j,
    E2          -- empirical norms within a factor 2 of population norms,
    E3(lambda)  -- empirical approximation error controlled by its
                   population value plus r^2 M(lambda).

The membership threshold rho(lambda) M(lambda) <= 1/45 is applied as an
exact floating-point comparison against ``COHERENCE_THRESHOLD``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dictionary import (
    Dictionary,
    DesignMatrix,
    MeasureSpec,
    build_fourier,
    evaluate,
    population_gram,
    quadrature_grid,
    sup_norm_grid,
)
from .errors import ConfigError, NumericError, ShapeError
from .gram import coherence

COHERENCE_THRESHOLD = 1.0 / 45.0
EXHAUSTIVE_SUPPORT_CAP = 100_000


# ---------------------------------------------------------------------------
# Truth specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruthSpec:
    """The true regression function in a simulation.

    ``fourier`` truths are coefficient sequences against the trigonometric
    basis; ``linear`` truths are coordinate coefficients (exact
    representation); ``callable``/``tabulated`` cover arbitrary targets.
    Class tags are validated at construction: ``l0k`` requires exactly
    that many nonzero coefficients, ``ell1_budget`` bounds sum |theta_j|,
    ``sobolev`` is a (beta, Q) pair bounding sum j^(2 beta) theta_j^2.
    """

    kind: str
    theta: np.ndarray | None = None
    fn: Callable | None = None
    table: tuple = ()
    L_star: float = math.nan
    l0k: int | None = None
    ell1_budget: float | None = None
    sobolev: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("fourier", "linear", "callable", "tabulated"):
            raise ConfigError(f"unknown truth kind {self.kind!r}")
        if self.kind in ("fourier", "linear") and self.theta is None:
            raise ConfigError(f"{self.kind} truths need a coefficient vector")
        if self.theta is not None:
            nnz = int(np.count_nonzero(self.theta))
            if self.l0k is not None and nnz != self.l0k:
                raise ConfigError(
                    f"l0k tag {self.l0k} does not match {nnz} nonzero coefficients"
                )
            if self.ell1_budget is not None and np.abs(self.theta).sum() > self.ell1_budget:
                raise ConfigError("coefficients exceed the declared l1 budget")
            if self.sobolev is not None:
                beta, Q = self.sobolev
                j = np.arange(1, self.theta.size + 1, dtype=float)
                if float(np.sum(j ** (2 * beta) * self.theta**2)) > Q:
                    raise ConfigError("coefficients exceed the declared Sobolev budget")


def fourier_truth(theta, l0k=None, ell1_budget=None, sobolev=None) -> TruthSpec:
    """Truth f = sum_j theta_j f_j against the trigonometric basis."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.size < 1:
        raise ConfigError("theta must be a nonempty 1-d coefficient vector")
    # Linear interpolation on a dense grid lower-bounds the sup norm; the
    # crude coefficient bound sum sqrt(2)|theta_j| is an upper bound.
    dictionary = build_fourier(max(theta.size, 2))
    pts, _ = sup_norm_grid(dictionary)
    values = evaluate(dictionary, pts).entries[:, : theta.size] @ theta
    return TruthSpec(
        kind="fourier",
        theta=theta,
        L_star=float(np.max(np.abs(values))),
        l0k=l0k,
        ell1_budget=ell1_budget,
        sobolev=sobolev,
    )


def linear_truth(coeffs, domain=None) -> TruthSpec:
    """Exact-representation truth f(x) = sum_j coeffs_j x_j on a box."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.size < 1:
        raise ConfigError("coeffs must be a nonempty 1-d vector")
    box = np.asarray(domain if domain is not None else [[-1.0, 1.0]] * coeffs.size, float)
    hi = np.sum(np.maximum(coeffs * box[: coeffs.size, 0], coeffs * box[: coeffs.size, 1]))
    lo = np.sum(np.minimum(coeffs * box[: coeffs.size, 0], coeffs * box[: coeffs.size, 1]))
    return TruthSpec(kind="linear", theta=coeffs, L_star=float(max(abs(hi), abs(lo))))


def callable_truth(fn: Callable, L_star: float = math.nan) -> TruthSpec:
    """Arbitrary truth given as a function of an (n, d) point array."""
    return TruthSpec(kind="callable", fn=fn, L_star=L_star)


def tabulated_truth(grid, values) -> TruthSpec:
    """Truth tabulated on a 1-d grid, completed by linear interpolation."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.shape != values.shape or grid.ndim != 1 or grid.size < 2:
        raise ShapeError("tabulated truth needs matching 1-d grid and values")
    return TruthSpec(
        kind="tabulated", table=(grid, values), L_star=float(np.max(np.abs(values)))
    )


def evaluate_truth(truth: TruthSpec, points) -> np.ndarray:
    """Evaluate the true regression function at an (n, d) point array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if truth.kind == "fourier":
        theta = truth.theta
        dictionary = build_fourier(max(theta.size, 2))
        return evaluate(dictionary, pts).entries[:, : theta.size] @ theta
    if truth.kind == "linear":
        if pts.shape[1] < truth.theta.size:
            raise ShapeError("points have fewer coordinates than truth coefficients")
        return pts[:, : truth.theta.size] @ truth.theta
    if truth.kind == "callable":
        return np.asarray(truth.fn(pts), dtype=float)
    grid, values = truth.table
    return np.interp(pts[:, 0], grid, values)


# ---------------------------------------------------------------------------
# Sparsity and oracle vectors
# ---------------------------------------------------------------------------


def sparsity(lam, zero_tol: float = 0.0):
    """Support J(lambda) and its cardinality M(lambda).

    Entries with |lambda_j| <= zero_tol count as zero; the default treats
    only exact zeros as zero (coordinate descent produces exact zeros).
    """
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)):
        raise NumericError("coefficient vector contains non-finite entries")
    support = np.flatnonzero(np.abs(lam) > zero_tol)
    return support, int(support.size)


def oracle_fourier(truth: TruthSpec, M: int, k: int) -> np.ndarray:
    """Oracle for orthonormal dictionaries: keep the k largest |theta_j|.

    Ties are broken toward the smallest index. Coefficients beyond the
    truth's sequence are zero.
    """
    if truth.theta is None:
        raise ConfigError("oracle_fourier needs a coefficient-sequence truth")
    if k > M:
        raise ConfigError(f"oracle size k = {k} exceeds dictionary size M = {M}")
    if k < 0:
        raise ConfigError("oracle size k must be nonnegative")
    theta = np.zeros(M)
    m = min(truth.theta.size, M)
    theta[:m] = truth.theta[:m]
    lam = np.zeros(M)
    if k == 0:
        return lam
    order = np.argsort(-np.abs(theta), kind="stable")
    keep = order[:k]
    lam[keep] = theta[keep]
    return lam


def _population_projection(dictionary, measure, truth):
    """Quadrature approximations of Psi, g_j = <f_j, f>, and ||f||^2."""
    pts, w = quadrature_grid(dictionary, measure)
    phi = evaluate(dictionary, pts).entries
    f = evaluate_truth(truth, pts)
    psi = phi.T @ (phi * w[:, None])
    psi = 0.5 * (psi + psi.T)
    g = phi.T @ (w * f)
    f2 = float(w @ (f * f))
    return psi, g, f2


def _restricted_residual(psi, g, f2, support):
    idx = np.asarray(support, dtype=int)
    psi_s = psi[np.ix_(idx, idx)]
    g_s = g[idx]
    try:
        lam_s = np.linalg.solve(psi_s, g_s)
    except np.linalg.LinAlgError:
        warnings.warn(
            "restricted Gram is singular; using a pseudo-inverse solution",
            RuntimeWarning,
            stacklevel=3,
        )
        lam_s = np.linalg.pinv(psi_s) @ g_s
    residual2 = f2 - 2.0 * (g_s @ lam_s) + lam_s @ psi_s @ lam_s
    return lam_s, float(max(residual2, 0.0))


def oracle_general(
    dictionary: Dictionary, measure: MeasureSpec, truth: TruthSpec, k: int
):
    """Best k-sparse population approximation of the truth.

    Exhaustive search over supports when C(M, k) <= 1e5 (exact), greedy
    forward selection on the same objective otherwise. Returns
    ``(lambda, exact_flag)``.
    """
    M = dictionary.M
    if k > M:
        raise ConfigError(f"oracle size k = {k} exceeds dictionary size M = {M}")
    if k < 0:
        raise ConfigError("oracle size k must be nonnegative")
    lam = np.zeros(M)
    if k == 0:
        return lam, True
    psi, g, f2 = _population_projection(dictionary, measure, truth)

    if math.comb(M, k) <= EXHAUSTIVE_SUPPORT_CAP:
        best = None
        for support in itertools.combinations(range(M), k):
            lam_s, res2 = _restricted_residual(psi, g, f2, support)
            if best is None or res2 < best[0]:
                best = (res2, support, lam_s)
        _, support, lam_s = best
        lam[list(support)] = lam_s
        return lam, True

    chosen: list[int] = []
    for _ in range(k):
        best = None
        for j in range(M):
            if j in chosen:
                continue
            cand = chosen + [j]
            _, res2 = _restricted_residual(psi, g, f2, cand)
            if best is None or res2 < best[0]:
                best = (res2, j)
        chosen.append(best[1])
    chosen.sort()
    lam_s, _ = _restricted_residual(psi, g, f2, chosen)
    lam[chosen] = lam_s
    return lam, False


def population_dist2(
    dictionary: Dictionary, measure: MeasureSpec, truth: TruthSpec, lam
) -> float:
    """Squared L2(mu) distance ||f_lambda - f||^2.

    Orthonormality (fourier dictionary, uniform measure, coefficient truth)
    gives the exact closed form sum (lambda_j - theta_j)^2 plus the tail
    of theta beyond M; coordinate dictionaries with linear truths use the
    exact moment Gram. Everything else is quadrature.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (dictionary.M,):
        raise ShapeError(f"lambda must have shape ({dictionary.M},)")
    if (
        dictionary.kind == "fourier"
        and truth.kind == "fourier"
        and measure.kind == "uniform"
    ):
        theta = truth.theta
        m = min(theta.size, dictionary.M)
        diff = lam.copy()
        diff[:m] -= theta[:m]
        tail = float(theta[m:] @ theta[m:]) if theta.size > m else 0.0
        return float(diff @ diff) + tail
    if (
        dictionary.kind == "coordinate"
        and truth.kind == "linear"
        and measure.kind == "uniform"
        and truth.theta.size <= dictionary.M
    ):
        diff = lam.copy()
        diff[: truth.theta.size] -= truth.theta
        psi = population_gram(dictionary, measure)
        return float(max(diff @ psi @ diff, 0.0))
    pts, w = quadrature_grid(dictionary, measure)
    phi = evaluate(dictionary, pts).entries
    f = evaluate_truth(truth, pts)
    diff = phi @ lam - f
    return float(w @ (diff * diff))


def sup_norm_error(dictionary: Dictionary, truth: TruthSpec, lam) -> float:
    """Grid estimate of L(lambda) = ||f - f_lambda||_inf (a lower bound)."""
    pts, _ = sup_norm_grid(dictionary)
    values = evaluate(dictionary, pts).entries @ np.asarray(lam, dtype=float)
    f = evaluate_truth(truth, pts)
    return float(np.max(np.abs(values - f)))


# ---------------------------------------------------------------------------
# Membership and theorem right-hand sides
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipFlags:
    """Membership in the weak-sparsity / weak-approximation sets.

    ``in_oracle_set`` is the weak-sparsity set (squared error within
    C_f r^2 M(lambda)); ``in_weak_approx_set`` the weak-approximation set
    (within C'_f r); the ``coherent`` variants add
    rho(lambda) M(lambda) <= 1/45.
    """

    in_oracle_set: bool
    in_weak_approx_set: bool
    in_coherent_oracle_set: bool
    in_coherent_weak_approx_set: bool


def membership(
    dist2: float,
    m_lambda: int,
    rho_lambda: float,
    r_nM: float,
    C_f: float,
    C_f_prime: float,
) -> MembershipFlags:
    """Evaluate the four membership flags with exact threshold comparisons."""
    if not all(np.isfinite(v) for v in (dist2, m_lambda, rho_lambda, r_nM)):
        raise NumericError("membership inputs must be finite")
    if r_nM <= 0:
        raise ConfigError("membership needs r_nM > 0")
    in_oracle = dist2 <= C_f * r_nM * r_nM * m_lambda
    in_weak = dist2 <= C_f_prime * r_nM
    coherent = rho_lambda * m_lambda <= COHERENCE_THRESHOLD
    return MembershipFlags(
        in_oracle_set=bool(in_oracle),
        in_weak_approx_set=bool(in_weak),
        in_coherent_oracle_set=bool(in_oracle and coherent),
        in_coherent_weak_approx_set=bool(in_weak and coherent),
    )


@dataclass(frozen=True)
class BoundConstants:
    """User-supplied or empirically fitted constants of the risk bounds.

    None of these have sharp known values; defaults of 1 give bound
    *shapes* whose scaling can be checked even though levels cannot.
    ``b`` is the noise moment bound E exp|W|.
    """

    B1: float = 1.0
    B2: float = 1.0
    C: float = 1.0
    C_prime: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c1_prime: float = 1.0
    c2_prime: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("B1", "B2", "C", "C_prime", "c1", "c2", "c1_prime", "c2_prime", "b"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"bound constant {name} must be positive")


THEOREM_KINDS = ("t21_risk", "t21_l1", "t22_risk", "t22_l1", "t23")


def theorem_rhs(
    kind: str,
    constants: BoundConstants,
    r_nM: float,
    m_lambda: int,
    kappa_M: float | None = None,
    dist2: float | None = None,
) -> float:
    """Evaluate a risk-bound right-hand side literally.

    t21_*: B kappa_M^-1 r^2 M(lambda) (risk) / B kappa_M^-1 r M(lambda) (l1);
    t22_*: the same shapes with kappa_M = 1 and constant C;
    t23:   C' (dist2 + r^2 M(lambda)).
    """
    if kind not in THEOREM_KINDS:
        raise ConfigError(f"unknown theorem kind {kind!r}; expected one of {THEOREM_KINDS}")
    if r_nM <= 0 or m_lambda < 0:
        raise ConfigError("theorem_rhs needs r_nM > 0 and M(lambda) >= 0")
    if kind in ("t21_risk", "t21_l1"):
        if kappa_M is None or not (0 < kappa_M <= 1):
            raise ConfigError("t21 bounds need kappa_M in (0, 1]")
        scale = constants.B1 if kind == "t21_risk" else constants.B2
        power = 2 if kind == "t21_risk" else 1
        return scale / kappa_M * r_nM**power * m_lambda
    if kind in ("t22_risk", "t22_l1"):
        power = 2 if kind == "t22_risk" else 1
        return constants.C * r_nM**power * m_lambda
    if dist2 is None or dist2 < 0:
        raise ConfigError("t23 needs a nonnegative dist2")
    return constants.C_prime * (dist2 + r_nM**2 * m_lambda)


# ---------------------------------------------------------------------------
# Tail bounds
# ---------------------------------------------------------------------------


def bernstein_bound(n: int, epsilon: float, w2: float, d: float) -> float:
    """Generic Bernstein tail exp(-n eps^2 / (2 (w^2 + d eps))), in [0, 1]."""
    if n < 0 or epsilon < 0 or w2 < 0 or d < 0:
        raise ConfigError("bernstein_bound needs nonnegative arguments")
    if n == 0 or epsilon == 0.0:
        return 1.0
    denom = 2.0 * (w2 + d * epsilon)
    if denom == 0.0:
        return 0.0
    return float(min(1.0, math.exp(-n * epsilon * epsilon / denom)))


LEMMA_KINDS = ("L4", "L5", "L6", "L7", "L9")


def _require(which, **params):
    for name, value in params.items():
        if value is None:
            raise ConfigError(f"lemma {which} needs parameter {name}")
        if value < 0 or not np.isfinite(value):
            raise ConfigError(f"lemma {which} needs finite nonnegative {name}, got {value}")
    return params


def lemma_bounds(
    which: str,
    n: int,
    M: int | None = None,
    r_nM: float | None = None,
    c0: float | None = None,
    L: float | None = None,
    L0: float | None = None,
    b: float | None = None,
    C_f: float | None = None,
    kappa_M: float | None = None,
    m_lambda: int | None = None,
    L_lambda: float | None = None,
) -> float:
    """Explicit tail-probability bound for one of the good events.

    L4 bounds P(E2^c); L5 bounds P((E1 n E2)^c); L6 bounds P(E3(lambda)^c);
    L7 and L9 bound the empirical-norm distortion events entering the
    weak-sparsity and weak-approximation results. All outputs are clamped
    to [0, 1]. L6 returns 0 in the exact-representation case
    L(lambda) = 0, where the event holds surely.
    """
    if which not in LEMMA_KINDS:
        raise ConfigError(f"unknown lemma {which!r}; expected one of {LEMMA_KINDS}")
    if n < 1:
        raise ConfigError("lemma bounds need n >= 1")

    if which == "L4":
        _require(which, M=M, c0=c0, L=L)
        if c0 <= 0 or L <= 0:
            raise ConfigError("L4 needs positive c0 and L")
        value = 2.0 * M * math.exp(-n * c0 * c0 / (12.0 * L * L))
    elif which == "L5":
        _require(which, M=M, r_nM=r_nM, b=b, c0=c0, L=L)
        if min(r_nM, b, c0, L) <= 0:
            raise ConfigError("L5 needs positive r_nM, b, c0, L")
        value = (
            2.0 * M * math.exp(-n * r_nM * r_nM / (16.0 * b))
            + 2.0 * M * math.exp(-n * r_nM * c0 / (8.0 * math.sqrt(2.0) * L))
            + 2.0 * M * math.exp(-n * c0 * c0 / (12.0 * L * L))
        )
    elif which == "L6":
        _require(which, r_nM=r_nM, m_lambda=m_lambda, L_lambda=L_lambda)
        if r_nM <= 0:
            raise ConfigError("L6 needs positive r_nM")
        if L_lambda == 0.0:
            return 0.0
        value = math.exp(-m_lambda * n * r_nM * r_nM / (4.0 * L_lambda * L_lambda))
    elif which == "L7":
        _require(which, M=M, m_lambda=m_lambda, c0=c0, L=L, L0=L0, kappa_M=kappa_M, C_f=C_f)
        if min(c0, L, L0, kappa_M) <= 0 or m_lambda < 1:
            raise ConfigError("L7 needs positive c0, L, L0, kappa_M and m_lambda >= 1")
        big_c = 2.0 / (c0 * c0) * (2.0 * C_f + 1.0 + 4.0 * math.sqrt(2.0 / kappa_M)) ** 2
        value = 2.0 * M * M * (
            math.exp(-n / (16.0 * L0 * big_c * big_c * m_lambda * m_lambda))
            + math.exp(-n / (8.0 * L * L * big_c * m_lambda))
        )
    else:  # L9
        _require(which, M=M, r_nM=r_nM, c0=c0, L=L, L0=L0)
        if min(r_nM, c0, L, L0) <= 0:
            raise ConfigError("L9 needs positive r_nM, c0, L, L0")
        big_c = 8.0 * 11.0**2 / (c0 * c0)
        value = 2.0 * M * M * (
            math.exp(-n * r_nM * r_nM / (16.0 * big_c * big_c * L0))
            + math.exp(-n * r_nM / (8.0 * L * L * big_c))
        )
    return float(min(1.0, max(0.0, value)))


# ---------------------------------------------------------------------------
# Good-event indicators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventFlags:
    e1: bool
    e2: bool
    e3: bool


def event_flags(
    design: DesignMatrix,
    noise: np.ndarray,
    weights: np.ndarray,
    pop_norms_sq: np.ndarray,
    approx_error_at_design: np.ndarray,
    dist2: float,
    r_nM: float,
    m_lambda: int,
) -> EventFlags:
    """Indicators of the good events for one simulated replicate.

    ``approx_error_at_design`` holds (f_lambda - f)(X_i); ``dist2`` is the
    population squared error of the same reference lambda.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (design.n,):
        raise ShapeError("noise vector must match the design row count")
    v = design.entries.T @ noise / design.n
    e1 = bool(np.all(2.0 * np.abs(v) <= weights))
    norms_sq = np.mean(design.entries**2, axis=0)
    e2 = bool(
        np.all(norms_sq >= 0.5 * pop_norms_sq) and np.all(norms_sq <= 2.0 * pop_norms_sq)
    )
    emp_err = float(np.mean(np.asarray(approx_error_at_design, dtype=float) ** 2))
    e3 = bool(emp_err <= 2.0 * dist2 + r_nM * r_nM * m_lambda)
    return EventFlags(e1=e1, e2=e2, e3=e3)


def event_frequencies(flags) -> tuple[float, float, float]:
    """Monte Carlo frequencies of E1, E2, E3 over a collection of flags."""
    flags = list(flags)
    if not flags:
        raise ConfigError("cannot aggregate an empty collection of event flags")
    return (
        float(np.mean([f.e1 for f in flags])),
        float(np.mean([f.e2 for f in flags])),
        float(np.mean([f.e3 for f in flags])),
    )


# ---------------------------------------------------------------------------
# Oracle report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    """Oracle vector, effective dimension, and membership flags.

    ``k_star`` is None when no sparsity level up to ``k_max`` satisfies the
    weak-sparsity inequality (the oracle set is empty); the remaining
    fields are then NaN/None. ``exact`` records whether the oracle search
    was exhaustive.
    """

    lambda_star: np.ndarray | None
    k_star: int | None
    dist2: float
    L_lambda: float
    C_f: float
    C_f_prime: float
    memberships: MembershipFlags | None
    exact: bool
    sup_grid_points: int


def _oracle_at_k(dictionary, measure, truth, k):
    if (
        dictionary.kind == "fourier"
        and truth.kind == "fourier"
        and measure.kind == "uniform"
    ):
        return oracle_fourier(truth, dictionary.M, k), True
    return oracle_general(dictionary, measure, truth, k)


def oracle_report(
    dictionary: Dictionary,
    measure: MeasureSpec,
    truth: TruthSpec,
    r_nM: float,
    C_f: float = 1.0,
    C_f_prime: float = 1.0,
    k_max: int | None = None,
) -> OracleReport:
    """Scan k = 0, 1, ... for the effective dimension and build the report.

    k_star is the smallest k whose best k-sparse approximation satisfies
    ||f_lambda - f||^2 <= C_f r^2 k.
    """
    if r_nM <= 0:
        raise ConfigError("oracle_report needs r_nM > 0")
    k_max = dictionary.M if k_max is None else min(int(k_max), dictionary.M)
    psi = population_gram(dictionary, measure)
    _, grid_points = sup_norm_grid(dictionary)

    for k in range(k_max + 1):
        lam, exact = _oracle_at_k(dictionary, measure, truth, k)
        dist2 = population_dist2(dictionary, measure, truth, lam)
        support, m_lambda = sparsity(lam)
        if dist2 <= C_f * r_nM * r_nM * m_lambda:
            _, rho_lambda = coherence(psi, support)
            return OracleReport(
                lambda_star=lam,
                k_star=m_lambda,
                dist2=dist2,
                L_lambda=sup_norm_error(dictionary, truth, lam),
                C_f=C_f,
                C_f_prime=C_f_prime,
                memberships=membership(dist2, m_lambda, rho_lambda, r_nM, C_f, C_f_prime),
                exact=exact,
                sup_grid_points=grid_points,
            )
    return OracleReport(
        lambda_star=None,
        k_star=None,
        dist2=math.nan,
        L_lambda=math.nan,
        C_f=C_f,
        C_f_prime=C_f_prime,
        memberships=None,
        exact=True,
        sup_grid_points=grid_points,
    )

"""Scalar quadratures for lambda**(-beta).

All three rules approximate

    lambda**(-beta) = C_beta**(-1) * int_0^inf t**(2 beta - 1) / (1 + t**2 lambda) dt,

with ``C_beta = pi / (2 sin(pi beta))``. Every rule is stored in the same
normalized form: two families of positive nodes in (0, 1] with positive
weights, evaluated as

    Q(lambda) = C_beta**(-1) * ( sum_j w1_j / (1 + lambda t1_j**2)
                               + sum_j w2_j / (t2_j**2 + lambda) ).

The first family discretizes ``int_0^1 t**(2b-1) (1 + t^2 lambda)^-1`` and
the second ``int_0^1 t**(1-2b) (t^2 + lambda)^-1``. For the sinc-type rule
in ``y = ln t`` the nodes with ``y > 0`` are folded onto the second family
(``t -> 1/t``), which is algebraically identical and never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import kernels

BETA_MIN = 1e-3

# Extra dyadic levels per integral, ceil(TABLE_EXTRA_BITS / exponent), on top of
# ceil(r log2 N / exponent). Without them the dropped piece [0, 2**-M] dominates
# the error; any value in (2, 2.25) gives the same counts.
TABLE_EXTRA_BITS = 2.125

RECTANGLE = "rectangle"
GAUSS = "gauss"
EXPONENTIAL = "exponential"


class QuadratureError(ValueError):
    """Raised when a quadrature rule cannot be built reliably."""


def check_beta(beta, strict=False):
    """Validate a fractional exponent and return it as a float.

    With ``strict`` the exponent must lie in ``[BETA_MIN, 1 - BETA_MIN]``;
    the error bounds degrade like ``1/beta`` and ``1/(1-beta)`` near the ends.
    """
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if strict and not (BETA_MIN <= beta <= 1.0 - BETA_MIN):
        raise ValueError(f"beta={beta} too close to 0 or 1 (allowed [{BETA_MIN}, {1 - BETA_MIN}])")
    return beta


def c_beta(beta):
    """Normalization ``int_0^inf t^(2b-1) / (1 + t^2) dt = pi / (2 sin(pi b))``."""
    beta = check_beta(beta)
    return math.pi / (2.0 * math.sin(math.pi * beta))


def mesh_ratio_bound(theta):
    """Upper bound on consecutive interval ratios of ``t_i = (i/N)**theta``."""
    theta = float(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    return 2.0**theta - 1.0 if theta > 1.0 else 1.0


def _ceil(x):
    # guards against 4.000000000001 style round-off in ratios that are exact
    return math.ceil(x - 1e-9)


# ---------------------------------------------------------------------------
# partitions and weighted Gauss rules


@dataclass(frozen=True)
class GradedPartition:
    theta: float
    N: int
    nodes: np.ndarray

    def ratios(self):
        h = np.diff(self.nodes)
        return h[1:] / h[:-1]


def graded_nodes(N, theta):
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    if theta <= 0:
        raise ValueError("theta must be positive")
    nodes = (np.arange(N + 1) / N) ** float(theta)
    nodes[0], nodes[-1] = 0.0, 1.0
    return GradedPartition(float(theta), N, nodes)


def weighted_moment(a, b, gamma, k=0):
    """Closed form of ``int_a^b t**(gamma + k) dt`` for ``0 <= a < b``.

    Uses ``expm1``/``log1p`` so short intervals keep full relative accuracy.
    """
    p = gamma + k + 1.0
    if p <= 0:
        raise ValueError("moment diverges")
    if b >= 2.0 * a:
        # no cancellation to protect against
        return (b**p - a**p) / p
    return a**p * math.expm1(p * math.log1p((b - a) / a)) / p


@dataclass(frozen=True)
class WeightedGaussRule:
    a: float
    b: float
    gamma: float
    r: int
    nodes: np.ndarray
    weights: np.ndarray


_BASE_POINTS = 32


def _recurrence_from_discrete(t, w, r, center, half):
    """Stieltjes procedure on a discrete measure, in the local variable."""
    s = (t - center) / half
    alpha = np.zeros(r)
    beta = np.zeros(r)
    p_prev = np.zeros_like(s)
    p_cur = np.ones_like(s)
    norm = w.sum()
    for k in range(r):
        alpha[k] = (w * s * p_cur**2).sum() / norm
        if k == r - 1:
            break
        p_next = (s - alpha[k]) * p_cur - (beta[k] if k else 0.0) * p_prev
        norm_next = (w * p_next**2).sum()
        beta[k + 1] = norm_next / norm
        norm = norm_next
        p_prev, p_cur = p_cur, p_next
    return alpha, beta


def weighted_gauss_rule(a, b, gamma, r):
    """r-point Gauss rule for the weight ``t**gamma`` on ``[a, b]``.

    For ``a == 0`` the rule is a scaled Gauss-Jacobi rule. For ``a > 0`` the
    weight is smooth on the interval; the three-term recurrence is obtained by
    the discretized Stieltjes procedure on a composite Gauss-Legendre
    discretization (geometric pieces, so large ``b/a`` stays resolved), and
    nodes/weights follow from the Jacobi matrix (Golub-Welsch). The weights
    are rescaled to the closed-form zeroth moment.
    """
    a, b, gamma, r = float(a), float(b), float(gamma), int(r)
    if r < 1:
        raise ValueError("r must be a positive integer")
    if not (0.0 <= a < b):
        raise ValueError("need 0 <= a < b")
    if gamma <= -1.0:
        raise ValueError("gamma must exceed -1")
    m0 = weighted_moment(a, b, gamma, 0)
    if r == 1:
        node = np.array([weighted_moment(a, b, gamma, 1) / m0])
        return WeightedGaussRule(a, b, gamma, 1, node, np.array([m0]))
    if a == 0.0:
        x, w = roots_jacobi(r, 0.0, gamma)
        nodes = b * (x + 1.0) / 2.0
        weights = w * (b / 2.0) ** (gamma + 1.0)
        weights *= m0 / weights.sum()
        return WeightedGaussRule(a, b, gamma, r, nodes, weights)

    edges = [a]
    while edges[-1] * 2.0 < b:
        edges.append(edges[-1] * 2.0)
    edges.append(b)
    x, wx = roots_legendre(max(_BASE_POINTS, 4 * r))
    ts, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        ts.append(t)
        ws.append(0.5 * (hi - lo) * wx * t**gamma)
    t = np.concatenate(ts)
    w = np.concatenate(ws)
    center, half = 0.5 * (a + b), 0.5 * (b - a)
    alpha, beta = _recurrence_from_discrete(t, w, r, center, half)
    if not np.all(beta[1:] > 0) or not np.all(np.isfinite(alpha)):
        raise QuadratureError(f"recurrence breakdown for [{a}, {b}], gamma={gamma}, r={r}")
    off = np.sqrt(beta[1:])
    J = np.diag(alpha) + np.diag(off, 1) + np.diag(off, -1)
    ev, V = np.linalg.eigh(J)
    nodes = center + half * ev
    weights = m0 * V[0] ** 2
    if np.any(nodes <= a) or np.any(nodes >= b) or np.any(weights <= 0):
        raise QuadratureError(f"ill-conditioned Gauss rule on [{a}, {b}], gamma={gamma}, r={r}")
    return WeightedGaussRule(a, b, gamma, r, nodes, weights)


# ---------------------------------------------------------------------------
# schemes


@dataclass(frozen=True)
class QuadratureScheme:
    kind: str
    beta: float
    t1_nodes: np.ndarray
    t1_weights: np.ndarray
    t2_nodes: np.ndarray
    t2_weights: np.ndarray
    params: dict = field(default_factory=dict)
    exp_nodes: np.ndarray | None = None

    @property
    def nsys(self):
        return int(self.t1_nodes.size + self.t2_nodes.size)

    @cached_property
    def _resolvent_form(self):
        # w / (shift + scale * lambda), family 1 first, then family 2
        w = np.concatenate([self.t1_weights, self.t2_weights])
        shift = np.concatenate([np.ones_like(self.t1_nodes), self.t2_nodes**2])
        scale = np.concatenate([self.t1_nodes**2, np.ones_like(self.t2_nodes)])
        return w, shift, scale

    def summary(self):
        items = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}(beta={self.beta:g}, {items}, nsys={self.nsys})"


def rectangle_scheme(beta, N):
    """One-point rule on graded partitions, one per family.

    The first family is graded with exponent ``1/(2 beta)`` when
    ``beta < 1/2`` and uniform otherwise; the second family is graded with
    ``1/(2 - 2 beta)`` when ``beta > 1/2``. Each cell uses the one-point
    weighted Gauss node (weighted centroid).
    """
    beta = check_beta(beta, strict=True)
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    g1, g2 = 2.0 * beta - 1.0, 1.0 - 2.0 * beta
    theta1 = 1.0 / (2.0 * beta) if g1 < 0 else 1.0
    theta2 = 1.0 / (2.0 - 2.0 * beta) if g2 < 0 else 1.0
    fam = []
    for theta, g in ((theta1, g1), (theta2, g2)):
        t = graded_nodes(N, theta).nodes
        nodes = np.empty(N)
        weights = np.empty(N)
        for i in range(N):
            rule = weighted_gauss_rule(t[i], t[i + 1], g, 1)
            nodes[i] = rule.nodes[0]
            weights[i] = rule.weights[0]
        fam.append((nodes, weights))
    params = {
        "N": N,
        "theta1": theta1,
        "theta2": theta2,
        "cases": ("i" if g1 < 0 else "ii") + "-" + ("iii" if g2 < 0 else "iv"),
    }
    return QuadratureScheme(RECTANGLE, beta, fam[0][0], fam[0][1], fam[1][0], fam[1][1], params)


def dyadic_levels(beta, N, r, m_choice="per-integral", extra_bits=TABLE_EXTRA_BITS):
    """Number of dyadic intervals ``(M1, M2)`` for the two families."""
    if N < 2:
        raise ValueError("dyadic Gauss rule needs N >= 2")
    lg = r * math.log2(N)
    if m_choice == "combined":
        e = min(beta, 1.0 - beta)
        m = _ceil(lg / e) + (_ceil(extra_bits / e) if extra_bits > 0 else 0)
        return m, m
    if m_choice == "per-integral":
        m1 = _ceil(lg / beta) + (_ceil(extra_bits / beta) if extra_bits > 0 else 0)
        m2 = _ceil(lg / (1.0 - beta)) + (_ceil(extra_bits / (1.0 - beta)) if extra_bits > 0 else 0)
        return m1, m2
    raise ValueError(f"unknown m_choice {m_choice!r}")


def dyadic_gauss_scheme(beta, N, r=2, m_choice="per-integral", extra_bits=TABLE_EXTRA_BITS):
    """r-point weighted Gauss rules on a dyadic partition of (2**-M, 1].

    Interval ``[2**-i, 2**(1-i)]`` is cut into ``N`` equal pieces and each
    piece carries an r-point rule for the family weight. ``[0, 2**-M]`` is
    dropped. ``extra_bits`` adds ``ceil(extra_bits / exponent)`` levels per
    family on top of the base count; ``extra_bits=0`` gives the bare count
    ``ceil(r log2(N) / exponent)``.
    """
    beta = check_beta(beta, strict=True)
    N, r = int(N), int(r)
    if r < 1:
        raise ValueError("r must be a positive integer")
    m1, m2 = dyadic_levels(beta, N, r, m_choice, extra_bits)
    fam = []
    for M, g in ((m1, 2.0 * beta - 1.0), (m2, 1.0 - 2.0 * beta)):
        # rules on [1 + j/N, 1 + (j+1)/N], rescaled to each dyadic level
        base = [weighted_gauss_rule(1.0 + j / N, 1.0 + (j + 1) / N, g, r) for j in range(N)]
        bn = np.concatenate([q.nodes for q in base])
        bw = np.concatenate([q.weights for q in base])
        nodes, weights = [], []
        for i in range(1, M + 1):
            s = 2.0**-i
            nodes.append(bn * s)
            weights.append(bw * s ** (g + 1.0))
        fam.append((np.concatenate(nodes), np.concatenate(weights)))
    params = {"N": N, "r": r, "M1": m1, "M2": m2, "m_choice": m_choice, "extra_bits": extra_bits}
    return QuadratureScheme(GAUSS, beta, fam[0][0], fam[0][1], fam[1][0], fam[1][1], params)


def exponential_counts(beta, k):
    """Equalized counts ``(M, N)`` balancing the three exponential error terms."""
    M = _ceil(math.pi**2 / (4.0 * beta * k * k))
    N = _ceil(math.pi**2 / (4.0 * (1.0 - beta) * k * k))
    return M, N


def exponential_scheme(beta, k, equalize=True):
    """Trapezoidal rule in ``y = ln t`` with nodes ``y_l = l k``.

    With ``equalize`` the index runs over ``-M..N`` with the counts of
    :func:`exponential_counts`; otherwise it is symmetric, ``-N..N`` with
    ``N = ceil(k**-2)`` (so ``k = 1/sqrt(N)`` when ``k**-2`` is an integer).
    """
    beta = check_beta(beta, strict=True)
    k = float(k)
    if not k > 0:
        raise ValueError("k must be positive")
    if equalize:
        M, N = exponential_counts(beta, k)
    else:
        N = _ceil(k**-2)
        M = N
    ell = np.arange(-M, N + 1)
    y = ell * k
    left = y <= 0
    yl, yr = y[left], y[~left]
    t1 = np.exp(yl)
    w1 = k * np.exp(2.0 * beta * yl)
    # y > 0 folded onto the second family: t = exp(-y)
    t2 = np.exp(-yr)
    w2 = k * np.exp((2.0 * beta - 2.0) * yr)
    params = {"k": k, "M": M, "N": N, "equalize": bool(equalize)}
    return QuadratureScheme(EXPONENTIAL, beta, t1, w1, t2, w2, params, exp_nodes=y)


def make_scheme(kind, beta, *, N=None, r=2, k=None, m_choice="per-integral",
                extra_bits=TABLE_EXTRA_BITS, equalize=True):
    """Build a scheme by short name: rect, gauss or exp."""
    if kind in ("rect", RECTANGLE):
        return rectangle_scheme(beta, N)
    if kind in ("gauss", GAUSS):
        return dyadic_gauss_scheme(beta, N, r, m_choice, extra_bits)
    if kind in ("exp", EXPONENTIAL):
        return exponential_scheme(beta, k, equalize)
    raise ValueError(f"unknown scheme kind {kind!r}")


# ---------------------------------------------------------------------------
# evaluation and errors


def _check_lambda(lam):
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(~(lam > 0)):
        raise ValueError("lambda must be positive")
    return lam


def eval_scheme(scheme, lam):
    """Quadrature approximation of ``lam**(-beta)`` (scalar or array)."""
    lam = _check_lambda(lam)
    w, shift, scale = scheme._resolvent_form
    out = kernels.resolvent_sum(w, shift, scale, lam.ravel()) / c_beta(scheme.beta)
    return out.reshape(lam.shape) if lam.ndim else float(out[0])


def scalar_error(scheme, lam, normalization="power"):
    """Quadrature error at ``lam``.

    ``normalization="power"`` gives ``|lam**-beta - Q(lam)|``; ``"integral"``
    gives the error of the unnormalized integral, i.e. ``C_beta`` times that.
    """
    lam = _check_lambda(lam)
    err = np.abs(lam ** (-scheme.beta) - eval_scheme(scheme, lam))
    if normalization == "integral":
        err = err * c_beta(scheme.beta)
    elif normalization != "power":
        raise ValueError(f"unknown normalization {normalization!r}")
    return err


def bound_normalization(scheme):
    """Normalization in which :func:`theoretical_bound` is stated."""
    return "power" if scheme.kind == EXPONENTIAL else "integral"


@dataclass(frozen=True)
class SupErrorReport:
    sup_error: float
    argmax_lambda: float
    lambdas_scanned: int
    scheme: str
    grid: np.ndarray = field(repr=False)
    grid_errors: np.ndarray = field(repr=False)


SCAN_POINTS_PER_DECADE = 20
SCAN_MIN_TOP = 1e8
SCAN_PATIENCE = 40
SCAN_HARD_TOP = 1e40
REFINE_LEVELS = 3
REFINE_POINTS = 21


def sup_error(scheme, lambda0=10.0, normalization="power"):
    """Approximate ``sup_{lam >= lambda0} |error(lam)|``.

    Geometric scan ``lambda0 * mu**i`` with 20 points per decade, continued
    past 1e8 until the running maximum has not improved for 40 points, then
    three levels of 21-point log-uniform refinement around the best point,
    each level 10x narrower.
    """
    lambda0 = float(lambda0)
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    step = math.log(10.0) / SCAN_POINTS_PER_DECADE
    grid, errs = [], []
    best, ibest, i = -1.0, 0, 0
    while True:
        idx = np.arange(i, i + SCAN_POINTS_PER_DECADE)
        lam = lambda0 * np.exp(idx * step)
        e = scalar_error(scheme, lam, normalization)
        grid.append(lam)
        errs.append(e)
        for j in range(e.size):
            if e[j] > best:
                best, ibest = float(e[j]), i + j
        i += SCAN_POINTS_PER_DECADE
        top = lam[-1]
        if (top >= SCAN_MIN_TOP and i - 1 - ibest >= SCAN_PATIENCE) or top >= SCAN_HARD_TOP:
            break
    grid = np.concatenate(grid)
    errs = np.concatenate(errs)

    x_best = math.log(grid[ibest])
    x_lo = math.log(lambda0)
    arg = grid[ibest]
    width = step
    for _ in range(REFINE_LEVELS):
        xs = np.linspace(max(x_best - width, x_lo), x_best + width, REFINE_POINTS)
        lam = np.exp(xs)
        e = scalar_error(scheme, lam, normalization)
        j = int(np.argmax(e))
        if e[j] > best:
            best, arg = float(e[j]), float(lam[j])
        x_best = math.log(arg)
        width /= 10.0
    return SupErrorReport(best, float(arg), int(grid.size), scheme.summary(), grid, errs)


# ---------------------------------------------------------------------------
# error bounds


def _rectangle_constants(scheme):
    beta = scheme.beta
    A = 2.0 * beta if 2.0 * beta - 1.0 < 0 else 1.0
    B = 2.0 - 2.0 * beta if 1.0 - 2.0 * beta < 0 else 1.0
    return A, B


def _rectangle_bound(scheme, lambda0):
    A, B = _rectangle_constants(scheme)
    N = scheme.params["N"]
    first = (2.0 + mesh_ratio_bound(1.0 / A) * math.pi) / (N * A)
    second = (2.0 + mesh_ratio_bound(1.0 / B) * math.pi) / (lambda0 * N * B)
    return first + second


def _gauss_bound(scheme, lambda0):
    beta = scheme.beta
    N, r = scheme.params["N"], scheme.params["r"]
    return (1.0 / (2.0 * beta) + 1.0 / (2.0 * (1.0 - beta) * lambda0)) * float(N) ** (-2 * r)


def _exponential_bound(scheme, lambda0):
    beta = scheme.beta
    k, M, N = scheme.params["k"], scheme.params["M"], scheme.params["N"]
    a = math.pi**2 / (4.0 * k)
    strip = 1.0 / beta + 1.0 / ((1.0 - beta) * lambda0)
    # exp(-a) / (2 sinh a) written to stay finite for small k
    sinc_term = strip * math.exp(-2.0 * a) / (1.0 - math.exp(-2.0 * a))
    left = math.exp(-2.0 * beta * k * M) / (2.0 * beta)
    right = math.exp(-(2.0 - 2.0 * beta) * k * N) / ((2.0 - 2.0 * beta) * lambda0)
    return 2.0 * math.sin(math.pi * beta) / math.pi * (sinc_term + left + right)


def theoretical_bound(scheme, lambda0):
    """Closed-form error bound valid for all ``lam >= lambda0``.

    Rectangle and Gauss bounds are for the unnormalized integral error
    (``normalization="integral"``); the exponential bound is for
    ``|lam**-beta - Q(lam)|``. The Gauss bound omits its rule-dependent
    constant (taken as 1), so it only fixes the ``N**(-2r)`` rate.
    """
    lambda0 = float(lambda0)
    if not lambda0 > 0:
        raise ValueError("lambda0 must be positive")
    if scheme.kind == RECTANGLE:
        return _rectangle_bound(scheme, lambda0)
    if scheme.kind == GAUSS:
        return _gauss_bound(scheme, lambda0)
    return _exponential_bound(scheme, lambda0)


def bound_is_rigorous(scheme):
    return scheme.kind != GAUSS


def operator_bound(scheme, mu_max):
    """Bound on ``||T_h^beta - Q_h^beta||`` given the largest eigenvalue of T_h.

    ``mu_max = 1 / lambda_min`` of the discrete operator. Gauss: up to the
    implicit rule constant, see :func:`theoretical_bound`.
    """
    mu_max = float(mu_max)
    if not mu_max > 0:
        raise ValueError("mu_max must be positive")
    b = theoretical_bound(scheme, 1.0 / mu_max)
    if bound_normalization(scheme) == "integral":
        b /= c_beta(scheme.beta)
    return b

"""The Fouvry-Mauduit constant lambda.

phi_0 = 1 and
phi_{j+1}(a) = 1/2 (|sin(pi a/2)| phi_j(a/2) + |cos(pi a/2)| phi_j((a+1)/2)).
With q_j = phi_j / phi_{j-1}, m_k = min q_k and M_k = max q_k over [0, 1]
bracket lambda, the decay rate of int_0^1 prod_{l<L} |sin(pi 2^l a)| da.

A grid of q_k values plus a certified bound on |q_k'| gives a rigorous
(up to double rounding) enclosure.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConfigError, SizeError, ToleranceError

MAX_DEPTH = 16
PAPER_LIPSCHITZ = {6: 56.4}
TIERS = {"paper": 1_400_001, "ci": 100_001}
LAMBDA_Q15 = 0.661322602
FO_INTERVAL = (0.654336, 0.663197)
_GL16 = np.polynomial.legendre.leggauss(16)


def _check_depth(j, lo=0):
    if j < lo:
        raise ConfigError(f"depth must be >= {lo}")
    if j > MAX_DEPTH:
        raise SizeError(f"depth {j} > {MAX_DEPTH}: the argument tree has 2^j leaves")


def phi(j, alpha):
    """phi_j at alpha (scalar or array), evaluated bottom-up over the 2^j tree."""
    _check_depth(j)
    scalar = np.ndim(alpha) == 0
    out = kernels.phi_values(j, alpha)
    return float(out[0]) if scalar else out


class PhiEvaluator:
    """phi_j with a running count of evaluations (leaf terms = count * 2^j)."""

    def __init__(self, j):
        _check_depth(j)
        self.j = j
        self.evaluations = 0

    def __call__(self, alpha):
        self.evaluations += int(np.size(alpha))
        return phi(self.j, alpha)

    @property
    def leaf_terms(self):
        return self.evaluations << self.j


def q_ratio(j, alpha):
    """q_j = phi_j / phi_(j-1)."""
    _check_depth(j, 1)
    scalar = np.ndim(alpha) == 0
    out = kernels.q_values(j, alpha)
    return float(out[0]) if scalar else out


def derivative_bound(j):
    """max |phi_j'| <= pi (1 - 2^-j).

    Differentiating the 2^j-term expansion, the factor at tree level i
    contributes at most pi 2^-i times the sum of the remaining weights, which
    sums to pi (1/2 + ... + 2^-j).
    """
    return math.pi * (1.0 - 2.0**-j)


def lipschitz_bound(k):
    """Certified bound on |q_k'| over [0, 1].

    |q_k'| <= max|phi_k'| / phi_(k-1)(0) + phi_k(1/2) max|phi_(k-1)'| / phi_(k-1)(0)^2,
    using that phi_j is symmetric and concave, so its minimum sits at 0 and
    its maximum at 1/2. A relative margin of 1e-12 covers the double rounding
    of the phi values.
    """
    _check_depth(k, 1)
    lo = phi(k - 1, 0.0)
    hi = phi(k, 0.5)
    b = derivative_bound(k) / lo + hi * derivative_bound(k - 1) / lo**2
    return b * (1.0 + 1e-12)


@dataclass(frozen=True)
class Enclosure:
    k: int
    grid_points: int
    step: float
    grid_min: float
    grid_max: float
    argmin: float
    argmax: float
    lipschitz: float
    lipschitz_source: str
    lower: float
    upper: float
    elapsed: float
    backend: str

    @property
    def width(self):
        return self.upper - self.lower

    def to_dict(self):
        return asdict(self)


def _resolve_lipschitz(k, lipschitz):
    if lipschitz is None or lipschitz == "certified":
        return lipschitz_bound(k), "certified"
    if lipschitz == "paper":
        if k not in PAPER_LIPSCHITZ:
            raise ConfigError(f"no reference Lipschitz constant for k={k}")
        return PAPER_LIPSCHITZ[k], "paper"
    value = float(lipschitz)
    if not value > 0:
        raise ConfigError("lipschitz must be positive")
    return value, "user"


def enclose_lambda(k, grid=TIERS["ci"], lipschitz=None):
    """Bracket lambda between min and max of q_k on [0, 1/2].

    ``grid`` points alpha_a = a h, h = 1/(2 (grid-1)); q_k is symmetric about
    1/2, so this covers [0, 1]. Every alpha is within h/2 of a grid point,
    hence lower = min - lip h/2 and upper = max + lip h/2. ``lipschitz`` is
    ``None``/"certified" (``lipschitz_bound``), "paper" (56.4 for k=6) or a number.
    """
    if k < 1 or k > 8:
        raise ConfigError("enclosure depth k must be in 1..8")
    grid = int(TIERS.get(grid, grid)) if isinstance(grid, str) else int(grid)
    if grid < 1000:
        raise ConfigError("grid needs at least 1000 points")
    lip, source = _resolve_lipschitz(k, lipschitz)
    step = 0.5 / (grid - 1)
    t0 = time.perf_counter()
    try:
        gmin, amin, gmax, amax = kernels.grid_q_extrema(k, grid, step)
    except FloatingPointError as exc:
        raise ToleranceError(str(exc)) from None
    elapsed = time.perf_counter() - t0
    half = 0.5 * lip * step
    return Enclosure(k, grid, step, gmin, gmax, amin * step, amax * step, lip, source,
                     gmin - half, gmax + half, elapsed, kernels.BACKEND)


def envelopes(kmax, grid=20_001):
    """Grid estimates (m_k, M_k) for k = 1..kmax on a shared grid (not certified)."""
    step = 0.5 / (grid - 1)
    out = {}
    for k in range(1, kmax + 1):
        gmin, _, gmax, _ = kernels.grid_q_extrema(k, grid, step)
        out[k] = (gmin, gmax)
    return out


def point_estimate(k, alpha_probe=0.25):
    """q_k at one point; at k = 15 every probe agrees with lambda to ~1e-9."""
    return q_ratio(k, alpha_probe)


def probe_spread(k, probes=(0.0, 0.1, 0.25, 0.5)):
    """q_k at several points and the spread max - min."""
    vals = q_ratio(k, np.asarray(probes, dtype=np.float64))
    return dict(zip(map(float, probes), map(float, vals))), float(vals.max() - vals.min())


# -- integrals ---------------------------------------------------------------

@lru_cache(maxsize=64)
def I1_quadrature(L, check=True):
    """I_1(L) = int_0^1 prod_{l<L} |2 sin(pi 2^l a)| da.

    Gauss-Legendre 16 on dyadic panels of width 2^-max(L-1, 12), so every
    factor keeps one sign inside a panel. ``check`` re-runs with 8 nodes and
    raises ToleranceError on a relative disagreement above 1e-9.
    """
    if L < 1:
        raise ConfigError("L must be >= 1")
    if L > 24:
        raise SizeError("I1_quadrature supports L <= 24")
    level = max(L - 1, 12)
    x, w = _GL16
    val = kernels.sine_product_integral(L, level, 0.5 * (x + 1), 0.5 * w, False)
    if check:
        x8, w8 = np.polynomial.legendre.leggauss(8)
        alt = kernels.sine_product_integral(L, level, 0.5 * (x8 + 1), 0.5 * w8, False)
        if abs(val - alt) > 1e-9 * abs(val):
            raise ToleranceError(f"I1({L}): 16- and 8-point rules differ by {abs(val - alt):.3g}")
    return val


def sine_moment(L):
    """int_0^1 prod_{l<L} |sin(pi 2^l a)| da = 2^-L I_1(L)."""
    return math.ldexp(I1_quadrature(L), -L)


def phi_weighted_moment(L, j, level=10):
    """int_0^1 phi_j(a) prod_{l<L-j} |sin(pi 2^l a)| da by panel quadrature.

    Equal to ``sine_moment(L)``: substituting b = 2^j a folds the first j
    factors into phi_j.
    """
    if not 0 <= j <= L:
        raise ConfigError("need 0 <= j <= L")
    x, w = _GL16
    panels = np.arange(1 << level)[:, None]
    a = ((panels + 0.5 * (x + 1)) / (1 << level)).ravel()
    wt = np.tile(0.5 * w, 1 << level) / (1 << level)
    f = phi(j, a)
    for ell in range(L - j):
        f = f * np.abs(np.sin(np.pi * np.ldexp(a, ell)))
    return float(f @ wt)


def I2_bound(L):
    return 2.0 + 2.0 * L * math.log(2.0) / math.pi


def I2_closed(L):
    """int_0^1 |sin(pi 2^L a)| / sin(pi a) da on panels of width 2^-L.

    Raises ToleranceError if the value exceeds 2 + 2 L log 2 / pi.
    """
    if L < 1 or L > 22:
        raise ConfigError("I2_closed supports 1 <= L <= 22")
    x, w = _GL16
    x = 0.5 * (x + 1)
    w = 0.5 * w
    total = 0.0
    npan = 1 << L
    rows = max(1, (1 << 18) // x.size)
    for s in range(0, npan, rows):
        p = np.arange(s, min(npan, s + rows), dtype=np.float64)[:, None]
        a = (p + x[None, :]) / npan
        num = np.abs(np.sin(np.pi * x))[None, :]  # sin(pi 2^L a) = +-sin(pi x) on each panel
        total += float(((num / np.sin(np.pi * a)) @ w).sum())
    value = total / npan
    if value > I2_bound(L):
        raise ToleranceError(f"I2({L}) = {value} exceeds {I2_bound(L)}")
    return value


@dataclass(frozen=True)
class RatioFit:
    Ls: tuple
    I1: tuple
    ratios: tuple       # ratio at L: 2^-(L+1) I1(L+1) / (2^-L I1(L))
    lam: float          # ratio at the largest L
    kappa: tuple        # 2^-L I1(L) / lam^L
    kappa_spread: float  # max/min of kappa


def ratio_fit(L_lo=16, L_hi=22, kappa_range=None):
    """lambda-hat_L = I1(L+1) / (2 I1(L)) for L_lo..L_hi, and the kappa stability ratio."""
    if L_lo < 1 or L_hi < L_lo:
        raise ConfigError("need 1 <= L_lo <= L_hi")
    k_lo, k_hi = kappa_range or (L_lo, L_hi)
    Ls = range(min(L_lo, k_lo), max(L_hi + 1, k_hi) + 1)
    I = {L: I1_quadrature(L, check=False) for L in Ls}
    ratios = tuple(I[L + 1] / (2.0 * I[L]) for L in range(L_lo, L_hi + 1))
    lam = ratios[-1]
    kappa = tuple(math.ldexp(I[L], -L) / lam**L for L in range(k_lo, k_hi + 1))
    return RatioFit(tuple(range(L_lo, L_hi + 1)), tuple(I[L] for L in range(L_lo, L_hi + 1)),
                    ratios, lam, kappa, max(kappa) / min(kappa))

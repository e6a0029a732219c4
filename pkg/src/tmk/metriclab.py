"""Monte Carlo probes of the metric (almost-everywhere) statements.

Each probe draws M uniform alphas as independent children of one seed,
evaluates a normalized statistic at a list of checkpoints and returns an
ExperimentReport. Almost-sure limits are invisible at finite L, so a report
keeps two kinds of property apart:

* ``deterministic``: inequalities that hold for every alpha (|S| <= N,
  telescoping, discrepancy sandwich). Any violation fails the probe.
* ``statistical``: sample fractions or quantiles, each with a Wilson interval
  where it is a fraction, compared against the versioned windows in
  ``data/metric_windows.json``.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import kernels
from .binreal import RandomReal, RationalReal, RuleReal, shift_windows
from .discrepancy import PointSet, explicit_lower_bound, star_disc
from .errors import ConfigError, SingularityError
from .expsum import direct_sum, product_identity, product_series
from .lacunary import SUP_H, trace

SCHEMA_VERSION = 1
MAX_RESAMPLES = 8
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
_LOG2 = math.log(2.0)


@lru_cache(maxsize=1)
def load_windows():
    """The versioned statistical windows shipped with the package."""
    text = resources.files("tmk").joinpath("data/metric_windows.json").read_text()
    return json.loads(text)


# -- report ------------------------------------------------------------------

@dataclass
class ExperimentReport:
    experiment: str
    seed: int
    samples: int
    checkpoints: list
    observables: dict          # name -> [sample][checkpoint]
    summary: dict = field(default_factory=dict)
    properties: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    controls: dict = field(default_factory=dict)
    resampled: int = 0
    windows_version: int = 0
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported report schema {d.get('schema_version')!r}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def digest(self):
        """sha256 of the observables, checkpoints and seed (floats by repr)."""
        core = {"experiment": self.experiment, "seed": self.seed,
                "checkpoints": self.checkpoints, "observables": self.observables}
        return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()

    @property
    def failures(self):
        return sorted(k for k, p in self.properties.items()
                      if p["kind"] == "deterministic" and not p["passed"])

    @property
    def failed(self):
        return bool(self.failures)

    def statistical_ok(self):
        return all(p["passed"] for p in self.properties.values()
                   if p["kind"] == "statistical" and p["passed"] is not None)


def _wilson(count, total):
    lo, hi = proportion_confint(count, total, alpha=0.05, method="wilson")
    return [float(lo), float(hi)]


def _deterministic(violations, checked, detail=""):
    return {"kind": "deterministic", "violations": int(violations), "checked": int(checked),
            "passed": int(violations) == 0, "detail": detail}


def _fraction(name, hits, total, minimum=None, detail=""):
    frac = hits / total
    return {"kind": "statistical" if minimum is not None else "report", "count": int(hits),
            "total": int(total), "fraction": frac, "wilson95": _wilson(hits, total),
            "minimum": minimum, "passed": None if minimum is None else bool(frac >= minimum),
            "detail": detail or name}


def _window(value, lo, hi, detail=""):
    return {"kind": "statistical", "value": float(value), "window": [lo, hi],
            "passed": bool(lo < value < hi), "detail": detail}


def _quantiles(rows, checkpoints):
    a = np.asarray(rows, dtype=np.float64)
    out = {}
    for j, c in enumerate(checkpoints):
        col = a[:, j]
        q = np.quantile(col, QUANTILES)
        out[str(c)] = {"min": float(col.min()), "max": float(col.max()),
                       **{f"q{int(p * 100):02d}": float(v) for p, v in zip(QUANTILES, q)}}
    return out


# -- sampling ----------------------------------------------------------------

def _checkpoints(L_max, lo):
    if L_max < lo:
        raise ConfigError(f"L_max must be >= {lo}")
    cps = []
    c = lo
    while c <= L_max:
        cps.append(c)
        c *= 2
    if cps[-1] != L_max:
        cps.append(int(L_max))
    return cps


def _one(seed, index, fn):
    """fn on sample ``index``; a singular alpha is replaced by child (index, r)."""
    alpha = RandomReal(seed, (index,))
    for r in range(MAX_RESAMPLES + 1):
        try:
            return fn(alpha), r
        except SingularityError:
            alpha = RandomReal(seed, (index, r + 1))
    raise SingularityError(f"sample {index}: {MAX_RESAMPLES} consecutive singular draws")


def _run(seed, M, fn, threads=1):
    if M < 1:
        raise ConfigError("need at least one sample")

    def task(i):
        return _one(seed, i, fn)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, range(M)))
    else:
        results = [task(i) for i in range(M)]
    return [r for r, _ in results], sum(n for _, n in results)


def _loglog(L):
    return math.log(math.log(L))


# -- probes ------------------------------------------------------------------

def probe_lil_products(M=256, L_max=4096, seed=1, threads=1):
    """R_i(alpha, L) = sum_{l<L} f_i(2^l alpha) / sqrt(2 L log log L), i = 1, 2."""
    win = load_windows()
    cps = _checkpoints(L_max, win["checkpoint_min_L"])
    w = win["lil"]

    def sample(alpha):
        t = trace(alpha, L_max)
        r1, r2, tele, sup = [], [], 0, 0
        for L in cps:
            norm = math.sqrt(2.0 * L * _loglog(L))
            s1 = float(t.partial_f1[L])
            s2 = float(t.partial_f2[L])
            r1.append(s1 / norm)
            r2.append(s2 / norm)
            closed = math.log(math.sin(math.pi * t.d0[L]) / math.sin(math.pi * t.d0[0]))
            tele += int(abs(s2 - closed) > 1e-9 + t.residual_f2)
            # L factors l < L: prod |sin| <= (sqrt3/2)^(L-1)
            sup += int(s1 - L * _LOG2 > (L - 1) * math.log(SUP_H) + t.residual_f1)
        return r1, r2, tele, sup

    res, resampled = _run(seed, M, sample, threads)
    R1 = [r[0] for r in res]
    R2 = [r[1] for r in res]
    last1 = np.array([r[-1] for r in R1])
    last2 = np.array([r[-1] for r in R2])
    thr = w["r2_abs_below"]
    lo, hi = w["r1_max_window"]
    props = {
        "telescoping_f2": _deterministic(sum(r[2] for r in res), M * len(cps),
                                         "sum f2 equals log(|sin 2^L pi a| / |sin pi a|)"),
        "sup_bound_f1": _deterministic(sum(r[3] for r in res), M * len(cps),
                                       "prod |sin| <= (sqrt3/2)^(L-1) over L factors"),
        "r2_small": _fraction(f"|R2| < {thr} at L = {cps[-1]}",
                              int(np.count_nonzero(np.abs(last2) < thr)), M, w["r2_min_fraction"]),
        "r1_max": _window(last1.max(), lo, hi, f"max R1 over samples at L = {cps[-1]}"),
    }
    third = RationalReal(1, 3)
    ct = trace(third, L_max)
    control = {str(L): float(ct.partial_f1[L]) for L in cps}
    props["control_one_third"] = _deterministic(
        sum(abs(ct.partial_f1[L] - L * 0.5 * math.log(3.0)) > 1e-9 * L for L in cps), len(cps),
        "alpha = 1/3: sum f1 = L log(3)/2")
    return ExperimentReport(
        "lil", seed, M, cps, {"R1": R1, "R2": R2},
        summary={"R1": _quantiles(R1, cps), "R2": _quantiles(R2, cps)},
        properties=props, params={"M": M, "L_max": L_max},
        controls={"alpha=1/3 sum f1": control}, resampled=resampled,
        windows_version=win["schema_version"])


def thm1_envelope(L, eps):
    """log of exp((pi/sqrt(log 2) + eps) sqrt(L log 2) sqrt(log log log 2^L))."""
    return (math.pi / math.sqrt(_LOG2) + eps) * math.sqrt(L * _LOG2 * math.log(math.log(L * _LOG2)))


def probe_thm1_sums(M=256, L_max=4096, seed=1, threads=1):
    """log|S_1(2^L)| from the product identity, against the growth envelope."""
    win = load_windows()
    cps = _checkpoints(L_max, win["checkpoint_min_L"])
    w = win["thm1"]
    env = [thm1_envelope(L, w["eps_envelope"]) for L in cps]
    band = [thm1_envelope(L, w["eps_band"]) for L in cps]
    scale = [math.sqrt(L * _LOG2 * math.log(math.log(L * _LOG2))) for L in cps]

    def sample(alpha):
        sums = product_series(alpha, 1, cps)
        logs = [s.log_abs for s in sums]
        trivial = sum(la > L * _LOG2 + 1e-9 for la, L in zip(logs, cps))
        return logs, trivial

    res, resampled = _run(seed, M, sample, threads)
    logS = [r[0] for r in res]
    a = np.asarray(logS)
    norm = (a / np.asarray(scale)).tolist()
    env_viol = int(np.count_nonzero(a > np.asarray(env)))
    band_ok = int(np.count_nonzero((a <= np.asarray(band)).all(axis=1)))
    env_last = int(np.count_nonzero(a[:, -1] <= env[-1]))
    medians = np.median(np.asarray(norm), axis=0)

    n_audit = max(1, math.ceil(w["audit_fraction"] * M))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1 << 30,)))
    audit_idx = sorted(int(i) for i in rng.choice(M, size=min(n_audit, M), replace=False))
    La = w["audit_L"]
    audit = []
    for i in audit_idx:
        alpha = RandomReal(seed, (i,))
        p = product_identity(alpha, 1, La)
        d = direct_sum(alpha, 1, 1 << La)
        audit.append(abs(p.value - d.value))
    props = {
        "trivial_bound": _deterministic(sum(r[1] for r in res), M * len(cps), "|S(2^L)| <= 2^L"),
        "envelope_eps1": {**_fraction(f"eps = {w['eps_envelope']} envelope at L = {cps[-1]}",
                                      env_last, M, w["envelope_min_fraction"]),
                          "violations_all_checkpoints": env_viol},
        "band_eps025": _fraction(f"eps = {w['eps_band']} band at every checkpoint", band_ok, M),
        "audit_product_vs_direct": {**_deterministic(sum(e >= w["audit_tol"] for e in audit),
                                                     len(audit), f"|product - direct| at L = {La}"),
                                    "samples": audit_idx, "max_error": max(audit)},
        "median_trend": {"kind": "report", "passed": None,
                         "medians": medians.tolist(),
                         "nondecreasing": bool(np.all(np.diff(medians) >= 0)),
                         "largest_normalized": float(np.max(norm))},
    }
    return ExperimentReport(
        "thm1", seed, M, cps, {"log_abs_S": logS, "normalized": norm},
        summary={"log_abs_S": _quantiles(logS, cps), "normalized": _quantiles(norm, cps)},
        properties=props, params={"M": M, "L_max": L_max, "h": 1},
        controls={"envelope": env, "band": band}, resampled=resampled,
        windows_version=win["schema_version"])


@lru_cache(maxsize=1)
def reference_slope():
    """1 + log2(lambda) at the midpoint of the k = 6 CI-tier enclosure."""
    from .fm_lambda import enclose_lambda

    e = enclose_lambda(6, "ci")
    return 1.0 + math.log2(0.5 * (e.lower + e.upper))


def _disc_curve(alpha, exps):
    N_max = 1 << exps[-1]
    ps = PointSet.thue_morse_kronecker(alpha, N_max)
    out = []
    for e in exps:
        N = 1 << e
        out.append(N * star_disc(PointSet(ps.values[:N], error=ps.error)))
    return out, ps


def _slope(exps, nd):
    x = np.asarray(exps, dtype=np.float64) * _LOG2
    return float(np.polyfit(x, np.log(np.asarray(nd)), 1)[0])


def probe_thm3_disc(M=256, L_max=4096, seed=1, threads=1, control=True):
    """N D*_N of {n_k alpha} at N = 2^j up to N = L_max, and the fitted growth exponent.

    ``L_max`` is the largest N here (2^4096 points are out of reach); the
    checkpoints are N = 2^j for j from the window's ``log2N_min``.
    """
    win = load_windows()
    w = win["thm3"]
    top = int(math.floor(math.log2(L_max)))
    exps = list(range(w["log2N_min"], top + 1))
    if len(exps) < 3:
        raise ConfigError(f"need L_max >= 2^{w['log2N_min'] + 2} for a slope fit")
    cps = [1 << e for e in exps]

    def sample(alpha):
        nd, ps = _disc_curve(alpha, exps)
        below = 0
        for e, v in zip(exps, nd):
            N = 1 << e
            lb = explicit_lower_bound(product_identity(alpha, 1, e), 1, N)
            below += v / N + ps.slack() < lb
        return nd, _slope(exps, nd), below

    res, resampled = _run(seed, M, sample, threads)
    ND = [r[0] for r in res]
    slopes = np.array([r[1] for r in res])
    lo, hi = w["median_slope_window"]
    props = {
        "lower_bound_H1": _deterministic(sum(r[2] for r in res), M * len(cps),
                                         "D* >= |S_1(N)| / (4N)"),
        "median_slope": _window(np.median(slopes), lo, hi, "median fitted slope of log(N D*) on log N"),
    }
    controls = {"reference_slope": reference_slope()}
    if control:
        c_lo, c_hi = w["control_log2N"]
        c_exps = list(range(c_lo, c_hi + 1))
        nd, _ = _disc_curve(RuleReal("paper-4a"), c_exps)
        cs = _slope(c_exps, nd)
        controls["alpha_4a"] = {"log2N": c_exps, "ND": nd, "slope": cs}
        props["control_4a_slope"] = {"kind": "statistical", "value": cs,
                                     "minimum": w["control_min_slope"],
                                     "passed": bool(cs > w["control_min_slope"]),
                                     "detail": f"4(a) number over N = 2^{c_lo}..2^{c_hi}"}
    q = np.quantile(slopes, QUANTILES)
    summary = {"ND": _quantiles(ND, cps),
               "slope": {f"q{int(p * 100):02d}": float(v) for p, v in zip(QUANTILES, q)}}
    return ExperimentReport(
        "thm3", seed, M, cps, {"ND": ND, "slope": [[float(s)] for s in slopes]},
        summary=summary, properties=props, params={"M": M, "N_max": cps[-1], "control": control},
        controls=controls, resampled=resampled, windows_version=win["schema_version"])


# -- general lacunary f ------------------------------------------------------

def parse_fspec(spec):
    """Cosine coefficients (a_1, ..., a_J) or the name "f1"/"f2".

    Accepts "f1", "f2", "zero", "cos" (a_1 = 1) or a comma list "a1,a2,...".
    Every coefficient must satisfy |a_j| <= 1/j.
    """
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s in ("f1", "f2"):
            return s
        if s == "zero":
            return (0.0,)
        if s == "cos":
            return (1.0,)
        try:
            coeffs = tuple(float(v) for v in s.split(","))
        except ValueError:
            raise ConfigError(f"bad f-spec {spec!r}") from None
    else:
        coeffs = tuple(float(v) for v in spec)
    if not coeffs:
        raise ConfigError("f-spec needs at least one coefficient")
    for j, a in enumerate(coeffs, start=1):
        if not math.isfinite(a) or abs(a) > 1.0 / j + 1e-15:
            raise ConfigError(f"|a_{j}| = {abs(a)} exceeds 1/{j}")
    return coeffs


def fspec_l2(f):
    if f in ("f1", "f2"):
        return math.pi / math.sqrt(12.0)
    return math.sqrt(0.5 * sum(a * a for a in f))


def c_q(f, q=2.0):
    """max(85 q / (q - 1), 122 ||f||_2^(1/4) sqrt(q) / (sqrt(q) - 1))."""
    rq = math.sqrt(q)
    return max(85.0 * q / (q - 1.0), 122.0 * fspec_l2(f) ** 0.25 * rq / (rq - 1.0))


def _lacunary_partials(alpha, f, L_max):
    """sum_{l<L} f(2^l alpha) for L = 0..L_max."""
    if f == "f1":
        return trace(alpha, L_max).partial_f1
    if f == "f2":
        return trace(alpha, L_max).partial_f2
    u = shift_windows(alpha, L_max)
    vals = np.zeros(L_max)
    for j, a in enumerate(f, start=1):
        if a:
            ph = (u * np.uint64(j)).astype(np.float64) / 2.0**64  # wraps mod 2^64, i.e. mod 1
            vals += a * np.cos(2.0 * np.pi * ph)
    p, _ = kernels.neumaier_cumsum(vals)
    return p


def probe_thm5_general(M=256, L_max=4096, seed=1, fspec="f1", threads=1):
    """sum_{l<L} f(2^l alpha) / sqrt(L log log L) against the bounded-LIL constant c_2."""
    win = load_windows()
    cps = _checkpoints(L_max, win["checkpoint_min_L"])
    w = win["thm5"]
    f = parse_fspec(fspec)
    cap = c_q(f, w["q"])
    amp = None if isinstance(f, str) else sum(abs(a) for a in f)

    def sample(alpha):
        p = _lacunary_partials(alpha, f, L_max)
        stat = [float(p[L]) / math.sqrt(L * _loglog(L)) for L in cps]
        triv = 0 if amp is None else sum(abs(float(p[L])) > L * amp * (1 + 1e-12) for L in cps)
        return stat, triv

    res, resampled = _run(seed, M, sample, threads)
    T = [r[0] for r in res]
    a = np.abs(np.asarray(T))
    props = {
        "below_c_q": {**_fraction(f"|statistic| < c_q = {cap:.6g} at every checkpoint",
                                  int(np.count_nonzero((a < cap).all(axis=1))), M, 1.0),
                      "c_q": cap, "max_abs": float(a.max())},
    }
    if amp is not None:
        props["trivial_bound"] = _deterministic(sum(r[1] for r in res), M * len(cps),
                                                "|sum| <= L sum |a_j|")
    if f == (1.0,):
        props["single_harmonic"] = _window(float(a[:, -1].max()), -math.inf,
                                           w["single_harmonic_max"], f"max |statistic| at L = {cps[-1]}")
    label = f if isinstance(f, str) else list(f)
    return ExperimentReport(
        "thm5", seed, M, cps, {"statistic": T},
        summary={"statistic": _quantiles(T, cps)}, properties=props,
        params={"M": M, "L_max": L_max, "f": label, "q": w["q"]},
        controls={"c_q": cap, "l2_norm": fspec_l2(f)}, resampled=resampled,
        windows_version=win["schema_version"])


PROBES = {
    "lil": probe_lil_products,
    "thm1": probe_thm1_sums,
    "thm3": probe_thm3_disc,
    "thm5": probe_thm5_general,
}

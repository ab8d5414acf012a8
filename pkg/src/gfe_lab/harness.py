"""Perturb-then-project stability experiments.

An exact solution is perturbed by a controlled noise model, the hypotheses
(approximate solution on C, approximate continuity, boundedness) are
checked on sampled compact sets, and a nearby exact solution is fitted from
a finite-dimensional family and compared on D.
"""
from __future__ import annotations

import hashlib
import itertools
import math
import struct
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .core import (
    DEFAULT_CAP,
    FunTuple,
    SampleSet,
    Verdict,
    as_system,
    is_v_solution,
    satisfies,
)
from .errors import (
    CapExceeded,
    DegenerateBox,
    NonFiniteObjective,
    PreconditionError,
    UnsupportedNoise,
)
from .regularity import (
    BoundingRel,
    ContinuityScale,
    EpsLadder,
    check_precontinuity,
    check_r_bounded,
    check_uniform_precontinuity,
    sup_distance,
)
from .spaces import NATURAL_PAIRS, NATURALS, REALS, SpaceDesc

_SNAP = 12  # interval grid points are rounded to this many decimals


# ---------------------------------------------------------------------------
# compact sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompactDescriptor:
    """A bounded set described finitely, sampled by :func:`sample_compact`.

    ``keep`` optionally restricts the grid (e.g. a band around the diagonal).
    """

    kind: str
    lo: Any = None
    hi: Any = None
    step: float | None = None
    count: int | None = None
    points: tuple = ()
    keep: Callable | None = field(default=None, compare=False)
    keep_name: str = ""

    def __post_init__(self):
        if self.kind not in ("interval", "box", "finite-point-list", "integer-range", "pair-range"):
            raise ValueError(f"unknown compact descriptor kind {self.kind!r}")
        if self.kind == "finite-point-list":
            if not self.points:
                raise PreconditionError("finite point list must be nonempty")
            object.__setattr__(self, "points", tuple(self.points))
            return
        if self.lo is None or self.hi is None:
            raise PreconditionError(f"{self.kind} needs both bounds")
        lo = self.lo if isinstance(self.lo, tuple) else (self.lo,)
        hi = self.hi if isinstance(self.hi, tuple) else (self.hi,)
        if len(lo) != len(hi) or any(not (a <= b) for a, b in zip(lo, hi)):
            raise PreconditionError(f"{self.kind}: need lo <= hi")
        if any(not math.isfinite(v) for v in lo + hi):
            raise PreconditionError(f"{self.kind} must be bounded")
        if self.kind in ("interval", "box"):
            if self.step is None and self.count is None:
                raise PreconditionError("give a step or a count")
            if self.step is not None and not self.step > 0:
                raise PreconditionError("resolution must be positive")
            if self.count is not None and self.count < 1:
                raise PreconditionError("resolution must be positive")

    @classmethod
    def interval(cls, lo, hi, step=None, count=None):
        return cls("interval", float(lo), float(hi), step, count)

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], step=None, count=None, keep=None, keep_name=""):
        return cls("box", tuple(map(float, lo)), tuple(map(float, hi)), step, count, keep=keep, keep_name=keep_name)

    @classmethod
    def finite(cls, points):
        return cls("finite-point-list", points=tuple(points))

    @classmethod
    def integer_range(cls, lo, hi):
        return cls("integer-range", int(lo), int(hi))

    @classmethod
    def pair_range(cls, lo, hi):
        return cls("pair-range", int(lo), int(hi))

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "finite-point-list":
            d["points"] = list(self.points)
        else:
            d["lo"], d["hi"] = self.lo, self.hi
            if self.step is not None:
                d["step"] = self.step
            if self.count is not None:
                d["count"] = self.count
        if self.keep is not None:
            d["restricted_by"] = self.keep_name or "predicate"
        return d


def _axis(lo: float, hi: float, step, count) -> list:
    if count is not None:
        if count == 1:
            if lo != hi:
                raise PreconditionError("a one-point grid needs lo == hi")
            return [lo]
        step = (hi - lo) / (count - 1)
        pts = [round(lo + i * step, _SNAP) for i in range(count)]
    else:
        n = math.floor((hi - lo) / step + 1e-9)
        pts = [round(lo + i * step, _SNAP) for i in range(n + 1)]
        if hi - pts[-1] > 1e-9 * step:
            pts.append(hi)
    pts[0], pts[-1] = lo, hi
    return list(dict.fromkeys(pts))


def sample_compact(desc: CompactDescriptor, space: SpaceDesc | None = None, cap: int = DEFAULT_CAP) -> SampleSet:
    """Deterministic grid over the descriptor.

    Intervals include both endpoints; grid coordinates are snapped to 12
    decimals so that grids of the same step nest exactly.  Boxes and pair
    ranges are enumerated lexicographically.
    """
    k = desc.kind
    if k == "finite-point-list":
        pts = list(dict.fromkeys(desc.points))
        space = space or REALS
        arity = None
    elif k == "interval":
        pts = _axis(desc.lo, desc.hi, desc.step, desc.count)
        space = space or REALS
        arity = None
    elif k == "box":
        axes = [_axis(a, b, desc.step, desc.count) for a, b in zip(desc.lo, desc.hi)]
        size = math.prod(len(ax) for ax in axes)
        if size > cap:
            raise CapExceeded(f"box grid has {size} points, cap is {cap}")
        pts = list(itertools.product(*axes))
        if space is None:
            space = SpaceDesc.real_box(len(axes))
            arity = None
        else:
            arity = len(axes)
    elif k == "integer-range":
        pts = list(range(desc.lo, desc.hi + 1))
        space = space or NATURALS
        arity = None
    else:
        size = (desc.hi - desc.lo + 1) ** 2
        if size > cap:
            raise CapExceeded(f"pair range has {size} points, cap is {cap}")
        pts = list(itertools.product(range(desc.lo, desc.hi + 1), repeat=2))
        space = space or NATURAL_PAIRS
        arity = None
    if len(pts) > cap:
        raise CapExceeded(f"descriptor yields {len(pts)} points, cap is {cap}")
    if desc.keep is not None:
        pts = [p for p in pts if desc.keep(p)]
    return SampleSet(space, tuple(pts), desc, arity)


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseModel:
    """Bounded additive perturbation ``eta_i(x)`` with ``|eta_i| <= amplitude``.

    ``uniform-amplitude`` draws each value from a hash of (seed, i, x), so
    repeated evaluation at the same point is reproducible without state.
    """

    kind: str
    amplitude: float
    seed: int = 0
    frequency: float = 1.0
    table: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("uniform-amplitude", "sinusoidal", "pointwise-table"):
            raise UnsupportedNoise(f"unknown noise kind {self.kind!r}")
        if not self.amplitude >= 0:
            raise PreconditionError("noise amplitude must be nonnegative")
        if self.kind == "pointwise-table":
            for x, eta in self.table.items():
                if abs(eta) > self.amplitude:
                    raise PreconditionError(f"table noise {eta!r} at {x!r} exceeds amplitude")

    @classmethod
    def sinusoidal(cls, frequency, amplitude, seed=0):
        return cls("sinusoidal", amplitude, seed, frequency)

    @classmethod
    def uniform(cls, amplitude, seed=0):
        return cls("uniform-amplitude", amplitude, seed)

    def eta(self, i: int, x):
        if self.amplitude == 0:
            return 0.0
        if self.kind == "sinusoidal":
            return self.amplitude * math.sin(self.frequency * x)
        if self.kind == "pointwise-table":
            return self.table.get(x, 0.0)
        digest = hashlib.blake2b(f"{self.seed}|{i}|{x!r}".encode(), digest_size=8).digest()
        u = struct.unpack("<Q", digest)[0] / 2.0**64
        return self.amplitude * (2.0 * u - 1.0)

    def describe(self) -> dict:
        d = {"kind": self.kind, "amplitude": self.amplitude, "seed": self.seed}
        if self.kind == "sinusoidal":
            d["frequency"] = self.frequency
        return d


class _Perturbed:
    def __init__(self, base, noise: NoiseModel, i: int):
        self.base, self.noise, self.i = base, noise, i

    def __call__(self, x):
        return self.base(x) + self.noise.eta(self.i, x)


def perturb(f: FunTuple, noise: NoiseModel, codomain: SpaceDesc | None = None) -> FunTuple:
    """Componentwise ``f_i + eta_i``."""
    codomain = codomain or f.codomain
    if codomain is not None and not codomain.additive:
        raise UnsupportedNoise(f"additive noise is not defined on {codomain.name}")
    if noise.kind == "sinusoidal" and f.domain is not None and f.domain.kind != "real-line":
        raise UnsupportedNoise("sinusoidal noise needs a real-line domain")
    if noise.kind == "sinusoidal" and codomain is not None and codomain.kind == "real-box":
        raise UnsupportedNoise("sinusoidal noise needs a scalar codomain")
    comps = tuple(_Perturbed(c, noise, i) for i, c in enumerate(f.components))
    return FunTuple(comps, f.domain, codomain, f"{f.name}+noise")


# ---------------------------------------------------------------------------
# solution families and fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolutionFamily:
    """Exact solutions ``instantiate(params)`` over a box of parameters."""

    name: str
    lo: tuple
    hi: tuple
    instantiate: Callable[[tuple], FunTuple] = field(compare=False)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def describe(self) -> dict:
        return {"name": self.name, "lo": list(self.lo), "hi": list(self.hi)}


def linear_family(lo=-10.0, hi=10.0) -> SolutionFamily:
    from .zoo import reference_solution

    return SolutionFamily("linear", (lo,), (hi,), lambda p: reference_solution("linear", p[0]))


def exp_family(lo=-5.0, hi=5.0) -> SolutionFamily:
    from .zoo import reference_solution

    return SolutionFamily("exp", (lo,), (hi,), lambda p: reference_solution("exp", p[0]))


def affine_family(lo=(-10.0, -10.0), hi=(10.0, 10.0)) -> SolutionFamily:
    from .zoo import reference_solution

    return SolutionFamily("affine", tuple(lo), tuple(hi), lambda p: reference_solution("affine", p[0], p[1]))


def sincos_family(lo=0.5, hi=5.0) -> SolutionFamily:
    from .zoo import reference_solution

    return SolutionFamily("sincos", (lo,), (hi,), lambda p: reference_solution("sincos", p[0]))


def fibonacci_family(lo=(0.0, 0.0), hi=(100.0, 100.0)) -> SolutionFamily:
    """Initial values (f0, f1), rounded to integers."""
    from .zoo import reference_solution

    return SolutionFamily(
        "fibonacci", tuple(lo), tuple(hi), lambda p: reference_solution("fibonacci", round(p[0]), round(p[1]))
    )


FAMILIES = {
    "linear": linear_family,
    "exp": exp_family,
    "affine": affine_family,
    "sincos": sincos_family,
    "fibonacci": fibonacci_family,
}


def validate_family(sys, family: SolutionFamily, grid: SampleSet, samples: int = 5, atol=None) -> bool:
    """Check that a few deterministic members of the family solve ``sys``."""
    sys = as_system(sys)
    for t in np.linspace(0.0, 1.0, samples):
        params = tuple(a + t * (b - a) for a, b in zip(family.lo, family.hi))
        if not satisfies(sys, family.instantiate(params), grid, atol):
            return False
    return True


@dataclass(frozen=True)
class FitResult:
    params: tuple
    phi: FunTuple
    distance: float
    objective: float
    evaluations: int


def _objective(f_vals, family, D_pts, codomain, kind):
    def obj(params):
        phi = family.instantiate(tuple(params))
        worst, total, n = 0.0, 0.0, 0
        for fv, comp in zip(f_vals, phi.components):
            for y, x in zip(fv, D_pts):
                d = codomain.distance(y, comp(x))
                if not math.isfinite(d):
                    raise NonFiniteObjective(f"objective is not finite at {x!r} for params {tuple(params)!r}")
                worst = max(worst, d)
                total += d * d
                n += 1
        return worst if kind == "sup" else total / max(n, 1)

    return obj


def golden_section(fn, a: float, b: float, tol: float = 1e-13, max_iter: int = 200):
    """Minimize a unimodal ``fn`` on [a, b]; returns (x, fn(x), calls)."""
    inv_phi = (math.sqrt(5) - 1) / 2
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    calls = 2
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
        calls += 1
    return (c, fc, calls) if fc <= fd else (d, fd, calls)


def fit_solution(
    sys,
    family: SolutionFamily,
    f: FunTuple,
    D: SampleSet,
    objective: str = "sup",
    coarse: int = 41,
    sweeps: int = 3,
    codomain: SpaceDesc | None = None,
) -> FitResult:
    """Fit the family member closest to ``f`` on ``D``.

    Coarse grid search over the parameter box, then golden-section
    refinement one coordinate at a time.  ``distance`` is always the sup
    gap on ``D``, whatever the objective.
    """
    if objective not in ("sup", "mean-square"):
        raise PreconditionError("objective must be 'sup' or 'mean-square'")
    lo = np.asarray(family.lo, dtype=float)
    hi = np.asarray(family.hi, dtype=float)
    if lo.shape != hi.shape or lo.size == 0 or np.any(~(hi > lo)) or not np.all(np.isfinite(lo + hi)):
        raise DegenerateBox(f"degenerate parameter box {family.lo} .. {family.hi}")
    codomain = codomain or f.codomain or as_system(sys).codomain
    D_pts = list(D.points)
    f_vals = [[fi(x) for x in D_pts] for fi in f.components]
    obj = _objective(f_vals, family, D_pts, codomain, objective)

    axes = [np.linspace(a, b, coarse) for a, b in zip(lo, hi)]
    steps = (hi - lo) / (coarse - 1)
    best_p, best_v, evals = None, math.inf, 0
    for combo in itertools.product(*axes):
        v = obj(combo)
        evals += 1
        if v < best_v:
            best_p, best_v = np.asarray(combo, dtype=float), v
    for _ in range(sweeps):
        for j in range(len(lo)):
            a = max(lo[j], best_p[j] - steps[j])
            b = min(hi[j], best_p[j] + steps[j])

            def along(t, j=j):
                q = best_p.copy()
                q[j] = t
                return obj(q)

            t, v, calls = golden_section(along, a, b)
            evals += calls
            if v < best_v:
                best_p = best_p.copy()
                best_p[j] = t
                best_v = v
    params = tuple(float(v) for v in best_p)
    phi = family.instantiate(params)
    distance = sup_distance(f, phi, D, codomain)
    return FitResult(params, phi, distance, float(best_v), evals)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

SCHEMA_VERSION = "1.0"


@dataclass
class StabilityReport:
    config: dict
    hypotheses: dict
    fitted_params: tuple
    distance: float
    eps_v: float
    passed: bool
    eps_u_scan: list = field(default_factory=list)
    runtimes: dict | None = None

    @property
    def hypotheses_hold(self) -> bool:
        return all(v.passed for v in self.hypotheses.values())


def _verdict_pass_flag(hyp: dict, distance: float, eps_v: float) -> bool:
    return all(v.passed for v in hyp.values()) and distance < eps_v


def _trivial_bound(reason: str) -> Verdict:
    return Verdict(True, None, 0, {"skipped": reason})


def _hypotheses(sys, f, V_sample, C_sample, eps_u, gamma, R, ladder_extra=()):
    ladder = EpsLadder(eps_u, extra=tuple(ladder_extra))
    hyp = {"u_solution": is_v_solution(sys, f, V_sample, eps_u)}
    if gamma.kind == "uniform":
        hyp["precontinuity"] = check_uniform_precontinuity(f, gamma, eps_u, C_sample, ladder)
    else:
        hyp["precontinuity"] = check_precontinuity(f, gamma, eps_u, C_sample, C_sample, ladder)
    if R is None:
        hyp["r_bounded"] = _trivial_bound("compact codomain: every function is bounded")
    else:
        hyp["r_bounded"] = check_r_bounded(f, R, C_sample)
    return hyp


def _config(sys, exact, family, noise, D, C, eps_u, eps_v, gamma, R, extra=None) -> dict:
    cfg = {
        "system": list(as_system(sys).labels),
        "types": [list(eq.typ) for eq in as_system(sys)],
        "exact": exact.name,
        "family": family.describe(),
        "noise": noise.describe(),
        "seed": noise.seed,
        "D": D.describe(),
        "C": C.describe(),
        "eps_u": eps_u,
        "eps_v": eps_v,
        "gamma": gamma.describe(),
        "bounding_relation": R.describe() if R is not None else None,
    }
    if extra:
        cfg.update(extra)
    return cfg


def stability_experiment(
    sys,
    exact: FunTuple,
    family: SolutionFamily,
    noise: NoiseModel,
    D: CompactDescriptor,
    C: CompactDescriptor,
    eps_u: float,
    eps_v: float,
    gamma: ContinuityScale,
    R: BoundingRel | None,
    eps_u_ladder: Sequence[float] = (),
    objective: str = "sup",
    timings: bool = False,
) -> StabilityReport:
    """Perturb ``exact``, check the hypotheses on C, fit on D, compare.

    ``R=None`` stands for a compact codomain (every function is bounded).
    With a uniform ``gamma`` the continuity hypothesis is checked in its
    uniform form, which together with ``D == C`` gives the global setting.
    ``eps_u_ladder`` re-checks the hypotheses at further tolerances and
    records the smallest one at which they all hold.
    """
    sys = as_system(sys)
    t0 = time.perf_counter()
    D_s = sample_compact(D, sys.domain)
    C_s = sample_compact(C, sys.domain)
    C_set = set(C_s.points)
    missing = [x for x in D_s.points if x not in C_set]
    if missing:
        raise PreconditionError(f"D is not contained in C (e.g. {missing[0]!r})")
    f = perturb(exact, noise, sys.codomain)
    t1 = time.perf_counter()
    hyp = _hypotheses(sys, f, C_s, C_s, eps_u, gamma, R)
    t2 = time.perf_counter()
    fit = fit_solution(sys, family, f, D_s, objective, codomain=sys.codomain)
    t3 = time.perf_counter()
    scan = _eps_u_scan(sys, f, C_s, C_s, eps_u_ladder, gamma, R)
    cfg = _config(sys, exact, family, noise, D, C, eps_u, eps_v, gamma, R, {"objective": objective})
    report = StabilityReport(
        cfg, hyp, fit.params, fit.distance, eps_v,
        _verdict_pass_flag(hyp, fit.distance, eps_v), scan,
    )
    if timings:
        report.runtimes = {"sampling": t1 - t0, "hypotheses": t2 - t1, "fit": t3 - t2}
    return report


def _eps_u_scan(sys, f, V_sample, C_sample, ladder, gamma, R) -> list:
    rows = []
    for eps in sorted(set(ladder)):
        hyp = _hypotheses(sys, f, V_sample, C_sample, eps, gamma, R)
        rows.append({"eps_u": eps, "hypotheses_hold": all(v.passed for v in hyp.values())})
    return rows


def smallest_passing_eps_u(report: StabilityReport):
    ok = [row["eps_u"] for row in report.eps_u_scan if row["hypotheses_hold"]]
    return min(ok) if ok else None


def stability_experiment_pset(
    sys,
    exact: FunTuple,
    family: SolutionFamily,
    noise: NoiseModel,
    D: CompactDescriptor,
    C: CompactDescriptor,
    K: CompactDescriptor,
    in_S: Callable[[tuple], bool],
    eps_u: float,
    eps_v: float,
    gamma: ContinuityScale,
    R: BoundingRel | None,
    objective: str = "sup",
    timings: bool = False,
) -> StabilityReport:
    """Variant where approximate satisfaction is required on ``K`` in X^p.

    Needs a common arity p, ``K`` inside ``S`` and ``D^p`` inside ``K``;
    continuity and boundedness are still checked on ``C``.
    """
    sys = as_system(sys)
    ps = {eq.p for eq in sys}
    if len(ps) != 1:
        raise PreconditionError("all equations must share the same arity")
    (p,) = ps
    t0 = time.perf_counter()
    D_s = sample_compact(D, sys.domain)
    C_s = sample_compact(C, sys.domain)
    K_s = sample_compact(K, sys.domain)
    if K_s.arity is None:
        K_s = SampleSet(sys.domain, K_s.points, K, p, check=False)
    if K_s.arity != p:
        raise PreconditionError(f"K must be a subset of X^{p}")
    outside = [x for x in K_s.points if not in_S(x)]
    if outside:
        raise PreconditionError(f"K sample point {outside[0]!r} lies outside S")
    C_set = set(C_s.points)
    if any(x not in C_set for x in D_s.points):
        raise PreconditionError("D is not contained in C")
    K_set = set(K_s.points)
    for x in itertools.product(D_s.points, repeat=p):
        if x not in K_set:
            raise PreconditionError(f"D^p is not contained in K (e.g. {x!r})")
    f = perturb(exact, noise, sys.codomain)
    t1 = time.perf_counter()
    hyp = _hypotheses(sys, f, K_s, C_s, eps_u, gamma, R)
    t2 = time.perf_counter()
    fit = fit_solution(sys, family, f, D_s, objective, codomain=sys.codomain)
    t3 = time.perf_counter()
    cfg = _config(sys, exact, family, noise, D, C, eps_u, eps_v, gamma, R,
                  {"objective": objective, "K": K.describe(), "K_size": len(K_s)})
    report = StabilityReport(cfg, hyp, fit.params, fit.distance, eps_v,
                             _verdict_pass_flag(hyp, fit.distance, eps_v))
    if timings:
        report.runtimes = {"sampling": t1 - t0, "hypotheses": t2 - t1, "fit": t3 - t2}
    return report


def global_stability_experiment(
    sys,
    exact: FunTuple,
    family: SolutionFamily,
    noise: NoiseModel,
    X: CompactDescriptor,
    eps_u: float,
    eps_v: float,
    gamma: ContinuityScale,
    R: BoundingRel | None = None,
    **kw,
) -> StabilityReport:
    """Compact-domain setting: D = C = X with a uniform continuity scale."""
    if gamma.kind != "uniform":
        raise PreconditionError("the global setting uses a uniform continuity scale")
    return stability_experiment(sys, exact, family, noise, X, X, eps_u, eps_v, gamma, R, **kw)


def compact_codomain_relation(lo: float, hi: float) -> BoundingRel:
    """Bounding relation standing in for a compact codomain ``[lo, hi]``."""
    return BoundingRel.interval(lo, hi)

"""Quadrature and summation engines shared by every kernel module.

Everything here is a pure function of its arguments.  Integrands are
called with 1-D numpy arrays of nodes and must return an array of the same
length (real or complex); returning a scalar is accepted and broadcast.

The base rule is the 7/15-point Gauss-Kronrod pair with the QUADPACK error
heuristic.  Refinement is global and batched: every round bisects the panels
whose error exceeds their length-proportional share of the tolerance, so the
integrand sees whole batches of nodes at once.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "SeriesSpec",
    "EvalResult",
    "NumericsError",
    "NonConvergence",
    "DivergentTail",
    "InvalidInterval",
    "EmptyRadiiSchedule",
    "SequenceTooShort",
    "integrate_adaptive",
    "integrate_semi_infinite_oscillatory",
    "abel_partial",
    "abel_sum",
    "accelerate_alternating",
    "richardson_inverse_power",
]


class NumericsError(Exception):
    """Base class for engine failures."""


class NonConvergence(NumericsError):
    """Budget exhausted before the error estimate met the tolerance.

    ``result`` carries the best available :class:`EvalResult` (with
    ``converged=False``) so callers can still report it.
    """

    def __init__(self, message: str, result: "EvalResult | None" = None):
        super().__init__(message)
        self.result = result


class DivergentTail(NonConvergence):
    """Oscillation segments stopped shrinking."""


class InvalidInterval(NumericsError, ValueError):
    pass


class EmptyRadiiSchedule(NumericsError, ValueError):
    pass


class SequenceTooShort(NumericsError, ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 4000
    max_halfperiods: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.max_halfperiods < 2:
            raise ValueError("max_halfperiods must be >= 2")

    def tolerance(self, value) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class SeriesSpec:
    """Summation settings.

    ``abel_radii`` is the schedule of damping radii r (each in (0, 1),
    strictly increasing); the damped sums are extrapolated to r -> 1 by a
    polynomial of degree ``extrapolation_depth`` in (1 - r).
    """

    tol: float = 1e-10
    max_terms: int = 200_000
    abel_radii: tuple[float, ...] = (0.5, 0.75, 0.875, 0.9375, 0.96875)
    extrapolation_depth: int = 4

    def __post_init__(self):
        object.__setattr__(self, "abel_radii", tuple(float(r) for r in self.abel_radii))
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_terms < 2:
            raise ValueError("max_terms must be >= 2")
        if self.extrapolation_depth < 0:
            raise ValueError("extrapolation_depth must be >= 0")
        radii = self.abel_radii
        if any(not 0.0 < r < 1.0 for r in radii):
            raise ValueError("abel radii must lie in (0, 1)")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("abel radii must be strictly increasing")

    def tolerance(self, value) -> float:
        return self.tol * max(1.0, abs(value))


@dataclass(frozen=True)
class EvalResult:
    value: complex | float
    error_estimate: float
    terms_or_nodes_used: int
    converged: bool

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")

    @property
    def real(self) -> float:
        return float(np.real(self.value))


DEFAULT_QUAD = QuadratureSpec()
DEFAULT_SERIES = SeriesSpec()

# Kronrod 15-point abscissae (positive half) and weights, with the embedded
# 7-point Gauss weights on the odd-indexed abscissae (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


def _evaluate(f, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x))
    if y.ndim == 0:
        y = np.broadcast_to(y, x.shape)
    elif y.shape[0] != x.shape[0]:
        raise ValueError("integrand must map an array of nodes to an array of equal length")
    return y


def _gk15_panels(f, lo: np.ndarray, hi: np.ndarray):
    """Kronrod value, QUADPACK error estimate and |f| integral per panel.

    Values have shape (panels,) + trailing component shape of f.
    """
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = (center[:, None] + half[:, None] * NODES[None, :]).ravel()
    y = _evaluate(f, x)
    tail = y.shape[1:]
    y = y.reshape((lo.size, 15) + tail)
    w_shape = (1, 15) + (1,) * len(tail)
    hw = half.reshape((-1,) + (1,) * len(tail))
    kron = np.sum(y * KRONROD_WEIGHTS.reshape(w_shape), axis=1)
    gauss = np.sum(y * GAUSS_WEIGHTS.reshape(w_shape), axis=1)
    mean = kron / 2.0
    resabs = np.sum(np.abs(y) * KRONROD_WEIGHTS.reshape(w_shape), axis=1) * np.abs(hw)
    resasc = np.sum(np.abs(y - mean[:, None]) * KRONROD_WEIGHTS.reshape(w_shape), axis=1) * np.abs(hw)
    kron = kron * hw
    err = np.abs((kron - gauss * hw))
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _UFLOW / (50.0 * _EPS), np.maximum(err, floor), err)
    if not (np.all(np.isfinite(kron)) and np.all(np.isfinite(err))):
        raise NonConvergence("integrand produced non-finite values")
    return kron, err


def _integrate_batched(f, a: float, b: float, rel_tol: float, abs_tol: float,
                       max_panels: int, initial_panels: int = 1):
    """Adaptive GK15 on [a, b] for (possibly vector-valued) f.

    Returns (value, error, nodes_used, converged); value and error carry the
    component shape of f.
    """
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err = _gk15_panels(f, lo, hi)
    nodes = 15 * lo.size
    width = b - a
    while True:
        order = np.argsort(lo, kind="stable")
        total = np.sum(val[order], axis=0)
        total_err = np.sum(err[order], axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return total, total_err, nodes, True
        if lo.size >= max_panels:
            return total, total_err, nodes, False
        safe_tol = np.where(tol > 0, tol, _UFLOW)
        score = err / safe_tol
        if score.ndim > 1:
            score = score.reshape(score.shape[0], -1).max(axis=1)
        share = (hi - lo) / width
        split = score > share
        if not np.any(split):
            split[np.argmax(score)] = True
        budget = max_panels - lo.size
        idx = np.flatnonzero(split)
        if idx.size > budget:
            idx = idx[np.argsort(-score[idx], kind="stable")[:budget]]
            split = np.zeros_like(split)
            split[idx] = True
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        nv, ne = _gk15_panels(f, new_lo, new_hi)
        nodes += 15 * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def integrate_vector(f, a: float, b: float, spec: QuadratureSpec | None = None, *,
                     singular: str | None = None, initial_panels: int = 1):
    """Vector-valued variant of :func:`integrate_adaptive`.

    ``f`` maps k nodes to an array of shape (k, m); all m components share
    one subdivision and each must meet the tolerance.  Returns
    ``(values, errors, nodes_used, converged)``.
    """
    spec = spec or DEFAULT_QUAD
    a, b = float(a), float(b)
    if not a < b:
        raise InvalidInterval(f"need a < b, got [{a}, {b}]")
    if singular is None:
        return _integrate_batched(f, a, b, spec.rel_tol, spec.abs_tol,
                                  spec.max_subdivisions, initial_panels)
    if singular == "both":
        m = 0.5 * (a + b)
        half = QuadratureSpec(spec.rel_tol, spec.abs_tol / 2,
                              max(1, spec.max_subdivisions // 2), spec.max_halfperiods)
        v1, e1, n1, c1 = integrate_vector(f, a, m, half, singular="left")
        v2, e2, n2, c2 = integrate_vector(f, m, b, half, singular="right")
        return v1 + v2, e1 + e2, n1 + n2, c1 and c2
    if singular not in ("left", "right"):
        raise ValueError(f"unknown singular flag {singular!r}")
    span = b - a

    def clustered(u):
        x = a + span * u * u if singular == "left" else b - span * u * u
        y = _evaluate(f, x)
        w = 2.0 * span * u
        return y * w.reshape((-1,) + (1,) * (y.ndim - 1))

    return _integrate_batched(clustered, 0.0, 1.0, spec.rel_tol, spec.abs_tol,
                              spec.max_subdivisions, initial_panels)


def integrate_adaptive(f: Callable, a: float, b: float, spec: QuadratureSpec | None = None, *,
                       singular: str | None = None, strict: bool = True) -> EvalResult:
    """Integrate ``f`` over the finite interval [a, b].

    ``singular`` declares an integrable endpoint singularity ("left",
    "right" or "both"); the affected end is resolved through x = a + (b-a)u^2
    (mirrored for the right end).

    Raises :class:`InvalidInterval` if a >= b and :class:`NonConvergence`
    when the subdivision budget runs out (unless ``strict=False``).
    """
    spec = spec or DEFAULT_QUAD
    val, err, nodes, ok = integrate_vector(f, a, b, spec, singular=singular)
    if np.ndim(val) != 0:
        raise ValueError("integrate_adaptive expects a scalar integrand; use integrate_vector")
    value = complex(val) if np.iscomplexobj(val) else float(val)
    res = EvalResult(value, float(err), int(nodes), bool(ok))
    if strict and not ok:
        raise NonConvergence(f"adaptive quadrature on [{a}, {b}] did not converge "
                             f"(estimate {float(err):.3e})", res)
    return res


def integrate_semi_infinite_oscillatory(g: Callable, frequency: float,
                                        spec: QuadratureSpec | None = None, *,
                                        singular: bool = False,
                                        strict: bool = True) -> EvalResult:
    """Integrate g(x) cos(frequency * x) over (0, inf).

    For frequency > 0 the half line is cut at the zeros (k + 1/2) pi / frequency
    of the cosine; segment integrals are summed in order and the partial sums
    are accelerated with the epsilon algorithm.  For frequency == 0 the half
    line is mapped onto (0, 1) by x = t / (1 - t).  ``singular`` flags an
    integrable singularity of g at x = 0.
    """
    spec = spec or DEFAULT_QUAD
    frequency = float(frequency)
    if frequency < 0:
        raise ValueError("frequency must be >= 0 (the cosine is even; pass |frequency|)")
    if frequency == 0.0:
        def mapped(t):
            x = t / (1.0 - t)
            return _evaluate(g, x) / (1.0 - t) ** 2
        val, err, nodes, ok = integrate_vector(
            mapped, 0.0, 1.0, spec, singular="left" if singular else None)
        value = complex(val) if np.iscomplexobj(val) else float(val)
        res = EvalResult(value, float(err), int(nodes), bool(ok))
        if strict and not ok:
            raise NonConvergence("semi-infinite quadrature did not converge", res)
        return res

    def seg_integrand(x):
        return _evaluate(g, x) * np.cos(frequency * x)

    half_period = math.pi / frequency
    partial: list = []
    seg_abs: list[float] = []
    total_seg_err = 0.0
    nodes = 0
    running = 0.0
    prev_est = None
    stable = 0
    window = 8
    estimate, est_err = 0.0, math.inf
    for k in range(spec.max_halfperiods):
        lo = 0.0 if k == 0 else (k - 0.5) * half_period
        hi = (k + 0.5) * half_period
        scale = max(abs(running), max(seg_abs) if seg_abs else 0.0)
        abs_tol = max(spec.abs_tol, 0.01 * spec.rel_tol * scale)
        sub = QuadratureSpec(spec.rel_tol, abs_tol, spec.max_subdivisions, spec.max_halfperiods)
        v, e, n, ok = integrate_vector(seg_integrand, lo, hi, sub,
                                       singular="left" if (singular and k == 0) else None)
        nodes += n
        if not ok:
            res = EvalResult(running + v, total_seg_err + float(e), nodes, False)
            raise NonConvergence(f"segment {k} of oscillatory quadrature did not converge", res)
        v = complex(v) if np.iscomplexobj(v) else float(v)
        total_seg_err += float(e)
        running = running + v
        partial.append(running)
        seg_abs.append(abs(v))
        tol = spec.tolerance(running)
        # plain convergence: two consecutive negligible segments
        if k >= 2 and seg_abs[-1] <= 0.1 * tol and seg_abs[-2] <= 0.1 * tol:
            estimate, est_err = running, seg_abs[-1] + total_seg_err
            return EvalResult(estimate, est_err, nodes, True)
        if k >= 4:
            acc = accelerate_alternating(partial[-min(len(partial), 40):])
            estimate = acc.value
            if prev_est is not None:
                est_err = abs(estimate - prev_est) + acc.error_estimate
                if est_err <= tol:
                    stable += 1
                    if stable >= 2:
                        return EvalResult(estimate, est_err + total_seg_err, nodes, True)
                else:
                    stable = 0
            prev_est = estimate
        if k >= 3 * window:
            recent = max(seg_abs[-window:])
            earlier = max(seg_abs[-2 * window:-window])
            if recent > earlier and recent > tol:
                res = EvalResult(estimate, est_err, nodes, False)
                raise DivergentTail("oscillation segments are not decreasing", res)
    res = EvalResult(estimate, float(est_err if math.isfinite(est_err) else seg_abs[-1]), nodes, False)
    if strict:
        raise NonConvergence("half-period budget exhausted", res)
    return res


def accelerate_alternating(partial_sums: Sequence) -> EvalResult:
    """Wynn's epsilon algorithm on a sequence of partial sums.

    With eps_{-1}^{(k)} = 0 and eps_0^{(k)} = s_k, the table is filled by
    eps_{p+1}^{(k)} = eps_{p-1}^{(k+1)} + 1 / (eps_p^{(k+1)} - eps_p^{(k)}).
    The returned value is the deepest even-column entry that uses the last
    partial sum.  The error estimate is the larger of its distance to the
    previous entry of the same column and to the deepest entry of the
    preceding even column.  A vanishing difference ends the table: the
    sequence is already stationary there.
    """
    s = [complex(v) if isinstance(v, complex) or np.iscomplexobj(v) else float(v)
         for v in partial_sums]
    n = len(s)
    if n < 3:
        raise SequenceTooShort("need at least 3 partial sums")
    prev = [0.0] * (n + 1)
    cur = list(s)
    evens = [cur]
    col = 0
    while len(cur) >= 2:
        nxt = []
        for k in range(len(cur) - 1):
            d = cur[k + 1] - cur[k]
            if d == 0:
                nxt = None
                break
            nxt.append(prev[k + 1] + 1.0 / d)
        if nxt is None:
            break
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            if not all(np.isfinite(v) for v in cur):
                break
            evens.append(cur)
    best = evens[-1]
    value = best[-1]
    errs = []
    if len(best) >= 2:
        errs.append(abs(best[-1] - best[-2]))
    if len(evens) >= 2:
        errs.append(abs(best[-1] - evens[-2][-1]))
    if not errs:
        errs.append(abs(s[-1] - s[-2]))
    err = errs[0]
    if isinstance(value, complex) and value.imag == 0 and all(not isinstance(v, complex) for v in s):
        value = value.real
    return EvalResult(value, float(err), n, True)


class _TermCache:
    """Lazily evaluated term list; lives for one summation call."""

    def __init__(self, term: Callable[[int], complex]):
        self.term = term
        self.values: list = []

    def ensure(self, count: int) -> np.ndarray:
        for j in range(len(self.values), count):
            self.values.append(self.term(j))
        return np.asarray(self.values[:count])


def _damped_sum(cache: _TermCache, r: float, tol: float, max_terms: int, run: int = 8):
    """Sum term(j) r^j until `run` consecutive weighted terms fall below
    tol (1 - r) max(1, |S|).  Returns (sum, terms_used) or None on budget."""
    count = min(max_terms, 64)
    while True:
        t = cache.ensure(count)
        w = t * r ** np.arange(count)
        s = np.cumsum(w)
        small = np.abs(w) <= tol * (1.0 - r) * np.maximum(1.0, np.abs(s))
        # first index ending a run of `run` small terms
        if count >= run:
            window = np.convolve(small.astype(int), np.ones(run, dtype=int), mode="valid")
            hits = np.flatnonzero(window == run)
            if hits.size:
                stop = int(hits[0]) + run
                return np.sum(w[:stop]), stop
        if count >= max_terms:
            return None
        count = min(max_terms, 2 * count)


def abel_partial(term: Callable[[int], complex], r: float, tol: float = 1e-12,
                 max_terms: int = 200_000) -> EvalResult:
    """Damped sum S(r) = sum_j term(j) r^j at a single radius 0 < r < 1."""
    if not 0.0 < r < 1.0:
        raise ValueError("radius must lie in (0, 1)")
    out = _damped_sum(_TermCache(term), r, tol, max_terms)
    if out is None:
        raise NonConvergence(f"damped sum at r={r} needs more than {max_terms} terms")
    value, used = out
    value = complex(value) if np.iscomplexobj(value) else float(value)
    return EvalResult(value, tol * max(1.0, abs(value)), used, True)


def _direct_sum(t: np.ndarray, tol: float, run: int = 8) -> EvalResult | None:
    mag = np.abs(t)
    s = np.cumsum(t)
    for stop in range(run, mag.size + 1):
        tail = mag[stop - run:stop]
        if tail[-1] > 0.1 * tol * max(1.0, abs(s[stop - 1])):
            continue
        if np.any(tail[:-1] == 0):
            q = 0.0 if np.all(tail == 0) else 1.0
        else:
            q = float(np.max(tail[1:] / tail[:-1]))
        if q >= 0.95:
            continue
        est = tail[-1] * q / (1.0 - q) if q > 0 else 0.0
        value = s[stop - 1]
        if est <= 0.1 * tol * max(1.0, abs(value)):
            value = complex(value) if np.iscomplexobj(value) else float(value)
            return EvalResult(value, float(est), stop, True)
    return None


def _neville_at_zero(h: Sequence[float], y: Sequence) -> complex:
    p = list(y)
    m = len(h)
    for level in range(1, m):
        for i in range(m - level):
            p[i] = (h[i + level] * p[i] - h[i] * p[i + 1]) / (h[i + level] - h[i])
    return p[0]


def abel_sum(term: Callable[[int], complex], spec: SeriesSpec | None = None, *,
             strict: bool = True) -> EvalResult:
    """Abel limit of sum_j term(j), i.e. lim_{r -> 1-} sum_j term(j) r^j.

    When the plain partial sums already settle (terms below ``tol`` for a
    run of indices within the term budget the damped sums need anyway), the
    direct sum is returned: by Abel's theorem it is the Abel limit.
    Otherwise S(r) is formed at each radius of the schedule and the values
    are extrapolated to r = 1 with a polynomial in (1 - r) through the last
    ``extrapolation_depth + 1`` radii.  The error estimate is twice the gap
    between that extrapolant and the one of one degree lower (or, at depth
    0, the gap between the two outermost damped sums).
    """
    spec = spec or DEFAULT_SERIES
    radii = spec.abel_radii
    if not radii:
        raise EmptyRadiiSchedule("abel_sum needs at least one radius")
    cache = _TermCache(term)
    sums = []
    used = 0
    for r in radii:
        out = _damped_sum(cache, r, spec.tol, spec.max_terms)
        if out is None:
            res = EvalResult(sums[-1] if sums else 0.0, 1.0, len(cache.values), False)
            raise NonConvergence(f"damped sum at r={r} needs more than {spec.max_terms} terms", res)
        sums.append(out[0])
        used = max(used, out[1])
    # direct convergence: with a geometric-looking tail below tolerance the
    # plain sum is the Abel limit
    t = cache.ensure(min(spec.max_terms, max(2 * used, 64)))
    direct = _direct_sum(t, spec.tol)
    if direct is not None:
        return direct
    h = [1.0 - r for r in radii]
    depth = min(spec.extrapolation_depth, len(radii) - 1)
    hs, ys = h[-(depth + 1):], sums[-(depth + 1):]
    value = _neville_at_zero(hs, ys)
    if depth >= 1:
        lower = _neville_at_zero(hs[1:], ys[1:])
        err = 2.0 * abs(value - lower)
    elif len(sums) >= 2:
        err = abs(sums[-1] - sums[-2])
    else:
        err = spec.tol * max(1.0, abs(value))
    value = complex(value) if np.iscomplexobj(value) else float(value)
    err = float(err) + spec.tol * max(1.0, abs(value)) * 1e-3
    ok = bool(err <= spec.tolerance(value))
    res = EvalResult(value, err, len(cache.values), ok)
    if strict and not ok:
        raise NonConvergence(f"Abel extrapolation error {err:.3e} above tolerance", res)
    return res


def richardson_inverse_power(values: Sequence, counts: Sequence[int], start_power: int = 1):
    """Extrapolate S(J) = S + c_1 / J^p + c_2 / J^(p+1) + ... to J = inf.

    ``counts`` must double from one entry to the next.  Returns
    (estimate, error_estimate) where the error is the gap between the two
    highest-order extrapolants.
    """
    if len(values) != len(counts) or len(values) < 2:
        raise SequenceTooShort("need at least two partial sums")
    for a, b in zip(counts, counts[1:]):
        if b != 2 * a:
            raise ValueError("counts must double")
    table = [list(values)]
    for level in range(1, len(values)):
        prev = table[-1]
        f = 2.0 ** (start_power + level - 1)
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1.0) for i in range(len(prev) - 1)])
    best = table[-1][0]
    second = table[-2][-1]
    return best, abs(best - second)

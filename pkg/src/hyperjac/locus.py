"""Theta-equation systems cutting out the AJ image of the curve, and tracing on them.

A :class:`ThetaSystem` is a list of shifts ``s_k`` with residual map ``u ->
(theta(u - s_k + K))_k``.  Magnitudes are always measured with the
lattice-invariant modulus ``|theta(v)| exp(-pi Im v . Y^{-1} . Im v)``,
divided by the system scale (median of that modulus over random Jacobian
points), so residuals are functions on the Jacobian.

Genus 3 (pair, triple) and genus 4 (pairs, quad) systems are provided with
the components their solution sets are predicted to have: the curve image
``u(X)``, shifted copies ``u(X) + u(D)`` and isolated points ``u(D)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from .ajmap import aj, local_inverse
from .curvegeom import Curve, CurvePoint, continue_segment, sample_points
from .errors import (
    AmbiguousClassification,
    CoincidentPoints,
    CorrectorDiverged,
    GenusMismatch,
    InputError,
    JEquivalentPair,
    ProjectionInconsistent,
    RankDegenerate,
)
from .jacobian import (
    from_char,
    lattice_distance,
    reduce,
    riemann_constants,
    theta_scale,
    to_char,
    weierstrass_char,
)
from .periods import PeriodData
from .theta import ThetaChar, theta_char_parts, theta_parts

TRACE_TOL = 1e-6
CORRECT_TOL = 1e-11
PROJECTION_TOL = 1e-6
SAME_POINT_RTOL = 1e-12
RCOND = 1e-6


@dataclass(frozen=True)
class ComponentLabel:
    """``kind`` is one of ``OnCurveImage``, ``OnShiftedImage``, ``IsolatedPoint``, ``NotASolution``."""

    kind: str
    ident: str | None = None

    def __str__(self):
        return self.kind if self.ident is None else f"{self.kind}({self.ident})"


@dataclass(frozen=True, eq=False)
class ThetaSystem:
    curve: Curve
    periods: PeriodData
    shifts: np.ndarray  # (m, g)
    K: np.ndarray
    scale: float
    name: str
    witnesses: dict  # name -> CurvePoint
    shifted_components: tuple = ()  # ((ident, shift), ...)
    isolated_points: tuple = ()  # ((ident, u), ...)
    shift_chars: tuple | None = None  # integer characteristics of the shifts, when known exactly
    K_char: ThetaChar | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def genus(self) -> int:
        return self.curve.genus

    @property
    def pi(self) -> np.ndarray:
        return self.periods.period_matrix


# -- construction -----------------------------------------------------------


def _same(p: CurvePoint, q: CurvePoint) -> bool:
    s = SAME_POINT_RTOL * max(1.0, abs(p.x), abs(p.w))
    return abs(p.x - q.x) <= s and abs(p.w - q.w) <= s


def _j_equivalent(p: CurvePoint, q: CurvePoint) -> bool:
    s = SAME_POINT_RTOL * max(1.0, abs(p.x), abs(p.w))
    return abs(p.x - q.x) <= s and abs(p.w + q.w) <= s


def _check_distinct(named):
    for (a, p), (b, q) in combinations(named.items(), 2):
        if _same(p, q):
            raise CoincidentPoints(f"auxiliary points {a} and {b} coincide")


def _check_genus(curve, g):
    if curve.genus != g:
        raise GenusMismatch(f"this system needs genus {g}, curve has genus {curve.genus}")


def _image(curve, periods, p):
    """AJ image and, for Weierstrass points, its exact table characteristic."""
    s = curve.weierstrass_index(p) if p.w == 0 else None
    if s is not None:
        c = weierstrass_char(s, curve.genus)
        return from_char(c, periods.period_matrix), c
    return aj(curve, periods, p), None


class _Images:
    def __init__(self, curve, periods, named):
        self.u = {}
        self.c = {}
        for k, p in named.items():
            self.u[k], self.c[k] = _image(curve, periods, p)
        self.pi = periods.period_matrix

    def sum(self, *keys):
        return reduce(sum(self.u[k] for k in keys), self.pi)

    def char_sum(self, *keys):
        if any(self.c[k] is None for k in keys):
            return None
        g = self.pi.shape[0]
        e = sum((self.c[k].eps for k in keys), np.zeros(g))
        ep = sum((self.c[k].eps_prime for k in keys), np.zeros(g))
        return ThetaChar(e, ep)


def _resolve_k(curve, periods, K):
    if K is not None:
        k = np.asarray(K, dtype=complex)
        c = to_char(k, periods.period_matrix)
        if np.allclose(c.eps, np.round(c.eps), atol=1e-9) and np.allclose(c.eps_prime, np.round(c.eps_prime), atol=1e-9):
            c = ThetaChar(np.round(c.eps), np.round(c.eps_prime))
        else:
            c = None
        return k, c
    k, c, _ = riemann_constants(curve, periods)
    return k, c


def _build(curve, periods, name, named, shift_keys, shifted, isolated, K):
    k, kc = _resolve_k(curve, periods, K)
    im = _Images(curve, periods, named)
    g = curve.genus
    shifts = np.array([im.sum(*keys) if keys else np.zeros(g, complex) for keys in shift_keys])
    chars = [im.char_sum(*keys) if keys else ThetaChar(np.zeros(g), np.zeros(g)) for keys in shift_keys]
    shift_chars = tuple(chars) if all(c is not None for c in chars) and kc is not None else None
    return ThetaSystem(
        curve=curve,
        periods=periods,
        shifts=shifts,
        K=k,
        scale=theta_scale(periods.period_matrix),
        name=name,
        witnesses=dict(named),
        shifted_components=tuple(("+".join(keys), im.sum(*keys)) for keys in shifted),
        isolated_points=tuple(("+".join(keys), im.sum(*keys)) for keys in isolated),
        shift_chars=shift_chars,
        K_char=kc,
    )


def system_g3_pair(curve: Curve, periods: PeriodData, P: CurvePoint, Q: CurvePoint, K=None) -> ThetaSystem:
    """Two equations with shifts ``u(P), u(Q)``; solutions ``u(X)`` and ``u(X) + u(P + Q)``.

    ``P = JQ`` is accepted; the two components then coincide.
    """
    _check_genus(curve, 3)
    named = {"P": P, "Q": Q}
    _check_distinct(named)
    return _build(curve, periods, "g3_pair", named, [("P",), ("Q",)], [("P", "Q")], [], K)


def system_g3_triple(curve: Curve, periods: PeriodData, P, Q, R, K=None) -> ThetaSystem:
    """Three equations; solutions ``u(X)`` and the single point ``u(P + Q + R)``."""
    _check_genus(curve, 3)
    named = {"P": P, "Q": Q, "R": R}
    _check_distinct(named)
    return _build(curve, periods, "g3_triple", named, [("P",), ("Q",), ("R",)], [], [("P", "Q", "R")], K)


def _check_pairs(named, pairs):
    for a, b in pairs:
        if _j_equivalent(named[a], named[b]):
            raise JEquivalentPair(f"{a} and {b} are exchanged by the involution")


def system_g4_pairs(curve: Curve, periods: PeriodData, P1, P2, Q1, Q2, K=None) -> ThetaSystem:
    """Shifts ``0, u(P1 + P2), u(Q1 + Q2)``; solutions ``u(X)`` and ``u(X) + u(P_j + Q_s)``."""
    _check_genus(curve, 4)
    named = {"P1": P1, "P2": P2, "Q1": Q1, "Q2": Q2}
    _check_distinct(named)
    _check_pairs(named, [("P1", "P2"), ("Q1", "Q2")])
    shifted = [(f"P{j}", f"Q{s}") for j, s in product((1, 2), repeat=2)]
    return _build(curve, periods, "g4_pairs", named, [(), ("P1", "P2"), ("Q1", "Q2")], shifted, [], K)


def system_g4_quad(curve: Curve, periods: PeriodData, P1, P2, Q1, Q2, R1, R2, K=None) -> ThetaSystem:
    """Four equations; solutions ``u(X)`` and the eight points ``u(P_j + Q_k + R_s)``."""
    _check_genus(curve, 4)
    named = {"P1": P1, "P2": P2, "Q1": Q1, "Q2": Q2, "R1": R1, "R2": R2}
    _check_distinct(named)
    _check_pairs(named, [("P1", "P2"), ("Q1", "Q2"), ("R1", "R2")])
    isolated = [(f"P{j}", f"Q{k}", f"R{s}") for j, k, s in product((1, 2), repeat=3)]
    return _build(
        curve, periods, "g4_quad", named, [(), ("P1", "P2"), ("Q1", "Q2"), ("R1", "R2")], [], isolated, K
    )


# -- residuals and Gauss-Newton ---------------------------------------------


def _evaluate(system: ThetaSystem, u, want_grad: bool):
    """Normalized values (and gradients) of the equations at ``u``, divided by the scale."""
    u = np.asarray(u, dtype=complex)
    vals = np.empty(len(system.shifts), dtype=complex)
    grads = np.empty((len(system.shifts), system.genus), dtype=complex) if want_grad else None
    for k, s in enumerate(system.shifts):
        ev = theta_parts(u - s + system.K, system.pi, want_grad=want_grad)
        vals[k] = ev.value / system.scale
        if want_grad:
            grads[k] = ev.grad / system.scale
    return vals, grads


def residuals(system: ThetaSystem, u) -> np.ndarray:
    """Invariant moduli of the equations at ``u`` relative to the system scale."""
    return np.abs(_evaluate(system, u, False)[0])


def residuals_char(system: ThetaSystem, u) -> np.ndarray:
    """Same residuals through theta functions with integer characteristics.

    Available when all shifts and ``K`` have exact integer characteristics
    (auxiliary points chosen among the branch points): equation ``k`` is
    ``theta[char(K) - char(s_k)](u)``.
    """
    if system.shift_chars is None:
        raise InputError("residuals_char needs auxiliary points among the branch points")
    out = []
    for c in system.shift_chars:
        kappa = ThetaChar(system.K_char.eps - c.eps, system.K_char.eps_prime - c.eps_prime)
        val, _, _ = theta_char_parts(kappa, u, system.pi)
        out.append(abs(val) / system.scale)
    return np.array(out)


def _gn_step(vals, grads, drop: float = 1e-3):
    """Minimal-norm least-squares step of the real 2m x 2g linearization.

    Rows whose gradient is below ``drop`` times the largest are left out:
    there the equation vanishes to second order (e.g. ``theta(u + K)`` along
    the whole curve image in genus 4) and its linearization only slows the
    iteration down to a linear rate.  Singular values below ``1e-6`` of the
    largest are truncated, so no step is taken along the (nearly) null
    direction of the curve component.
    """
    norms = np.linalg.norm(grads, axis=1)
    keep = norms >= drop * norms.max()
    vals, grads = vals[keep], grads[keep]
    gr, gi = grads.real, grads.imag
    a = np.block([[gr, -gi], [gi, gr]])
    b = -np.concatenate([vals.real, vals.imag])
    x = np.linalg.lstsq(a, b, rcond=RCOND)[0]
    g = grads.shape[1]
    return x[:g] + 1j * x[g:]


def correct(system: ThetaSystem, u, tol: float = CORRECT_TOL, max_iter: int = 25, accept: float = TRACE_TOL):
    """Gauss-Newton from ``u`` onto the solution set; returns ``(u, max residual)``.

    Stops when the residual drops below ``tol``, or when it stops
    decreasing (halving per iteration) after reaching ``accept``; then the
    best iterate is returned.
    """
    u = np.asarray(u, dtype=complex).copy()
    best_u, best_r = u, np.inf
    prev = np.inf
    for _ in range(max_iter):
        vals, grads = _evaluate(system, u, True)
        r = float(np.max(np.abs(vals)))
        if r < best_r:
            best_u, best_r = u, r
        if r < tol:
            return u, r
        if r > 0.5 * prev and best_r < accept:
            return best_u, best_r
        prev = r
        u = u + _gn_step(vals, grads)
    if best_r < accept:
        return best_u, best_r
    raise CorrectorDiverged(f"Gauss-Newton stalled at residual {best_r:.3g}")


def tangent(system: ThetaSystem, u, prev=None):
    """Unit null vector of the complex equation Jacobian at ``u``, and its singular values.

    Phase-aligned with ``prev`` when given.  Raises :class:`RankDegenerate`
    when the two smallest singular values (the null one counted as 0 when
    there are fewer equations than unknowns) are within a factor 10.
    """
    _, grads = _evaluate(system, u, True)
    g = system.genus
    _, s, vh = np.linalg.svd(grads)
    sv = np.zeros(g)
    sv[: len(s)] = s
    t = vh[g - 1].conj()
    floor = max(sv[g - 1], 1e-6 * sv[0])
    if sv[g - 2] < 10.0 * floor:
        raise RankDegenerate(f"singular values {sv[g - 2]:.3g}, {sv[g - 1]:.3g} too close")
    if prev is not None:
        ph = np.vdot(prev, t)
        t = t * (abs(ph) / ph) if ph != 0 else t
    return t, sv


def project_to_x(periods: PeriodData, t):
    """``x`` from a tangent to the curve image; returns ``(x, spread)``.

    ``v = C^{-1} t`` is proportional to ``(1, x, .., x^{g-1})``.  ``x`` is the
    least-squares common ratio of consecutive entries and ``spread`` the
    largest relative deviation from it.  Raises
    :class:`ProjectionInconsistent` when ``spread`` exceeds the tolerance.
    """
    return _project(periods, t, PROJECTION_TOL)


def _project(periods, t, tol):
    v = np.linalg.solve(periods.normalizer, np.asarray(t, dtype=complex))
    g = len(v)
    if g < 2:
        raise InputError("x-projection needs genus >= 2")
    if not np.any(v):
        raise InputError("zero tangent")
    lo, hi = v[:-1], v[1:]
    x = complex(np.vdot(lo, hi) / np.vdot(lo, lo))
    spread = float(np.max(np.abs(hi - x * lo)) / (np.linalg.norm(v) * max(1.0, abs(x))))
    if tol is not None and spread > tol:
        raise ProjectionInconsistent(f"tangent ratios spread {spread:.3g}")
    return x, spread


def reconstruct_w(system: ThetaSystem, u, t, eps: float | None = None, half_width: int = 2):
    """``w`` at the curve point over ``x_proj`` from four nearby corrected samples.

    With ``z_j = (C^{-1} u)_j`` one has ``dz_j = x^{j-1} dx / w``.  For
    ``|x| <= 1`` the quartic interpolating ``x`` against ``z_1`` gives ``w =
    dx/dz_1``; for ``|x| > 1`` the one interpolating ``y = 1/x`` against
    ``z_g`` gives ``w = -x^(g+1) dy/dz_g``, which stays analytic at infinity.
    Probes sit at offsets ``-2, -1, 1, 2`` times ``eps`` along ``t``
    (default ``1e-4 * ||Pi||_inf``, balancing truncation against the
    corrector's accuracy).
    """
    if eps is None:
        eps = 1e-2 * default_step(system)
    c = system.periods.normalizer
    g = system.genus
    x0, _ = _project(system.periods, t, None)
    far = abs(x0) > 1.0
    j = g - 1 if far else 0
    offsets = range(-half_width, half_width + 1)
    zs, ys = [], []
    for k in offsets:
        if k == 0:
            uk, xk = u, x0
        else:
            uk, _ = correct(system, u + k * eps * t, tol=1e-14)
            xk = _project(system.periods, tangent(system, uk, t)[0], None)[0]
        zs.append(np.linalg.solve(c, uk)[j])
        ys.append(1.0 / xk if far else xk)
    zs = np.array(zs) - zs[half_width]
    coef = np.linalg.solve(np.vander(zs, len(zs), increasing=True), np.array(ys))
    w = -(x0 ** (g + 1)) * coef[1] if far else coef[1]
    return x0, complex(w)


# -- tracing -----------------------------------------------------------------


@dataclass(frozen=True)
class TraceSample:
    u: np.ndarray
    tangent: np.ndarray
    x_proj: complex
    residual: float
    spread: float
    w: complex | None = None
    flagged: bool = False


@dataclass(frozen=True)
class TraceResult:
    samples: tuple
    steps_rejected: int

    def __len__(self):
        return len(self.samples)


def default_step(system: ThetaSystem) -> float:
    return 1e-2 * float(np.max(np.sum(np.abs(system.pi), axis=1)))


def trace(
    system: ThetaSystem,
    seed,
    step: float | None = None,
    n_steps: int = 100,
    tol: float = TRACE_TOL,
    with_w: bool = False,
    direction=None,
) -> TraceResult:
    """Predictor-corrector continuation along the curve component through ``seed``.

    The initial tangent is phased so that ``(C^{-1} t)_1`` is real positive
    unless ``direction`` is given.  Steps are halved on corrector failure
    and doubled after five clean accepts, never above the initial step.
    Near component crossings (rank degeneracy) the step is halved once and
    the sample flagged if degeneracy persists.
    """
    h0 = default_step(system) if step is None else float(step)
    h = h0
    u, r = correct(system, seed)
    t, _ = tangent(system, u)
    if direction is not None:
        t = t * np.exp(-1j * np.angle(np.vdot(direction, t)))
    else:
        v1 = np.linalg.solve(system.periods.normalizer, t)[0]
        if v1 != 0:
            t = t * np.exp(-1j * np.angle(v1))
    samples = [_sample(system, u, t, r, with_w, False)]
    clean = 0
    rejected = 0
    while len(samples) <= n_steps:
        flagged = False
        try:
            u_new, r_new = correct(system, u + h * t)
            moved = np.linalg.norm(u_new - u)
            if not 0.5 * h < moved < 1.5 * h:
                raise CorrectorDiverged("corrector left the step neighbourhood")
            try:
                t_new, _ = tangent(system, u_new, t)
            except RankDegenerate:
                if h > h0 / 4:
                    raise
                t_new = t
                flagged = True
            if r_new >= tol:
                raise CorrectorDiverged(f"residual {r_new:.3g} above tolerance")
        except (CorrectorDiverged, RankDegenerate):
            rejected += 1
            clean = 0
            h *= 0.5
            if h < 1e-6 * h0:
                raise CorrectorDiverged("step size underflow while tracing")
            continue
        u, t = u_new, t_new
        samples.append(_sample(system, u, t, r_new, with_w, flagged))
        clean += 1
        if clean >= 5 and h < h0:
            h = min(2 * h, h0)
            clean = 0
    return TraceResult(tuple(samples), rejected)


def _sample(system, u, t, r, with_w, flagged):
    x, spread = _project(system.periods, t, None)
    w = reconstruct_w(system, u, t)[1] if with_w else None
    return TraceSample(u.copy(), t.copy(), x, r, spread, w, flagged)


def follow_x_path(system: ThetaSystem, u0, w0: complex, xs, tol: float = TRACE_TOL, max_refine: int = 6):
    """Move along the curve component so that ``x_proj`` visits the points ``xs``.

    Each step repeats ``du = C (1, x, ..)^T (x_target - x) / w`` followed by
    the theta-system corrector until ``x_proj`` hits the target, so no
    tangential drift accumulates.  ``w`` is carried by exact continuation
    between consecutive projections.  ``u0`` must project to ``xs[0]`` with
    sheet value ``w0``.  Returns the list of ``(u, x_proj, w)``.
    """
    c = system.periods.normalizer
    g = system.genus
    u, x, w = np.asarray(u0, dtype=complex), complex(xs[0]), complex(w0)
    out = [(u, x, w)]
    for target in xs[1:]:
        for _ in range(max_refine):
            du = c @ (x ** np.arange(g)) / w * (target - x)
            u, r = correct(system, u + du)
            if r >= tol:
                raise CorrectorDiverged(f"residual {r:.3g} above tolerance")
            x_new, _ = project_to_x(system.periods, tangent(system, u)[0])
            w = complex(continue_segment(system.curve, x, w, x_new))
            x = x_new
            if abs(x - target) < 1e-11 * max(1.0, abs(target)):
                break
        out.append((u, x, w))
    return out


# -- classification and verification ----------------------------------------


def _curve_seeds(system: ThetaSystem, n: int = 60):
    seeds = system._cache.get("seeds")
    if seeds is None:
        curve, periods = system.curve, system.periods
        rng = np.random.default_rng(12345)
        pts = sample_points(curve, n, rng, min_distance=0.15 * curve.min_separation, pad=2.0)
        pts += [curve.weierstrass_point(s) for s in range(1, 2 * curve.genus + 3)]
        seeds = [(p, aj(curve, periods, p)) for p in pts]
        system._cache["seeds"] = seeds
    return seeds


def on_curve_image(system: ThetaSystem, u, tol: float = 1e-7, n_tries: int = 3):
    """Lattice distance from ``u`` to ``u(X)`` by local AJ inversion from the nearest seeds."""
    pi = system.pi
    seeds = _curve_seeds(system)
    order = sorted(seeds, key=lambda s: lattice_distance(u, s[1], pi))
    best = np.inf
    for p, _ in order[:n_tries]:
        _, d = local_inverse(system.curve, system.periods, u, p, tol=0.1 * tol)
        best = min(best, d)
        if best < tol:
            break
    return best


def classify(system: ThetaSystem, u, tol: float = TRACE_TOL, member_tol: float = 1e-7) -> ComponentLabel:
    """Component of the solution set containing ``u``.

    ``NotASolution`` unless every residual is below ``tol``.  Candidates are
    the isolated points within ``member_tol`` (lattice distance) and the
    curve image or shifted copies containing ``u`` by local AJ inversion.
    Raises :class:`AmbiguousClassification` when more than one matches.
    """
    if np.max(residuals(system, u)) >= tol:
        return ComponentLabel("NotASolution")
    pi = system.pi
    found = []
    for ident, p in system.isolated_points:
        if lattice_distance(u, p, pi) < member_tol:
            found.append(ComponentLabel("IsolatedPoint", ident))
    comps = [(None, np.zeros(system.genus, complex))] + list(system.shifted_components)
    for ident, s in comps:
        if on_curve_image(system, reduce(u - s, pi), member_tol) < member_tol:
            found.append(ComponentLabel("OnCurveImage") if ident is None else ComponentLabel("OnShiftedImage", ident))
    if not found:
        return ComponentLabel("NotASolution")
    if len(found) > 1:
        raise AmbiguousClassification([str(c) for c in found])
    return found[0]


def forward_inclusion(system: ThetaSystem, n: int = 50, seed: int = 0):
    """Worst residual over ``n`` random points of every predicted component."""
    curve, periods, pi = system.curve, system.periods, system.pi
    rng = np.random.default_rng(seed)
    pts = sample_points(curve, n, rng)
    images = [aj(curve, periods, p) for p in pts]
    out = {"u(X)": max(float(np.max(residuals(system, v))) for v in images)}
    for ident, s in system.shifted_components:
        out[f"u(X)+u({ident})"] = max(float(np.max(residuals(system, reduce(v + s, pi)))) for v in images)
    for ident, p in system.isolated_points:
        out[f"u({ident})"] = float(np.max(residuals(system, p)))
    return out


def exclusion(system: ThetaSystem, n: int = 200, seed: int = 0):
    """Smallest max-residual over ``n`` uniform random Jacobian points."""
    rng = np.random.default_rng(seed)
    g = system.genus
    worst = np.inf
    for _ in range(n):
        c = ThetaChar(rng.uniform(0, 2, g), rng.uniform(0, 2, g))
        worst = min(worst, float(np.max(residuals(system, from_char(c, system.pi)))))
    return worst


def isolation(system: ThetaSystem, point, n: int = 10, size: float = 1e-2, seed: int = 0):
    """Largest lattice distance back to ``point`` after Gauss-Newton from ``n`` perturbations."""
    rng = np.random.default_rng(seed)
    g = system.genus
    worst = 0.0
    for _ in range(n):
        d = rng.normal(size=g) + 1j * rng.normal(size=g)
        d *= size / np.linalg.norm(d)
        try:
            v, _ = correct(system, point + d)
            worst = max(worst, lattice_distance(v, point, system.pi))
        except CorrectorDiverged:
            worst = np.inf
    return worst


def shifted_violation(system: ThetaSystem, shift, k: int, n: int = 20, seed: int = 0):
    """Smallest residual of equation ``k`` over random points of ``u(X) + shift``."""
    curve, periods, pi = system.curve, system.periods, system.pi
    rng = np.random.default_rng(seed)
    pts = sample_points(curve, n, rng)
    return min(float(residuals(system, reduce(aj(curve, periods, p) + shift, pi))[k]) for p in pts)

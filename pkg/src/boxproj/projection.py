"""L2 projection onto the lattice shifts of a box spline, on a truncated window.

The projector solves the normal equations: a banded Gram system whose
entries are shift autocorrelations of the spline.  Everything is set up
at mesh size h by rescaling; the coefficient field of the projection of
f at mesh h equals that of f(h .) at mesh 1, so quadrature rules are
precomputed once in lattice coordinates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import DirectionSet, _coerce
from .boxspline import BoxSplineEvaluator
from . import quadrature

MAX_UNKNOWNS = 600_000
RESIDUAL_TOL = 1e-12


class SolverError(RuntimeError):
    """Normal-equation solve failed or left a residual above tolerance."""


def _value_fn(f):
    return f.value if hasattr(f, "value") else f


def autocorrelation(V, offset, order: int = 10, route: str = "quadrature") -> float:
    """Inner product of the spline with its shift by an integer offset.

    route='quadrature' integrates B(x) B(x - offset) with cut-aware cells;
    route='doubled' evaluates the box spline of the doubled direction set
    V union -V at the offset, which equals the same integral.
    """
    V = _coerce(V)
    offset = tuple(int(g) for g in offset)
    if route == "doubled":
        doubled = DirectionSet(V.vectors + tuple(tuple(-x for x in v) for v in V.vectors))
        return float(BoxSplineEvaluator(doubled)(np.array(offset, dtype=float)))
    if route != "quadrature":
        raise ValueError(f"unknown route {route!r}")
    spline = BoxSplineEvaluator(V)
    g = np.array(offset, dtype=float)
    lo = np.maximum(spline.support_lo, spline.support_lo + g)
    hi = np.minimum(spline.support_hi, spline.support_hi + g)
    if np.any(hi - lo < 1e-12):
        return 0.0
    cuts = spline.knot_cut_families(1.0) if V.dimension <= 2 else ()
    val = quadrature.integrate(
        lambda X: spline(X) * spline(X - g), lo, hi, cuts=cuts, order=order, spacing=1.0
    )
    return float(val)


def autocorrelation_table(V, order: int = 10, route: str = "quadrature",
                          drop_tol: float = 1e-14) -> dict[tuple[int, ...], float]:
    """All nonzero shift autocorrelations, keyed by integer offset."""
    V = _coerce(V)
    spline = BoxSplineEvaluator(V)
    lo = np.rint(spline.support_lo - spline.support_hi).astype(int)
    hi = np.rint(spline.support_hi - spline.support_lo).astype(int)
    table: dict[tuple[int, ...], float] = {}
    for idx in itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
        val = autocorrelation(V, idx, order=order, route=route)
        if abs(val) > drop_tol:
            table[idx] = val
    return table


@dataclass
class CoefficientField:
    """Spline coefficients on an integer window."""

    window_lo: tuple[int, ...]
    values: np.ndarray
    residual: float = 0.0

    def value_at(self, alpha) -> float:
        idx = tuple(int(a) - lo for a, lo in zip(alpha, self.window_lo))
        if any(i < 0 or i >= s for i, s in zip(idx, self.values.shape)):
            return 0.0
        return float(self.values[idx])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        out = {}
        for idx in np.ndindex(self.values.shape):
            key = tuple(i + lo for i, lo in zip(idx, self.window_lo))
            out[key] = float(self.values[idx])
        return out


@dataclass
class SplineSpaceModel:
    """Precomputed machinery for projecting at one mesh size.

    Holds the window (in lattice units), the Gram table, and a quadrature
    rule over the spline support with the spline values baked in, so each
    right-hand side costs one batch of f evaluations.
    """

    V: DirectionSet
    h: float
    window_lo: np.ndarray
    window_shape: tuple[int, ...]
    gram: dict[tuple[int, ...], float]
    evaluator: BoxSplineEvaluator
    rule_points: np.ndarray
    rule_weights: np.ndarray
    padding: int
    _lu: object = field(default=None, repr=False)

    @property
    def unknowns(self) -> int:
        return int(np.prod(self.window_shape))

    def window_alphas(self) -> np.ndarray:
        grids = np.meshgrid(*[np.arange(s) for s in self.window_shape], indexing="ij")
        return self.window_lo + np.stack([g.ravel() for g in grids], axis=-1)

    def matrix(self) -> sp.csc_matrix:
        dims = self.window_shape
        rows, cols, vals = [], [], []
        for gamma, a in self.gram.items():
            ranges = [
                np.arange(max(0, g), s + min(0, g)) for g, s in zip(gamma, dims)
            ]
            if any(len(r) == 0 for r in ranges):
                continue
            grids = np.meshgrid(*ranges, indexing="ij")
            alpha_idx = np.stack([g.ravel() for g in grids], axis=-1)
            beta_idx = alpha_idx - np.array(gamma)
            rows.append(np.ravel_multi_index(alpha_idx.T, dims))
            cols.append(np.ravel_multi_index(beta_idx.T, dims))
            vals.append(np.full(len(alpha_idx), a))
        n = self.unknowns
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        ).tocsc()

    def _factorization(self):
        if self._lu is None:
            self._lu = spla.splu(self.matrix())
        return self._lu


def build_model(V, h: float, f=None, padding: int | None = None, box=None,
                order: int = 10, gram_order: int = 10) -> SplineSpaceModel:
    """Assemble window, Gram table and support quadrature for mesh size h.

    The window collects every shift whose support touches the effective
    box of f (or the explicit `box`), inflated by `padding` cells; the
    default padding is three support diameters.
    """
    V = _coerce(V)
    d = V.dimension
    spline = BoxSplineEvaluator(V)
    if box is None:
        if f is None or f.effective_box() is None:
            raise ValueError("need f with an effective box, or an explicit box")
        box = f.effective_box()
    blo = np.asarray(box[0], dtype=float)
    bhi = np.asarray(box[1], dtype=float)
    zlo, zhi = spline.support_lo, spline.support_hi
    if padding is None:
        padding = 3 * int(np.max(zhi - zlo))
    wlo = np.floor(blo / h - padding - zhi).astype(int)
    whi = np.ceil(bhi / h + padding - zlo).astype(int)
    shape = tuple(int(b - a + 1) for a, b in zip(wlo, whi))
    if int(np.prod(shape)) > MAX_UNKNOWNS:
        raise ValueError(f"window of {np.prod(shape)} unknowns exceeds cap")
    gram = autocorrelation_table(V, order=gram_order)
    cuts = spline.knot_cut_families(1.0) if d <= 2 else ()
    base_pts, base_wts = quadrature.cell_rule([0.0] * d, [1.0] * d, cuts, order)
    cells = np.stack(
        [g.ravel() for g in np.meshgrid(
            *[np.arange(int(a), int(b)) for a, b in zip(np.rint(zlo), np.rint(zhi))],
            indexing="ij")],
        axis=-1,
    )
    pts, wts = quadrature.tile_rule(base_pts, base_wts, cells)
    bvals = spline(pts)
    keep = np.abs(bvals * wts) > 0
    return SplineSpaceModel(
        V=V,
        h=float(h),
        window_lo=wlo,
        window_shape=shape,
        gram=gram,
        evaluator=spline,
        rule_points=pts[keep],
        rule_weights=(wts * bvals)[keep],
        padding=padding,
    )


def project(model: SplineSpaceModel, f, chunk: int = 2000) -> CoefficientField:
    """Coefficients of the L2 projection of f onto the model's window.

    Right-hand sides are h^-d integral f B(./h - alpha) = integral of
    f(h(y + alpha)) against the reference spline rule.  The banded system
    is solved by sparse LU, cached on the model; the relative residual
    must come out below 1e-12.
    """
    fv = _value_fn(f)
    h, d = model.h, model.V.dimension
    alphas = model.window_alphas()
    nq = len(model.rule_weights)
    b = np.empty(len(alphas))
    for start in range(0, len(alphas), chunk):
        blk = alphas[start:start + chunk]
        pts = h * (blk[:, None, :] + model.rule_points[None, :, :])
        vals = np.asarray(fv(pts.reshape(-1, d)), dtype=float)
        b[start:start + chunk] = vals.reshape(len(blk), nq) @ model.rule_weights
    try:
        lu = model._factorization()
        c = lu.solve(b)
    except (RuntimeError, ValueError) as exc:
        raise SolverError(f"normal-equation factorization failed: {exc}") from exc
    if not np.all(np.isfinite(c)):
        raise SolverError("normal-equation solve produced non-finite values")
    resid = model.matrix() @ c - b
    scale = max(float(np.linalg.norm(b)), 1e-300)
    rel = float(np.linalg.norm(resid)) / scale
    if rel > RESIDUAL_TOL:
        raise SolverError(f"relative residual {rel:.3e} above {RESIDUAL_TOL}")
    return CoefficientField(
        window_lo=tuple(int(a) for a in model.window_lo),
        values=c.reshape(model.window_shape),
        residual=rel,
    )


def spline_values(model: SplineSpaceModel, coeffs: CoefficientField, x) -> np.ndarray:
    """Evaluate sum_alpha c_alpha B(x/h - alpha) at the points x."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    X = np.atleast_2d(pts) / model.h
    d = model.V.dimension
    zlo = np.rint(model.evaluator.support_lo).astype(int)
    zhi = np.rint(model.evaluator.support_hi).astype(int)
    base = np.floor(X).astype(int)
    out = np.zeros(len(X))
    wlo = np.array(coeffs.window_lo)
    dims = coeffs.values.shape
    for delta in itertools.product(*[range(1 - hi_j, -lo_j + 1) for lo_j, hi_j in zip(zlo, zhi)]):
        alpha = base + np.array(delta)
        idx = alpha - wlo
        ok = np.all((idx >= 0) & (idx < np.array(dims)), axis=1)
        if not ok.any():
            continue
        cvals = np.zeros(len(X))
        cvals[ok] = coeffs.values[tuple(idx[ok].T)]
        live = cvals != 0.0
        if not live.any():
            continue
        bv = np.zeros(len(X))
        bv[live] = model.evaluator(X[live] - alpha[live])
        out += cvals * bv
    return float(out[0]) if single else out


def error_norm(f, model: SplineSpaceModel, coeffs: CoefficientField, p: float,
               domain=None, order: int = 10) -> tuple[float, float]:
    """Lp norm (and its p-th power) of f minus its projection over a box.

    The box is snapped outward to the mesh; cells are split along the
    knot lines of the shifted splines so the piecewise-smooth integrand
    is handled cleanly.
    """
    fv = _value_fn(f)
    h = model.h
    if domain is None:
        box = f.effective_box()
        if box is None:
            raise ValueError("need an explicit domain for non-decaying f")
        domain = box
    lo = np.floor(np.asarray(domain[0], dtype=float) / h) * h
    hi = np.ceil(np.asarray(domain[1], dtype=float) / h) * h
    cuts = model.evaluator.knot_cut_families(h) if model.V.dimension <= 2 else ()

    def integrand(X):
        return np.abs(fv(X) - spline_values(model, coeffs, X)) ** p

    power = float(quadrature.integrate(integrand, lo, hi, cuts=cuts, order=order,
                                       spacing=h))
    return power ** (1.0 / p), power


def residual_orthogonality(f, model: SplineSpaceModel, coeffs: CoefficientField,
                           alphas, order: int = 10) -> float:
    """Max over the given shifts of |<f - Pf, B(./h - alpha)>|, recomputed
    by direct quadrature (independent of the assembly path)."""
    fv = _value_fn(f)
    h = model.h
    zlo, zhi = model.evaluator.support_lo, model.evaluator.support_hi
    cuts = model.evaluator.knot_cut_families(h) if model.V.dimension <= 2 else ()
    worst = 0.0
    for alpha in alphas:
        a = np.asarray(alpha, dtype=float)

        def integrand(X, a=a):
            diff = fv(X) - spline_values(model, coeffs, X)
            return diff * model.evaluator(X / h - a)

        val = quadrature.integrate(
            integrand, h * (a + zlo), h * (a + zhi), cuts=cuts, order=order, spacing=h
        )
        worst = max(worst, abs(float(val)))
    return worst


def gram_symbol_range(V, grid: int = 64, order: int = 10) -> tuple[float, float]:
    """Min and max of the Gram symbol sum_gamma a(gamma) cos(2 pi gamma.w).

    A positive minimum certifies the shifts form a Riesz basis, hence the
    normal equations are uniformly well posed.
    """
    V = _coerce(V)
    table = autocorrelation_table(V, order=order)
    d = V.dimension
    axes = [np.linspace(0.0, 1.0, grid, endpoint=False) for _ in range(d)]
    grids = np.meshgrid(*axes, indexing="ij")
    w = np.stack([g.ravel() for g in grids], axis=-1)
    sym = np.zeros(len(w))
    for gamma, a in table.items():
        sym += a * np.cos(2.0 * np.pi * (w @ np.array(gamma, dtype=float)))
    return float(sym.min()), float(sym.max())

"""Box splines: pointwise evaluation and Fourier-side derivatives.

The spline attached to a direction set V in R^d is the distribution whose
pairing with a continuous f equals the integral of f(V u) over the unit
cube in R^n.  Its Fourier transform is the product over v in V of the
factor (1 - exp(-2 pi i t)) / (2 pi i t) evaluated at t = xi.v.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .lattice import (
    DirectionSet,
    MultiIndex,
    _coerce,
    _integer_kernel_vector,
    integer_rank,
    nonorthogonal_directions,
    product_derivative,
)
from . import quadrature

TWO_PI_I = 2j * np.pi
MAX_DERIVATIVE_ORDER = 12
_SINC_TAYLOR_RADIUS = 1e-3
_MOMENT_TAYLOR_RADIUS = 0.5
_MOMENT_TAYLOR_TERMS = 40


def sinc_factor(t):
    """(1 - exp(-2 pi i t)) / (2 pi i t), the per-direction transform factor.

    Entire in t; near zero a degree-10 Taylor series avoids the 0/0.
    """
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SINC_TAYLOR_RADIUS
    safe = np.where(small, 1.0, t)
    direct = (1.0 - np.exp(-TWO_PI_I * t)) / (TWO_PI_I * safe)
    z = -TWO_PI_I * t
    series = np.zeros_like(direct)
    term = np.ones_like(z)
    for j in range(11):
        series = series + term / math.factorial(j + 1)
        term = term * z
    out = np.where(small, series, direct)
    if out.ndim == 0:
        return complex(out)
    return out


@lru_cache(maxsize=None)
def _moment_series_coeffs(k: int):
    # m_k(t) = integral of u^k exp(-2 pi i u t) du over [0,1]
    #        = sum_j z^j / (j! (k + j + 1)) with z = -2 pi i t
    return tuple(
        1.0 / (math.factorial(j) * (k + j + 1))
        for j in range(_MOMENT_TAYLOR_TERMS + 1)
    )


def _moments(kmax: int, t):
    """m_0..m_kmax at t, stable both near and away from zero.

    Away from zero the upward recurrence
        m_k = (k m_{k-1} - exp(-2 pi i t)) / (2 pi i t)
    is used; below |t| = 0.5 it loses digits (each step multiplies the
    error by about k / (2 pi |t|)), so the Taylor series takes over there.
    """
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _MOMENT_TAYLOR_RADIUS
    safe = np.where(small, 1.0, t)
    out = []
    e = np.exp(-TWO_PI_I * t)
    mk = (1.0 - e) / (TWO_PI_I * safe)
    for k in range(kmax + 1):
        if k > 0:
            mk = (k * mk - e) / (TWO_PI_I * safe)
        if np.any(small):
            coeffs = _moment_series_coeffs(k)
            z = np.asarray(-TWO_PI_I * t, dtype=complex)
            acc = np.zeros_like(z)
            for c in reversed(coeffs):
                acc = acc * z + c
            mk = np.where(small, acc, mk)
        out.append(mk)
    return out


def sinc_factor_derivative(k: int, t):
    """k-th derivative of the transform factor; k up to 12."""
    if not 0 <= k <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be in 0..{MAX_DERIVATIVE_ORDER}")
    m = _moments(k, t)[k]
    val = (-TWO_PI_I) ** k * m
    if np.ndim(val) == 0:
        return complex(val)
    return val


def fourier_transform(V, xi):
    """Transform of the box spline at frequency xi (vector or (m, d) array)."""
    V = _coerce(V)
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    pts = np.atleast_2d(xi)
    dots = pts @ np.array(V.vectors, dtype=float).T
    vals = np.ones(len(pts), dtype=complex)
    for i in range(len(V)):
        vals = vals * sinc_factor(dots[:, i])
    return complex(vals[0]) if single else vals


def transform_derivative(V, beta, freq, route: str = "auto") -> complex:
    """D^beta of the transform, at a nonzero integer frequency.

    route='leibniz' expands the product rule over all ways of distributing
    the derivatives; route='factored' uses the closed form valid when the
    derivative order equals the number of directions not orthogonal to
    freq (each such factor takes exactly one derivative, every other
    assignment kills a factor at an integer).  route='auto' picks the
    closed form or a structural zero; it never needs the full expansion.
    """
    V = _coerce(V)
    beta = MultiIndex.of(beta)
    if len(beta) != V.dimension:
        raise ValueError("multi-index dimension mismatch")
    if beta.order > MAX_DERIVATIVE_ORDER:
        raise ValueError("derivative order too large")
    active = nonorthogonal_directions(V, freq)
    dots = [sum(f * x for f, x in zip(freq, v)) for v in V.vectors]
    if route == "factored" or route == "auto":
        if beta.order < len(active):
            if route == "factored":
                raise ValueError("factored route needs |beta| = #active directions")
            return 0.0 + 0.0j
        if beta.order == len(active):
            members = [V[i] for i in active]
            c = product_derivative(beta, members)
            val = complex(c)
            for i in active:
                val /= dots[i]
            return val
        if route == "factored":
            raise ValueError("factored route needs |beta| = #active directions")
        # |beta| above the active count: fall through to the expansion
    elif route != "leibniz":
        raise ValueError(f"unknown route {route!r}")
    return _leibniz_derivative(V, beta, dots)


def _axis_distributions(total: int, n: int):
    """(parts, multinomial) for distributing `total` derivatives over n factors."""
    out = []
    for parts in _compositions(total, n):
        coef = math.factorial(total)
        for p in parts:
            coef //= math.factorial(p)
        out.append((parts, coef))
    return out


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


def _leibniz_derivative(V, beta: MultiIndex, dots) -> complex:
    n = len(V)
    per_axis = [_axis_distributions(bj, n) for bj in beta]
    fact_cache: dict[tuple[int, int], complex] = {}

    def factor(i: int, order: int) -> complex:
        key = (i, order)
        if key not in fact_cache:
            fact_cache[key] = sinc_factor_derivative(order, float(dots[i]))
        return fact_cache[key]

    total = 0.0 + 0.0j
    for combo in itertools.product(*per_axis):
        coef = 1
        for _, mult in combo:
            coef *= mult
        term = complex(coef)
        for i in range(n):
            gamma = tuple(parts[i] for parts, _ in combo)
            power = 1
            for vj, gj in zip(V[i], gamma):
                if gj:
                    power *= vj ** gj
            if power == 0:
                term = 0.0
                break
            term *= power * factor(i, sum(gamma))
            if term == 0.0:
                break
        total += term
    return total


# ---------------------------------------------------------------------------
# pointwise evaluation


class BoxSplineEvaluator:
    """Vectorized pointwise evaluation by the two-term mesh recurrence.

    Points sitting on a knot hyperplane (where the value of a low-order
    spline is ambiguous) are nudged by eps along a direction with
    rationally independent coordinates, which moves them off every such
    hyperplane simultaneously.
    """

    def __init__(self, V, eps: float = 1e-9):
        self.V = _coerce(V)
        self.eps = eps
        d = self.V.dimension
        counts: dict[tuple[int, ...], int] = {}
        for v in self.V.vectors:
            counts[v] = counts.get(v, 0) + 1
        self.distinct = tuple(counts)
        self.multiplicity = tuple(counts[v] for v in self.distinct)
        self._vt = np.array(self.distinct, dtype=float)
        self._nudge_dir = np.array([math.pi ** -j for j in range(d)])
        self.cut_normals = self._knot_normals()
        lo = np.zeros(d)
        hi = np.zeros(d)
        for v, m in zip(self.distinct, self.multiplicity):
            arr = np.array(v, dtype=float)
            lo += m * np.minimum(arr, 0.0)
            hi += m * np.maximum(arr, 0.0)
        self.support_lo = lo
        self.support_hi = hi
        self._basis_cache: dict[tuple[int, ...], tuple] = {}
        self._span_cache: dict[tuple[int, ...], bool] = {}

    def _knot_normals(self):
        d = self.V.dimension
        if d == 1:
            return ((1,),)
        normals = set()
        for idx in itertools.combinations(range(len(self.distinct)), d - 1):
            rows = [self.distinct[i] for i in idx]
            if integer_rank(rows) != d - 1:
                continue
            normals.add(_integer_kernel_vector(rows, d))
        return tuple(sorted(normals))

    def knot_cut_families(self, spacing: float = 1.0):
        """Cut families along which the spline is only piecewise smooth."""
        return tuple(
            quadrature.CutFamily(tuple(float(x) for x in nrm), spacing)
            for nrm in self.cut_normals
        )

    def _nudged(self, X):
        X = np.array(X, dtype=float, copy=True)
        for _ in range(3):
            hit = np.zeros(len(X), dtype=bool)
            for nrm in self.cut_normals:
                s = X @ np.array(nrm, dtype=float)
                hit |= np.abs(s - np.rint(s)) < 1e-11
            if not hit.any():
                break
            X[hit] += self.eps * self._nudge_dir
        return X

    def _spans(self, sig) -> bool:
        if sig not in self._span_cache:
            rows = [v for v, m in zip(self.distinct, sig) if m > 0]
            self._span_cache[sig] = integer_rank(rows) == self.V.dimension
        return self._span_cache[sig]

    def _basis(self, sig):
        """First spanning d-subset of the active distinct vectors."""
        if sig not in self._basis_cache:
            d = self.V.dimension
            active = [i for i, m in enumerate(sig) if m > 0]
            for idx in itertools.combinations(active, d):
                mat = np.array([self.distinct[i] for i in idx], dtype=float).T
                det = np.linalg.det(mat)
                if abs(det) > 1e-12:
                    self._basis_cache[sig] = (idx, np.linalg.inv(mat), abs(det))
                    break
            else:
                raise AssertionError("no spanning basis in a spanning signature")
        return self._basis_cache[sig]

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        X = self._nudged(np.atleast_2d(pts))
        memo: dict[tuple, np.ndarray] = {}
        vals = self._recurse(self.multiplicity, (0,) * self.V.dimension, X, memo)
        return float(vals[0]) if single else vals

    def _recurse(self, sig, shift, X, memo):
        key = (sig, shift)
        if key in memo:
            return memo[key]
        d = self.V.dimension
        total = sum(sig)
        if not self._spans(sig):
            out = np.zeros(len(X))
        elif total == d:
            idx, inv, det = self._basis(sig)
            Y = (X - np.array(shift, dtype=float)) @ inv.T
            inside = np.all((Y >= 0.0) & (Y < 1.0), axis=1)
            out = inside.astype(float) / det
        else:
            idx, inv, _ = self._basis(sig)
            Y = (X - np.array(shift, dtype=float)) @ inv.T
            pos = {i: c for c, i in enumerate(idx)}
            out = np.zeros(len(X))
            for i, m in enumerate(sig):
                if m == 0:
                    continue
                sub = sig[:i] + (m - 1,) + sig[i + 1 :]
                v = self.distinct[i]
                shifted = tuple(s + x for s, x in zip(shift, v))
                if i in pos:
                    mu = Y[:, pos[i]]
                    out += mu * self._recurse(sub, shift, X, memo)
                    out += (m - mu) * self._recurse(sub, shifted, X, memo)
                else:
                    out += m * self._recurse(sub, shifted, X, memo)
            out /= total - d
        memo[key] = out
        return out


def integral_identity_check(V, f, order: int = 12):
    """Both sides of the defining identity: pair f with the spline two ways.

    Left: integral of f(x) B(x) over the support.  Right: integral of
    f(V u) over the unit cube in R^n.  Only sensible for n <= 5 (the right
    side is an n-dimensional tensor rule).
    """
    V = _coerce(V)
    n = len(V)
    if n > 5:
        raise ValueError("defining-identity check supported for n <= 5 only")
    spline = BoxSplineEvaluator(V)
    cuts = spline.knot_cut_families(1.0) if V.dimension <= 2 else ()
    lhs = quadrature.integrate(
        lambda X: f(X) * spline(X),
        spline.support_lo,
        spline.support_hi,
        cuts=cuts,
        order=order,
        spacing=1.0,
    )
    mat = np.array(V.vectors, dtype=float)
    pts, wts = quadrature.tensor_rule([0.0] * n, [1.0] * n, order)
    rhs = np.dot(wts, f(pts @ mat))
    return lhs, rhs

"""Smooth test functions with closed-form partial derivatives.

All families are tensor products of univariate factors, so a mixed
partial D^beta factors into univariate derivatives.  The univariate
derivative of each family satisfies a simple polynomial recurrence,
which keeps arbitrary orders exact (up to floating point) without any
symbolic machinery.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P

from .lattice import MultiIndex

SUPPORT_THRESHOLD = 1e-14


class TestFunction:
    """Base: callable with exact partials and an effective support box."""

    tag = "base"

    def __init__(self, dim: int):
        self.dim = dim

    def value(self, x):
        return self.derivative((0,) * self.dim, x)

    def __call__(self, x):
        return self.value(x)

    def derivative(self, beta, x):
        raise NotImplementedError

    def effective_box(self):
        """Box outside which |f| < 1e-14, or None for non-decaying families."""
        return None

    def rescale(self, factor: float) -> "TestFunction":
        """The function x -> f(factor * x), as a member of the same family."""
        raise NotImplementedError


def _split_points(x, dim):
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ValueError("point dimension mismatch")
    return pts, single


class Gaussian(TestFunction):
    """exp(-pi |x/s|^2); scale s controls the effective support."""

    tag = "gaussian"

    def __init__(self, dim: int, scale: float = 1.0):
        super().__init__(dim)
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self._a = math.pi / self.scale ** 2

    def _factor_poly(self, k: int):
        # phi(t) = exp(-a t^2), phi^(k) = p_k(t) phi(t),
        # p_{k+1} = p_k' - 2 a t p_k
        poly = np.array([1.0])
        for _ in range(k):
            poly = P.polysub(P.polyder(poly), 2.0 * self._a * P.polymulx(poly))
        return poly

    def derivative(self, beta, x):
        beta = MultiIndex.of(beta)
        pts, single = _split_points(x, self.dim)
        out = np.exp(-self._a * np.sum(pts ** 2, axis=1))
        for j, bj in enumerate(beta):
            if bj:
                out = out * P.polyval(pts[:, j], self._factor_poly(bj))
        return float(out[0]) if single else out

    def effective_box(self):
        half = self.scale * math.sqrt(-math.log(SUPPORT_THRESHOLD) / math.pi)
        return (np.full(self.dim, -half), np.full(self.dim, half))

    def rescale(self, factor: float) -> "Gaussian":
        return Gaussian(self.dim, self.scale / factor)


class Bump(TestFunction):
    """Compactly supported prod exp(1 - 1/(1 - (x_j/r)^2)) on |x_j| < r."""

    tag = "bump"

    def __init__(self, dim: int, radius: float = 3.0):
        super().__init__(dim)
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)

    @staticmethod
    def _numerator_poly(k: int):
        # psi^(k)(t) = N_k(t) (1-t^2)^(-2k) psi(t) with
        # N_{k+1} = N_k' (1-t^2)^2 + (4 k t (1-t^2) - 2 t) N_k
        q = np.array([1.0, 0.0, -1.0])  # 1 - t^2
        q2 = P.polymul(q, q)
        poly = np.array([1.0])
        for j in range(k):
            lead = P.polymul(P.polyder(poly), q2)
            mid = P.polymul(np.array([0.0, 4.0 * j]), q)
            mid = P.polysub(mid, np.array([0.0, 2.0]))
            poly = P.polyadd(lead, P.polymul(mid, poly))
        return poly

    def derivative(self, beta, x):
        beta = MultiIndex.of(beta)
        pts, single = _split_points(x, self.dim)
        t = pts / self.radius
        inside = np.all(np.abs(t) < 1.0, axis=1)
        out = np.zeros(len(pts))
        if inside.any():
            ti = t[inside]
            val = np.exp(np.sum(1.0 - 1.0 / (1.0 - ti ** 2), axis=1))
            for j, bj in enumerate(beta):
                if bj:
                    tj = ti[:, j]
                    num = P.polyval(tj, self._numerator_poly(bj))
                    val = val * num / (1.0 - tj ** 2) ** (2 * bj) / self.radius ** bj
            out[inside] = val
        return float(out[0]) if single else out

    def effective_box(self):
        return (np.full(self.dim, -self.radius), np.full(self.dim, self.radius))

    def rescale(self, factor: float) -> "Bump":
        return Bump(self.dim, self.radius / factor)


class Monomial(TestFunction):
    """x^beta; no decay, so projections need an explicit domain box."""

    tag = "monomial"

    def __init__(self, exponents):
        self.exponents = MultiIndex.of(exponents)
        super().__init__(len(self.exponents))

    def derivative(self, beta, x):
        beta = MultiIndex.of(beta)
        pts, single = _split_points(x, self.dim)
        out = np.ones(len(pts))
        for j, (ej, bj) in enumerate(zip(self.exponents, beta)):
            if bj > ej:
                out = np.zeros(len(pts))
                break
            coef = math.perm(ej, bj)
            out = out * coef * pts[:, j] ** (ej - bj)
        return float(out[0]) if single else out

    def rescale(self, factor: float) -> "Monomial":
        raise NotImplementedError("monomials do not rescale within the family")


def gaussian(dim: int, scale: float = 1.0) -> Gaussian:
    return Gaussian(dim, scale)


def bump(dim: int, radius: float = 3.0) -> Bump:
    return Bump(dim, radius)


def monomial(exponents) -> Monomial:
    return Monomial(exponents)


def finite_difference(f, beta, x, step: float = 1e-2):
    """Central finite difference of D^beta f at a single point x.

    Richardson-extrapolated once; used to self-test the closed forms.
    """
    beta = MultiIndex.of(beta)
    x = np.asarray(x, dtype=float)

    def diff(g, axis, h):
        def out(y):
            e = np.zeros_like(x)
            e[axis] = h
            return (g(y + e) - g(y - e)) / (2.0 * h)

        return out

    def nested(h):
        g = lambda y: f.value(y)
        for axis, bj in enumerate(beta):
            for _ in range(bj):
                g = diff(g, axis, h)
        return g(x)

    coarse = nested(step)
    fine = nested(step / 2.0)
    return (4.0 * fine - coarse) / 3.0

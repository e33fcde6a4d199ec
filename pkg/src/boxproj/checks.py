"""Fast invariant battery behind `boxproj check`.

Each check returns a measured value and a tolerance; the CLI renders them
as machine-readable lines.  The battery favors breadth over depth: the
exhaustive versions live in the test suite, this module is the smoke
screen a deployment can run in under a minute.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import (
    BoxSplineEvaluator,
    NonUnimodularError,
    autocorrelation,
    autocorrelation_table,
    bernoulli_l2_norm_sq,
    build_model,
    directional_derivative,
    error_constant,
    error_constant_l2,
    error_expansion,
    gram_symbol_range,
    hyperplane_classes,
    integral_identity_check,
    monomial,
    monomial_error_series,
    multi_indices,
    nonorthogonal_directions,
    gaussian,
    preset,
    project,
    residual_orthogonality,
    spline_values,
    transform_derivative,
)
from .bernoulli import bernoulli_l2_norm_sq_series, bernoulli_periodic
from . import quadrature
import scipy.sparse as sp


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""


def _check(name, value, tol, note="") -> CheckResult:
    return CheckResult(name=name, value=float(value), tol=float(tol),
                       passed=bool(value <= tol), note=note)


_MARGINS = {
    "haar": 0, "bspline(2)": 1, "bspline(3)": 2,
    "tensor(1,1)": 0, "tensor(2,2)": 1, "courant": 1, "courant2": 3,
}
_CLASS_COUNTS = {
    "haar": 1, "bspline(2)": 1, "tensor(1,1)": 2,
    "tensor(2,2)": 2, "courant": 3, "courant2": 3,
}


def run_battery(perturb_gram: float = 0.0) -> list[CheckResult]:
    out = []

    bad = sum(preset(k).margin != v for k, v in _MARGINS.items())
    out.append(_check("preset_margins", bad, 0, "mismatches against frozen table"))

    bad = sum(len(hyperplane_classes(preset(k))) != v for k, v in _CLASS_COUNTS.items())
    out.append(_check("preset_class_counts", bad, 0))

    try:
        hyperplane_classes(preset("zp"))
        out.append(_check("nonunimodular_rejection", 1, 0, "zp was not rejected"))
    except NonUnimodularError:
        out.append(_check("nonunimodular_rejection", 0, 0))

    worst = 0
    for name in ("tensor(2,2)", "courant", "courant2"):
        V = preset(name)
        for alpha in itertools.product(range(-3, 4), repeat=V.dimension):
            if all(a == 0 for a in alpha):
                continue
            deficit = V.margin + 1 - len(nonorthogonal_directions(V, alpha))
            worst = max(worst, deficit)
    out.append(_check("active_direction_count", worst, 0,
                      "margin+1 lower bound on #U_alpha"))

    for k in (1, 2):
        exact = float(bernoulli_l2_norm_sq(k))
        series = bernoulli_l2_norm_sq_series(k)
        pts, wts = quadrature.cell_rule([0.0], [1.0], (), order=16)
        quad = float(np.dot(wts, bernoulli_periodic(k, pts[:, 0]) ** 2))
        spread = max(abs(exact - series), abs(exact - quad), abs(series - quad))
        out.append(_check(f"parseval_k{k}", spread, 1e-10))

    worst = 0.0
    for name in ("bspline(2)", "courant"):
        V = preset(name)
        for beta in multi_indices(V.dimension, V.margin + 1):
            for alpha in itertools.product(range(-2, 3), repeat=V.dimension):
                if all(a == 0 for a in alpha):
                    continue
                a = transform_derivative(V, beta, alpha, route="auto")
                b = transform_derivative(V, beta, alpha, route="leibniz")
                worst = max(worst, abs(a - b))
    out.append(_check("transform_two_route", worst, 1e-12))

    hat = BoxSplineEvaluator(preset("bspline(2)"))
    out.append(_check("hat_peak", abs(hat(np.array([1.0])) - 1.0), 1e-8))

    Vc = preset("courant")
    Bc = BoxSplineEvaluator(Vc)
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 1, size=(20, 2))
    tot = np.zeros(20)
    for sh in itertools.product(range(-2, 2), repeat=2):
        tot += Bc(X - np.array(sh, dtype=float))
    out.append(_check("partition_of_unity", np.abs(tot - 1.0).max(), 1e-10))

    exp = error_expansion(Vc, (1, 1))
    pts = quadrature.sample_grid(2, 5)
    diff = np.abs(exp.evaluate(pts)
                  - monomial_error_series(Vc, (1, 1), pts, 300, mode="lines").real)
    out.append(_check("expansion_vs_series", diff.max(), 1e-4,
                      "closed form vs truncated lattice series, radius 300"))

    worst = 0.0
    for name in ("bspline(2)", "courant"):
        V = preset(name)
        for gamma, val in autocorrelation_table(V).items():
            other = autocorrelation(V, gamma, route="doubled")
            worst = max(worst, abs(val - other))
    out.append(_check("gram_two_route", worst, 1e-8))

    worst = 0.0
    for name in ("bspline(2)", "courant"):
        worst = max(worst, abs(sum(autocorrelation_table(preset(name)).values()) - 1.0))
    out.append(_check("gram_row_sum", worst, 1e-10))

    worst = -np.inf
    for name in ("bspline(2)", "courant"):
        V = preset(name)
        model = build_model(V, 1.0, box=(np.full(V.dimension, -4.0), np.full(V.dimension, 4.0)),
                            padding=0)
        eigs = np.linalg.eigvalsh(model.matrix().toarray())
        sym_min, _ = gram_symbol_range(V)
        worst = max(worst, (sym_min - 1e-8) - eigs.min())
    out.append(_check("gram_window_spd", worst, 0.0,
                      "window eigenvalues vs symbol lower bound"))

    Vh = preset("haar")
    f1 = monomial((1,))
    mh = build_model(Vh, 1.0, box=(np.array([-8.0]), np.array([8.0])), padding=0)
    ch = project(mh, f1)
    xs = np.linspace(-2.0, 2.0, 37) + 0.013
    dev = spline_values(mh, ch, xs[:, None]) - xs - (0.5 - np.mod(xs, 1.0))
    out.append(_check("haar_oracle", np.abs(dev).max(), 1e-8))

    V2 = preset("bspline(2)")
    g = gaussian(1, 1.0)
    m_h = build_model(V2, 0.25, g)
    c_h = project(m_h, g)
    m_1 = build_model(V2, 1.0, g.rescale(0.25))
    c_1 = project(m_1, g.rescale(0.25))
    out.append(_check("scaling_law", np.abs(c_h.values - c_1.values).max(), 1e-10))

    model = build_model(V2, 0.5, g)
    if perturb_gram:
        gamma = (1,)
        model.gram[gamma] = model.gram[gamma] + perturb_gram
        model._lu = None
    coeffs = project(model, g)
    blo, bhi = g.effective_box()
    blo, bhi = np.floor(blo * 2) / 2, np.ceil(bhi * 2) / 2
    fnorm = np.sqrt(quadrature.integrate(lambda X: g.value(X) ** 2,
                                         blo, bhi, order=12, spacing=0.5))
    resid = residual_orthogonality(g, model, coeffs, [(-1,), (0,), (2,)])
    out.append(_check("residual_orthogonality", resid / fnorm, 1e-10,
                      "gram perturbed by %g" % perturb_gram if perturb_gram else ""))

    worst = 0.0
    t = rng.normal(size=(12, 2))
    g2 = gaussian(2, 1.0)
    for cls in hyperplane_classes(Vc):
        a = directional_derivative(g2, cls.members, t, route="expansion")
        b = directional_derivative(g2, cls.members, t, route="nested")
        worst = max(worst, np.abs(np.asarray(a) - np.asarray(b)).max())
    out.append(_check("directional_two_route", worst, 1e-9))

    c_closed = error_constant_l2(g, V2)
    c_quad = error_constant(g, V2, 2.0)
    out.append(_check("constant_two_route_p2", abs(c_closed - c_quad) / c_closed, 1e-6))

    lhs, rhs = integral_identity_check(V2, lambda X: g.value(X))
    out.append(_check("defining_identity", abs(lhs - rhs), 1e-6))

    return out

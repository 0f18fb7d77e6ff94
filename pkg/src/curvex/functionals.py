"""Gaussian-weighted functionals of localized heat-kernel test functions.

The test function is u = scale * (4 pi t)^{-n/4} exp(-r^2/8t) * eta with
eta^2 = cutoff(r/r_s) * (1 + a_ij x^i x^j + alpha t), clamped below at a
tiny floor, all in normal coordinates at a center point.  The functionals
(mass, entropy, Dirichlet energy, scalar-curvature average) are integrals
against u^2 times the Riemannian volume density.

The substitution x = 2 sqrt(t) z turns each of them into
pi^{-n/2} * integral of exp(-|z|^2) G(z), which the engine computes with
product Gauss-Hermite quadrature, a radial-times-sphere rule with segment
splits at the cutoff kinks, or seeded Monte Carlo for n = 5, 6.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_chebyu, roots_legendre

from ._spaceform import ball_volume_K, sphere_area_K
from .charts import NormalChart
from .errors import (
    ConfigInvalid,
    PositivityWarning,
    QuadratureNotConverged,
    SupportTooLarge,
    TimeTooLarge,
)
from .moments import sphere_area
from .tensor_core import CurvatureData

__all__ = [
    "QuadratureSpec",
    "TestFunction",
    "Components",
    "build_test_function",
    "cutoff",
    "cutoff_prime",
    "eval_components",
    "eval_L",
    "eval_W",
    "eval_L_normalized",
    "eval_W_normalized",
    "gaussian_integral",
    "sphere_rule",
    "ball_volume",
    "bishop_gromov_ratio",
]

ETA_FLOOR = 1e-300


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "auto"  # auto | hermite | radial_sphere | mc
    order: int = 40
    c_trunc: float = 10.0
    mc_samples: int = 1_000_000
    seed: int = 1234
    err_drop: int = 6  # order decrement used for the error estimate

    def __post_init__(self):
        if self.rule not in ("auto", "hermite", "radial_sphere", "mc"):
            raise ConfigInvalid(f"unknown quadrature rule {self.rule!r}")
        if self.order < 8:
            raise ConfigInvalid("quadrature order below 8")
        if self.c_trunc <= 3.0:
            raise ConfigInvalid("truncation radius must exceed 3")


def cutoff(s):
    """C^2 radial cutoff: 1 on [0, 1/2], quintic smoothstep down to 0 at 1."""
    s = np.asarray(s, dtype=float)
    w = np.clip(2.0 * s - 1.0, 0.0, 1.0)
    return 1.0 - w**3 * (10.0 - 15.0 * w + 6.0 * w * w)


def cutoff_prime(s):
    s = np.asarray(s, dtype=float)
    w = np.clip(2.0 * s - 1.0, 0.0, 1.0)
    return -60.0 * (w * (1.0 - w)) ** 2


@dataclass
class TestFunction:
    """Localized Gaussian bump on a normal chart.

    a is a symmetric matrix of frame components; alpha shifts the quadratic
    profile by alpha * t.  scale multiplies u (so every functional of u^2
    scales by scale^2, which tests covariance)."""

    __test__ = False  # keep pytest collection away from the Test* name

    nchart: NormalChart
    a: np.ndarray
    alpha: float
    r_s: float
    scale: float = 1.0

    def __post_init__(self):
        n = self.nchart.n
        self.a = np.asarray(self.a, dtype=float)
        if self.a.shape != (n, n):
            raise ConfigInvalid(f"a has shape {self.a.shape}, chart has n={n}")
        self.a = 0.5 * (self.a + self.a.T)
        if self.r_s <= 0:
            raise ConfigInvalid("support radius must be positive")
        if self.r_s > self.nchart.radius * (1 + 1e-12):
            raise SupportTooLarge(
                f"r_s={self.r_s} exceeds normal chart radius {self.nchart.radius}"
            )

    def eta2(self, X, t: float):
        """eta^2 at points X (m, n), floored at ETA_FLOOR."""
        X = np.atleast_2d(X)
        r = np.linalg.norm(X, axis=-1)
        poly = 1.0 + np.einsum("mi,ij,mj->m", X, self.a, X) + self.alpha * t
        raw = cutoff(r / self.r_s) * poly
        return self.scale**2 * np.maximum(raw, ETA_FLOOR)

    def eta2_with_grad(self, X, t: float):
        """(eta^2, d eta^2) with the gradient zeroed on the clamped set."""
        X = np.atleast_2d(X)
        m = X.shape[0]
        r = np.linalg.norm(X, axis=-1)
        rsafe = np.maximum(r, 1e-300)
        ax = X @ self.a
        poly = 1.0 + np.einsum("mi,mi->m", X, ax) + self.alpha * t
        cut = cutoff(r / self.r_s)
        raw = cut * poly
        clamped = raw <= ETA_FLOOR
        val = self.scale**2 * np.maximum(raw, ETA_FLOOR)
        dcut = cutoff_prime(r / self.r_s) / self.r_s
        grad = self.scale**2 * (
            (dcut * poly / rsafe)[:, None] * X + (2.0 * cut)[:, None] * ax
        )
        grad[clamped] = 0.0
        return val, grad


def build_test_function(
    nchart: NormalChart,
    curv: CurvatureData | None = None,
    mode: str | np.ndarray = "optimal_a",
    alpha: str | float = "normalized",
    r_s: float | None = None,
    scale: float = 1.0,
) -> TestFunction:
    """Standard test-function configurations.

    mode 'optimal_a' takes a = Ricci/3 at the center (needs curv),
    'zero' takes a = 0; an explicit matrix is used as is.  alpha
    'normalized' means -Sc/3 (needs curv).  A quadratic profile that can
    reach zero inside the support triggers PositivityWarning.
    """
    n = nchart.n
    if isinstance(mode, str):
        if mode == "optimal_a":
            if curv is None:
                raise ConfigInvalid("optimal_a needs curvature data at the center")
            a = curv.rc / 3.0
        elif mode == "zero":
            a = np.zeros((n, n))
        else:
            raise ConfigInvalid(f"unknown test-function mode {mode!r}")
    else:
        a = np.asarray(mode, dtype=float)
    if isinstance(alpha, str):
        if alpha == "normalized":
            if curv is None:
                raise ConfigInvalid("normalized alpha needs curvature data")
            alpha_val = -curv.sc / 3.0
        else:
            raise ConfigInvalid(f"unknown alpha mode {alpha!r}")
    else:
        alpha_val = float(alpha)
    if r_s is None:
        r_s = nchart.radius
    lam_min = float(np.linalg.eigvalsh(0.5 * (a + a.T)).min())
    if lam_min < 0 and 1.0 + lam_min * r_s**2 <= 1e-6:
        warnings.warn(
            "quadratic profile reaches zero inside the support; "
            "values will be clamped",
            PositivityWarning,
        )
    return TestFunction(nchart, a, alpha_val, r_s, scale)


# ---------------------------------------------------------------------------
# node construction


@lru_cache(maxsize=32)
def _hermite_nodes(n: int, order: int):
    z1, w1 = np.polynomial.hermite.hermgauss(order)
    zs = np.stack(
        [g.ravel() for g in np.meshgrid(*([z1] * n), indexing="ij")], axis=-1
    )
    ws = np.prod(
        np.stack([g.ravel() for g in np.meshgrid(*([w1] * n), indexing="ij")], -1),
        axis=-1,
    )
    return zs, ws / np.pi ** (n / 2.0)


@lru_cache(maxsize=64)
def sphere_rule(n: int, order: int, seed: int = 1234):
    """Quadrature on S^{n-1}: directions and weights summing to its area.

    n=2 trapezoid, n=3 Gauss-Legendre x trapezoid, n=4 Gauss-Chebyshev
    (second kind) x Gauss-Legendre x trapezoid, n>=5 seeded Monte Carlo.
    """
    if n == 2:
        m = max(4 * order, 16)
        th = 2 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(th), np.sin(th)], -1)
        wts = np.full(m, 2 * np.pi / m)
    elif n == 3:
        u, wu = roots_legendre(order)
        m = 2 * order
        th = 2 * np.pi * np.arange(m) / m
        s = np.sqrt(1 - u**2)
        dirs = np.stack(
            [
                np.outer(s, np.cos(th)).ravel(),
                np.outer(s, np.sin(th)).ravel(),
                np.outer(u, np.ones(m)).ravel(),
            ],
            -1,
        )
        wts = np.outer(wu, np.full(m, 2 * np.pi / m)).ravel()
    elif n == 4:
        v, wv = roots_chebyu(order)  # weight sqrt(1-v^2) on [-1,1]
        u, wu = roots_legendre(order)
        m = 2 * order
        th = 2 * np.pi * np.arange(m) / m
        sv = np.sqrt(1 - v**2)
        su = np.sqrt(1 - u**2)
        dirs = np.stack(
            [
                np.einsum("a,b,c->abc", sv, su, np.cos(th)).ravel(),
                np.einsum("a,b,c->abc", sv, su, np.sin(th)).ravel(),
                np.einsum("a,b,c->abc", sv, u, np.ones(m)).ravel(),
                np.einsum("a,b,c->abc", v, np.ones(order), np.ones(m)).ravel(),
            ],
            -1,
        )
        wts = np.einsum("a,b,c->abc", wv, wu, np.full(m, 2 * np.pi / m)).ravel()
    else:
        rng = np.random.default_rng(seed)
        count = max(20_000, 200 * order * order)
        dirs = rng.normal(size=(count, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        wts = np.full(count, sphere_area(n) / count)
    return dirs, wts


def _radial_nodes(order: int, c: float, kinks=()):
    """Gauss-Legendre nodes on [0, c] split at 3.0 and at each kink."""
    brk = sorted({0.0, min(3.0, c), c} | {k for k in kinks if 0.0 < k < c})
    x1, w1 = roots_legendre(order)
    nodes, wts = [], []
    for a, b in zip(brk[:-1], brk[1:]):
        nodes.append(0.5 * (b - a) * x1 + 0.5 * (a + b))
        wts.append(0.5 * (b - a) * w1)
    return np.concatenate(nodes), np.concatenate(wts)


def _effective_rule(nchart: NormalChart, quad: QuadratureSpec) -> str:
    rule = quad.rule
    if rule == "auto":
        if nchart.kind == "ode":
            return "radial_sphere"
        return "radial_sphere" if nchart.n <= 4 else "mc"
    if nchart.kind == "ode" and rule != "radial_sphere":
        raise ConfigInvalid(
            "ode normal charts support only the radial_sphere rule"
        )
    if rule == "hermite" and nchart.n > 4:
        raise ConfigInvalid("product Hermite grids are limited to n <= 4")
    return rule


# ---------------------------------------------------------------------------
# core evaluation


@dataclass
class Components:
    """Raw functional pieces at one time, with per-piece error estimates."""

    t: float
    mass: float
    entropy: float
    dirichlet: float
    sc_integral: float
    errs: dict = field(default_factory=dict)


def _accumulate(tf: TestFunction, t: float, X, z2, wts, slab=None):
    """Weighted sums of the four integrands over prepared nodes.

    X are normal-coordinate points (m, n); z2 = |z|^2 at the nodes; wts
    already contain the Gaussian factor and the pi^{-n/2} normalization.
    slab, when given, is (ray_tables, nd, nr) for ode charts.
    """
    nc = tf.nchart
    n = nc.n
    eta2, geta2 = tf.eta2_with_grad(X, t)
    mvec = geta2 / (2.0 * eta2)[:, None] - X / (4.0 * t)
    if slab is None:
        dens = nc.density_pts(X)
        Q = nc.ginv_quad_pts(X, mvec)
        sc = nc.sc_pts(X)
    else:
        tab, nd, nr = slab
        dens = tab.dens.ravel()
        Q = tab.ginv_quad(mvec.reshape(nd, nr, n)).ravel()
        sc = tab.sc.ravel()
    base = eta2 * dens
    logu2 = np.log(eta2) - (n / 2.0) * np.log(4 * np.pi * t) - z2
    mass = float(np.dot(wts, base))
    entropy = float(np.dot(wts, base * logu2))
    dirichlet = float(np.dot(wts, base * Q))
    sc_integral = float(np.dot(wts, base * sc))
    return mass, entropy, dirichlet, sc_integral


def _eval_once(tf: TestFunction, t: float, quad: QuadratureSpec, order: int):
    nc = tf.nchart
    n = nc.n
    rule = _effective_rule(nc, quad)
    s2t = 2.0 * np.sqrt(t)

    if rule == "hermite":
        Z, W = _hermite_nodes(n, order)
        X = s2t * Z
        z2 = np.einsum("mi,mi->m", Z, Z)
        return _accumulate(tf, t, X, z2, W)

    if rule == "mc":
        rng = np.random.default_rng(quad.seed)
        count = quad.mc_samples if order >= quad.order else quad.mc_samples // 2
        Z = rng.normal(scale=np.sqrt(0.5), size=(count, n))
        X = s2t * Z
        z2 = np.einsum("mi,mi->m", Z, Z)
        W = np.full(count, 1.0 / count)
        return _accumulate(tf, t, X, z2, W)

    # radial_sphere
    kinks = (tf.r_s / (2.0 * s2t), tf.r_s / s2t)  # cutoff corners in z-radius
    c_eff = min(quad.c_trunc, tf.r_s / s2t)  # integrand vanishes past support
    rho, wr = _radial_nodes(order, c_eff, kinks)
    if nc.kind == "ode":
        # the angular rule is pinned at chart build time; order changes
        # (including the error-estimate drop) only refine the radial part
        if nc.rule_key is not None:
            dirs, wd = sphere_rule(*nc.rule_key)
        else:
            dirs, wd = sphere_rule(n, quad.order, quad.seed)
        if nc.dirs.shape != dirs.shape or not np.array_equal(nc.dirs, dirs):
            raise ConfigInvalid(
                "normal chart direction bundle does not match the sphere rule; "
                "build it with sphere_rule(n, order, seed) directions"
            )
        tab = nc.ray_tables(s2t * rho, want_sc=True)
    else:
        dirs, wd = sphere_rule(n, order, quad.seed)
        tab = nc.ray_tables(s2t * rho, dirs=dirs, want_sc=True)
    nd, nr = dirs.shape[0], rho.shape[0]
    X = (dirs[:, None, :] * (s2t * rho)[None, :, None]).reshape(-1, n)
    z2 = np.broadcast_to(rho**2, (nd, nr)).ravel()
    radial_w = wr * rho ** (n - 1) * np.exp(-(rho**2))
    W = (wd[:, None] * radial_w[None, :]).ravel() / np.pi ** (n / 2.0)
    return _accumulate(tf, t, X, z2, W, slab=(tab, nd, nr))


def eval_components(
    tf: TestFunction, t: float, quad: QuadratureSpec = QuadratureSpec(),
    want_err: bool = True,
) -> Components:
    """Mass, entropy, Dirichlet energy and scalar-curvature integral of u^2
    at time t, with error estimates from an order-dropped re-evaluation."""
    if t <= 0:
        raise ConfigInvalid("t must be positive")
    if t > (tf.r_s / quad.c_trunc) ** 2:
        raise TimeTooLarge(
            f"t={t} too large for support {tf.r_s} at truncation {quad.c_trunc}: "
            "the Gaussian no longer fits inside the cutoff"
        )
    hi = _eval_once(tf, t, quad, quad.order)
    if hi[0] <= 0:
        raise QuadratureNotConverged("mass came out nonpositive")
    errs = {}
    if want_err:
        lo = _eval_once(tf, t, quad, quad.order - quad.err_drop)
        for name, a, b in zip(
            ("mass", "entropy", "dirichlet", "sc_integral"), hi, lo
        ):
            errs[name] = abs(a - b)
    return Components(t, hi[0], hi[1], hi[2], hi[3], errs)


def _L_of(comp: Components, n: int) -> float:
    t, M = comp.t, comp.mass
    return (
        4.0 * t * comp.dirichlet
        - comp.entropy
        + M * np.log(M)
        - (n + (n / 2.0) * np.log(4 * np.pi * t)) * M
    )


def _L_err(comp: Components, n: int) -> float:
    t, M = comp.t, comp.mass
    e = comp.errs
    if not e:
        return 0.0
    return (
        4.0 * t * e["dirichlet"]
        + e["entropy"]
        + (abs(np.log(M)) + 1.0 + n + (n / 2.0) * abs(np.log(4 * np.pi * t)))
        * e["mass"]
    )


def eval_L(tf, t, quad=QuadratureSpec(), want_err=True):
    """Log-Sobolev-type deficit of u at time t: (value, error estimate)."""
    comp = eval_components(tf, t, quad, want_err)
    return _L_of(comp, tf.nchart.n), _L_err(comp, tf.nchart.n)


def eval_W(tf, t, quad=QuadratureSpec(), want_err=True):
    """Entropy functional: the deficit plus t times the curvature integral."""
    comp = eval_components(tf, t, quad, want_err)
    n = tf.nchart.n
    val = _L_of(comp, n) + t * comp.sc_integral
    err = _L_err(comp, n) + t * comp.errs.get("sc_integral", 0.0)
    return val, err


def eval_L_normalized(tf, t, quad=QuadratureSpec(), want_err=True):
    """Deficit of the unit-mass rescaling u / sqrt(mass)."""
    comp = eval_components(tf, t, quad, want_err)
    n = tf.nchart.n
    val = _L_of(comp, n) / comp.mass
    err = (_L_err(comp, n) + abs(val) * comp.errs.get("mass", 0.0)) / comp.mass
    return val, err


def eval_W_normalized(tf, t, quad=QuadratureSpec(), want_err=True):
    comp = eval_components(tf, t, quad, want_err)
    n = tf.nchart.n
    val = (_L_of(comp, n) + t * comp.sc_integral) / comp.mass
    err = (
        _L_err(comp, n)
        + t * comp.errs.get("sc_integral", 0.0)
        + abs(val) * comp.errs.get("mass", 0.0)
    ) / comp.mass
    return val, err


# ---------------------------------------------------------------------------
# generic Gaussian integrals (the moment bridge) and volumes


def gaussian_integral(
    n: int,
    t: float,
    G,
    quad: QuadratureSpec = QuadratureSpec(),
    rule: str | None = None,
):
    """pi^{-n/2} integral of exp(-|z|^2) G(x) dz with x = 2 sqrt(t) z.

    Equivalently the integral of the heat-kernel weight H^2 against G on
    flat space.  G maps (m, n) points to (m,) values.  Returns (value,
    error estimate)."""
    rule = rule or ("hermite" if n <= 4 else "mc")

    def once(order):
        if rule == "hermite":
            Z, W = _hermite_nodes(n, order)
        elif rule == "radial_sphere":
            rho, wr = _radial_nodes(order, quad.c_trunc)
            dirs, wd = sphere_rule(n, order, quad.seed)
            Z = (dirs[:, None, :] * rho[None, :, None]).reshape(-1, n)
            radial_w = wr * rho ** (n - 1) * np.exp(-(rho**2))
            W = (wd[:, None] * radial_w[None, :]).ravel() / np.pi ** (n / 2.0)
        elif rule == "mc":
            rng = np.random.default_rng(quad.seed)
            cnt = quad.mc_samples if order >= quad.order else quad.mc_samples // 2
            Z = rng.normal(scale=np.sqrt(0.5), size=(cnt, n))
            W = np.full(cnt, 1.0 / cnt)
        else:
            raise ConfigInvalid(f"unknown rule {rule!r}")
        return float(np.dot(W, np.asarray(G(2.0 * np.sqrt(t) * Z))))

    hi = once(quad.order)
    lo = once(quad.order - quad.err_drop)
    return hi, abs(hi - lo)


def ball_volume(nchart: NormalChart, r: float, order: int = 64) -> float:
    """Riemannian volume of the geodesic ball of radius r at the center."""
    if r <= 0:
        raise ConfigInvalid("radius must be positive")
    if r > nchart.radius * (1 + 1e-12):
        raise SupportTooLarge("ball radius exceeds the normal chart radius")
    if nchart.kind == "ode":
        raise ConfigInvalid(
            "ball_volume on ode charts needs the direction weights; "
            "use ball_volume_rays"
        )
    x1, w1 = roots_legendre(order)
    rho = 0.5 * r * (x1 + 1.0)
    wr = 0.5 * r * w1
    n = nchart.n
    dirs, wd = sphere_rule(n, order if n <= 4 else 16, 1234)
    X = (dirs[:, None, :] * rho[None, :, None]).reshape(-1, n)
    dens = nchart.density_pts(X).reshape(dirs.shape[0], -1)
    shell = dens * rho[None, :] ** (n - 1)
    return float(np.einsum("d,r,dr->", wd, wr, shell))


def ball_volume_rays(
    nchart: NormalChart, r: float, wd, order: int = 64
) -> float:
    """Ball volume for ode charts, given the weights of the chart's own
    direction bundle."""
    x1, w1 = roots_legendre(order)
    rho = 0.5 * r * (x1 + 1.0)
    wr = 0.5 * r * w1
    tab = nchart.ray_tables(rho)
    shell = tab.dens * rho[None, :] ** (nchart.n - 1)
    return float(np.einsum("d,r,dr->", np.asarray(wd), wr, shell))


def bishop_gromov_ratio(nchart: NormalChart, radii, K: float) -> np.ndarray:
    """Volume of B(p, r) divided by the space-form ball volume at each r."""
    radii = np.asarray(radii, dtype=float)
    vols = np.array([ball_volume(nchart, float(r)) for r in radii])
    ref = ball_volume_K(nchart.n, K, radii)
    return vols / ref

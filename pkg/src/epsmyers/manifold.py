"""Closed-form model weighted manifolds.

Supported bases: Euclidean space, flat tori, round spheres, hyperbolic space
(hyperboloid model) and warped products dr^2 + psi(r)^2 g_{S^{n-1}} seen from
their pole. Points of embedded bases are ambient coordinate vectors; warped
products use polar coordinates x = r theta in R^n.

Along a unit-speed geodesic the weighted Ricci curvature is
Ric_g(g', g') + (f o g)'' - (f o g)'^2/(N - n): the Hessian term is the second
arclength derivative of f along the geodesic. Off-geodesic directions use the
tangent quadratic form of Ric_N at a point (see :meth:`WeightedModel.ricci_form`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.integrate import cumulative_trapezoid
from scipy.special import gamma, roots_jacobi, roots_legendre
from scipy.stats import qmc

from .comparison import sn_array
from .epsrange import EpsParams, inv_n_minus_dim
from .errors import DomainError, NumericError, UnsupportedError

__all__ = [
    "BallSpec",
    "Weight",
    "ZeroWeight",
    "ConstantWeight",
    "LinearWeight",
    "QuadraticWeight",
    "ExpressionWeight",
    "RadialWeight",
    "Euclidean",
    "FlatTorus",
    "RoundSphere",
    "Hyperbolic",
    "Warp",
    "WarpedProduct",
    "WeightedModel",
    "GeodesicRecord",
    "BishopProfile",
    "ConditionResult",
    "geodesic",
    "ric_n_along",
    "ric_n_minus",
    "ric_n_minus_many",
    "direction_set",
    "sphere_quadrature",
    "ball_integral",
    "ball_measure",
    "curvature_excess",
    "check_condition",
    "bishop_profile",
    "manifold_integral",
    "sample_ball",
    "load_model",
    "load_model_file",
    "RIC_N_MINUS_LABEL",
]

RIC_N_MINUS_LABEL = "sampled infimum (upper bound of Ric_{N-} error = sampling gap)"
# Near-optimal 5-point step: roundoff and truncation of the second derivative balance near 1e-10.
FD_STEP = 2e-3
DEFAULT_STEPS = 2048


# -- weights -------------------------------------------------------------------


class Weight:
    """Weight function f on ambient coordinates, with gradient and Hessian."""

    is_constant = False
    radial = False

    def value(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def hess(self, x):
        raise NotImplementedError

    def describe(self):
        return {"kind": type(self).__name__}


class ConstantWeight(Weight):
    is_constant = True

    def __init__(self, value=0.0):
        self.k = float(value)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.k)

    def grad(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d))

    def describe(self):
        return {"kind": "constant", "params": {"value": self.k}}


class ZeroWeight(ConstantWeight):
    def __init__(self):
        super().__init__(0.0)

    def describe(self):
        return {"kind": "zero", "params": {}}


class QuadraticWeight(Weight):
    """f(x) = k + w.x + x^T Q x / 2 on ambient coordinates."""

    def __init__(self, Q=None, w=None, value=0.0, dim=None):
        if Q is None and w is None:
            raise DomainError("quadratic weight needs Q or w")
        if dim is None:
            dim = len(w) if w is not None else len(Q)
        self.Q = np.zeros((dim, dim)) if Q is None else np.asarray(Q, dtype=float)
        self.w = np.zeros(dim) if w is None else np.asarray(w, dtype=float)
        self.k = float(value)
        if self.Q.shape != (dim, dim) or self.w.shape != (dim,):
            raise DomainError(f"quadratic weight shapes Q{self.Q.shape}, w{self.w.shape} do not match dimension {dim}")
        self.Q = 0.5 * (self.Q + self.Q.T)

    @property
    def is_constant(self):
        return not (np.any(self.Q) or np.any(self.w))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.k + x @ self.w + 0.5 * np.einsum("...i,ij,...j->...", x, self.Q, x)

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return self.w + x @ self.Q

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.Q, x.shape[:-1] + self.Q.shape).copy()

    def describe(self):
        return {"kind": "quadratic", "params": {"Q": self.Q.tolist(), "w": self.w.tolist(), "value": self.k}}


class LinearWeight(QuadraticWeight):
    def __init__(self, w, value=0.0):
        super().__init__(Q=None, w=w, value=value)

    def describe(self):
        return {"kind": "linear", "params": {"w": self.w.tolist(), "value": self.k}}


_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "arctan", "abs", "pi", "e")
}


class ExpressionWeight(Weight):
    """f given by a numpy expression in ``x`` (x[0], x[1], ... are ambient coordinates).

    Gradient and Hessian use 5-point central differences with step FD_STEP * scale;
    mixed partials difference second derivatives along e_i + e_j and e_i - e_j.
    """

    def __init__(self, expr, scale=1.0):
        self.expr = str(expr)
        self.scale = float(scale)
        self._code = compile(self.expr, "<weight>", "eval")
        self.h = FD_STEP * self.scale

    def value(self, x):
        x = np.asarray(x, dtype=float)
        coords = np.moveaxis(x, -1, 0)
        out = eval(self._code, {"__builtins__": {}}, dict(_EXPR_NAMES, x=coords, np=np))
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1]).copy()

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        h = self.h
        out = np.empty_like(x)
        for i in range(d):
            e = np.zeros(d)
            e[i] = h
            out[..., i] = (
                -self.value(x + 2 * e) + 8 * self.value(x + e) - 8 * self.value(x - e) + self.value(x - 2 * e)
            ) / (12 * h)
        return out

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        h = self.h
        out = np.empty(x.shape[:-1] + (d, d))
        f0 = self.value(x)

        def second(u):
            return (
                -self.value(x + 2 * u) + 16 * self.value(x + u) - 30 * f0 + 16 * self.value(x - u) - self.value(x - 2 * u)
            ) / (12 * h * h)

        eye = np.eye(d)
        for i in range(d):
            out[..., i, i] = second(h * eye[i])
            for j in range(i + 1, d):
                v = 0.25 * (second(h * (eye[i] + eye[j])) - second(h * (eye[i] - eye[j])))
                out[..., i, j] = v
                out[..., j, i] = v
        return out

    def describe(self):
        return {"kind": "expression", "params": {"expr": self.expr, "scale": self.scale}}


class RadialWeight:
    """Weight f = g(r) on a warped product, r the distance from the pole.

    ``kind`` is one of zero, constant (g = value), quadratic (g = value + q r^2/2)
    or expression (numpy expression in ``r``, derivatives by finite differences).
    """

    radial = True

    def __init__(self, kind="zero", value=0.0, q=0.0, expr=None, scale=1.0):
        self.kind = kind
        self.k = float(value)
        self.q = float(q)
        self.expr = expr
        self.scale = float(scale)
        if kind == "expression":
            if expr is None:
                raise DomainError("expression radial weight needs 'expr'")
            self._code = compile(expr, "<radial weight>", "eval")
        elif kind not in ("zero", "constant", "quadratic"):
            raise UnsupportedError(f"radial weight kind {kind!r} is not supported on warped products")

    @property
    def is_constant(self):
        return self.kind in ("zero", "constant") or (self.kind == "quadratic" and self.q == 0)

    def _g(self, r):
        if self.kind == "expression":
            out = eval(self._code, {"__builtins__": {}}, dict(_EXPR_NAMES, r=r, np=np))
            return np.broadcast_to(np.asarray(out, dtype=float), np.shape(r)).copy()
        if self.kind == "zero":
            return np.zeros_like(r)
        return self.k + 0.5 * self.q * r * r

    def profile(self, r):
        """(g, g', g'') at radii r."""
        r = np.asarray(r, dtype=float)
        if self.kind == "expression":
            h = FD_STEP * self.scale
            g = self._g(r)
            g1 = (-self._g(r + 2 * h) + 8 * self._g(r + h) - 8 * self._g(r - h) + self._g(r - 2 * h)) / (12 * h)
            g2 = (-self._g(r + 2 * h) + 16 * self._g(r + h) - 30 * g + 16 * self._g(r - h) - self._g(r - 2 * h)) / (12 * h * h)
            return g, g1, g2
        g = self._g(r)
        return g, self.q * r, np.full_like(r, self.q)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self._g(np.linalg.norm(x, axis=-1))

    def describe(self):
        if self.kind == "expression":
            return {"kind": "expression", "params": {"expr": self.expr, "scale": self.scale}}
        return {"kind": self.kind, "params": {"value": self.k, "q": self.q}}


# -- bases ---------------------------------------------------------------------


def _householder_frame(u, pivot):
    """Orthogonal matrices H with H e_pivot = u (u unit), batched over leading axes."""
    u = np.asarray(u, dtype=float)
    d = u.shape[-1]
    e = np.zeros(d)
    e[pivot] = 1.0
    w = e - u
    ww = np.einsum("...i,...i->...", w, w)
    safe = ww > 1e-24
    scale = np.where(safe, 2.0 / np.where(safe, ww, 1.0), 0.0)
    H = np.eye(d) - scale[..., None, None] * w[..., :, None] * w[..., None, :]
    return H


class Base:
    """Riemannian base with closed-form geodesics."""

    name = "base"
    compact = False
    kappa = None  # constant sectional curvature, None if not constant

    def __init__(self, n):
        if int(n) != n or n < 2:
            raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
        self.n = int(n)

    @property
    def ambient_dim(self):
        return self.n

    def default_point(self):
        return np.zeros(self.ambient_dim)

    def inner(self, u, v):
        return np.einsum("...i,...i->...", u, v)

    def frame(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(self.n), x.shape[:-1] + (self.n, self.n)).copy()

    def contains(self, x, tol=1e-9):
        return True

    def check_tangent(self, x, v, tol=1e-9):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if x.shape[-1] != self.ambient_dim or v.shape[-1] != self.ambient_dim:
            raise DomainError(f"points and directions must have {self.ambient_dim} ambient coordinates")
        if not self.contains(x, tol):
            raise DomainError(f"point {x.tolist()} is not on the {self.name}")
        if not np.all(np.abs(self.inner(v, v) - 1.0) <= tol):
            raise DomainError("direction must have unit length")

    def jacobian_root(self, t):
        """psi(t) with A(t) = psi(t)^(n-1) the polar volume density."""
        return sn_array(self.kappa, t)

    def jacobian(self, t):
        return self.jacobian_root(t) ** (self.n - 1)

    def ricci_coefficient(self, x):
        """Ric_g(v, v)/|v|^2 for constant-curvature bases."""
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], (self.n - 1) * self.kappa)

    def accel_coefficient(self):
        """sigma with gamma''(0) = sigma |v|^2 x for the geodesic through x with velocity v."""
        return 0.0

    def injectivity_radius(self, center=None):
        return math.inf

    def convexity_radius(self):
        return math.inf

    def diameter(self):
        raise UnsupportedError(f"{self.name} is not compact")

    def describe(self):
        return {"base": self.name, "base_params": {}}


class Euclidean(Base):
    name = "euclidean"
    kappa = 0.0

    def geodesic(self, x, v, t):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        t = np.asarray(t, dtype=float)[..., None]
        pos = x + t * v
        vel = np.broadcast_to(v, pos.shape).copy()
        return pos, vel, np.zeros_like(pos)

    def displacement(self, x, y):
        return np.asarray(y, dtype=float) - np.asarray(x, dtype=float)

    def distance(self, x, y):
        return np.linalg.norm(self.displacement(x, y), axis=-1)

    def log_direction(self, x, y):
        d = self.displacement(x, y)
        dist = np.linalg.norm(d, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = d / dist[..., None]
        v = np.where(dist[..., None] > 0, v, np.eye(self.n)[0])
        return v, dist


class FlatTorus(Euclidean):
    name = "flat_torus"
    compact = True

    def __init__(self, n, periods):
        super().__init__(n)
        periods = np.broadcast_to(np.asarray(periods, dtype=float), (self.n,)).copy()
        if np.any(periods <= 0):
            raise DomainError("torus periods must be positive")
        self.periods = periods

    def displacement(self, x, y):
        d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return d - self.periods * np.round(d / self.periods)

    def injectivity_radius(self, center=None):
        return float(self.periods.min()) / 2.0

    def convexity_radius(self):
        return float(self.periods.min()) / 4.0

    def diameter(self):
        return 0.5 * float(np.linalg.norm(self.periods))

    def volume(self):
        return float(np.prod(self.periods))

    def describe(self):
        return {"base": self.name, "base_params": {"periods": self.periods.tolist()}}


class RoundSphere(Base):
    name = "round_sphere"
    compact = True

    def __init__(self, n, radius=1.0):
        super().__init__(n)
        if not radius > 0:
            raise DomainError("sphere radius must be positive")
        self.radius = float(radius)
        self.kappa = 1.0 / self.radius**2

    @property
    def ambient_dim(self):
        return self.n + 1

    def default_point(self):
        x = np.zeros(self.n + 1)
        x[-1] = self.radius
        return x

    def contains(self, x, tol=1e-9):
        return bool(np.all(np.abs(np.linalg.norm(x, axis=-1) - self.radius) <= tol * max(1.0, self.radius)))

    def check_tangent(self, x, v, tol=1e-9):
        super().check_tangent(x, v, tol)
        if not np.all(np.abs(self.inner(x, v)) <= tol * self.radius):
            raise DomainError("direction is not tangent to the sphere at the start point")

    def frame(self, x):
        u = np.asarray(x, dtype=float) / self.radius
        return _householder_frame(u, self.n)[..., :, : self.n]

    def accel_coefficient(self):
        return -self.kappa

    def geodesic(self, x, v, t):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        s = np.asarray(t, dtype=float)[..., None] / self.radius
        cs, sn_ = np.cos(s), np.sin(s)
        pos = cs * x + self.radius * sn_ * v
        vel = -sn_ * x / self.radius + cs * v
        acc = -pos * self.kappa
        return pos, vel, acc

    def distance(self, x, y):
        chord = np.linalg.norm(np.asarray(y, dtype=float) - np.asarray(x, dtype=float), axis=-1)
        return 2.0 * self.radius * np.arcsin(np.clip(chord / (2.0 * self.radius), 0.0, 1.0))

    def log_direction(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = y - (self.inner(x, y) * self.kappa)[..., None] * x
        norm = np.linalg.norm(w, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            v = w / norm[..., None]
        fallback = self.frame(x)[..., :, 0]
        v = np.where(norm[..., None] > 0, v, fallback)
        return v, self.distance(x, y)

    def injectivity_radius(self, center=None):
        return math.pi * self.radius

    def convexity_radius(self):
        return 0.5 * math.pi * self.radius

    def diameter(self):
        return math.pi * self.radius

    def volume(self):
        n = self.n
        return 2.0 * math.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0) * self.radius**n

    def describe(self):
        return {"base": self.name, "base_params": {"radius": self.radius}}


class Hyperbolic(Base):
    """Hyperboloid -x0^2 + |xs|^2 = -1/k in Minkowski space, curvature -k."""

    name = "hyperbolic"

    def __init__(self, n, curvature_scale=1.0):
        super().__init__(n)
        if not curvature_scale > 0:
            raise DomainError("hyperbolic curvature scale must be positive")
        self.k = float(curvature_scale)
        self.kappa = -self.k

    @property
    def ambient_dim(self):
        return self.n + 1

    def default_point(self):
        x = np.zeros(self.n + 1)
        x[0] = 1.0 / math.sqrt(self.k)
        return x

    def inner(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return -u[..., 0] * v[..., 0] + np.einsum("...i,...i->...", u[..., 1:], v[..., 1:])

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return bool(np.all(np.abs(self.inner(x, x) * self.k + 1.0) <= tol * np.maximum(1.0, x[..., 0] ** 2 * self.k)) and np.all(x[..., 0] > 0))

    def check_tangent(self, x, v, tol=1e-9):
        super().check_tangent(x, v, tol)
        if not np.all(np.abs(self.inner(x, v)) <= tol * max(1.0, float(np.max(np.abs(x))))):
            raise DomainError("direction is not tangent to the hyperboloid at the start point")

    def frame(self, x):
        u = np.asarray(x, dtype=float) * math.sqrt(self.k)
        u0 = u[..., 0]
        us = u[..., 1:]
        n = self.n
        E = np.empty(u.shape[:-1] + (n + 1, n))
        E[..., 0, :] = us
        E[..., 1:, :] = np.eye(n) + us[..., :, None] * us[..., None, :] / (1.0 + u0)[..., None, None]
        return E

    def accel_coefficient(self):
        return self.k

    def geodesic(self, x, v, t):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        sk = math.sqrt(self.k)
        s = np.asarray(t, dtype=float)[..., None] * sk
        ch, sh = np.cosh(s), np.sinh(s)
        pos = ch * x + sh * v / sk
        vel = sh * sk * x + ch * v
        acc = self.k * pos
        return pos, vel, acc

    def distance(self, x, y):
        z = -self.inner(x, y) * self.k
        return np.arccosh(np.maximum(z, 1.0)) / math.sqrt(self.k)

    def log_direction(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = y + (self.inner(x, y) * self.k)[..., None] * x
        norm2 = self.inner(w, w)
        norm = np.sqrt(np.maximum(norm2, 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            v = w / norm[..., None]
        fallback = self.frame(x)[..., :, 0]
        v = np.where(norm[..., None] > 0, v, fallback)
        return v, self.distance(x, y)

    def describe(self):
        return {"base": self.name, "base_params": {"curvature_scale": self.k}}


class Warp:
    """Warping function psi with psi(0) = 0, psi'(0) = 1.

    kind ``sn`` (psi = sn_kappa), ``polynomial`` (psi = r + c3 r^3 + c5 r^5) or
    ``expression`` (numpy expression in ``r``; derivatives by finite differences).
    """

    def __init__(self, kind="sn", kappa=0.0, c3=0.0, c5=0.0, expr=None, scale=1.0):
        self.kind = kind
        self.kappa = float(kappa)
        self.c3 = float(c3)
        self.c5 = float(c5)
        self.expr = expr
        self.scale = float(scale)
        if kind == "expression":
            if expr is None:
                raise DomainError("expression warp needs 'expr'")
            self._code = compile(expr, "<warp>", "eval")
            psi0, d1, _ = self.derivatives(np.array([0.0]))
            if abs(psi0[0]) > 1e-8 or abs(d1[0] - 1.0) > 1e-6:
                raise DomainError("warp must satisfy psi(0) = 0 and psi'(0) = 1")
        elif kind not in ("sn", "polynomial"):
            raise UnsupportedError(f"warp kind {kind!r} is not supported")

    def _psi(self, r):
        out = eval(self._code, {"__builtins__": {}}, dict(_EXPR_NAMES, r=r, np=np))
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(r)).copy()

    def derivatives(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "sn":
            psi = sn_array(self.kappa, r)
            if self.kappa > 0:
                d1 = np.cos(math.sqrt(self.kappa) * r)
            elif self.kappa < 0:
                d1 = np.cosh(math.sqrt(-self.kappa) * r)
            else:
                d1 = np.ones_like(r)
            return psi, d1, -self.kappa * psi
        if self.kind == "polynomial":
            psi = r + self.c3 * r**3 + self.c5 * r**5
            d1 = 1.0 + 3 * self.c3 * r**2 + 5 * self.c5 * r**4
            d2 = 6 * self.c3 * r + 20 * self.c5 * r**3
            return psi, d1, d2
        h = FD_STEP * self.scale
        p0 = self._psi(r)
        pp1, pm1, pp2, pm2 = self._psi(r + h), self._psi(r - h), self._psi(r + 2 * h), self._psi(r - 2 * h)
        d1 = (-pp2 + 8 * pp1 - 8 * pm1 + pm2) / (12 * h)
        d2 = (-pp2 + 16 * pp1 - 30 * p0 + 16 * pm1 - pm2) / (12 * h * h)
        return p0, d1, d2

    def ratios(self, r, r_min=1e-4):
        """(psi''/psi, (1 - psi'^2)/psi^2, psi'/psi), each evaluated at max(r, r_min)
        so that the pole takes its limiting value up to O(r_min^2)."""
        rr = np.maximum(np.asarray(r, dtype=float), r_min)
        psi, d1, d2 = self.derivatives(rr)
        return d2 / psi, (1.0 - d1 * d1) / (psi * psi), d1 / psi

    def first_zero(self, r_max=1e3):
        if self.kind == "sn":
            return math.pi / math.sqrt(self.kappa) if self.kappa > 0 else math.inf
        grid = np.linspace(0.0, r_max, 200001)[1:]
        psi = self.derivatives(grid)[0]
        bad = np.nonzero(psi <= 0)[0]
        return float(grid[bad[0]]) if bad.size else math.inf

    def describe(self):
        if self.kind == "sn":
            return {"kind": "sn", "kappa": self.kappa}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "c3": self.c3, "c5": self.c5}
        return {"kind": "expression", "expr": self.expr, "scale": self.scale}


class WarpedProduct(Base):
    """dr^2 + psi(r)^2 g_{S^{n-1}}, points in polar coordinates x = r theta; pole at 0."""

    name = "warped_product"

    def __init__(self, n, warp):
        super().__init__(n)
        self.warp = warp
        self._zero = warp.first_zero()

    def jacobian_root(self, t):
        return self.warp.derivatives(np.asarray(t, dtype=float))[0]

    def injectivity_radius(self, center=None):
        if center is not None and np.linalg.norm(center) > 0:
            raise UnsupportedError("warped-product balls are only supported around the pole")
        return self._zero

    def convexity_radius(self):
        raise UnsupportedError("convexity radius of a general warped product is not available")

    def geodesic(self, x, v, t):
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(x) > 0:
            raise UnsupportedError("warped-product geodesics are only supported as radial lines from the pole")
        v = np.asarray(v, dtype=float)
        t = np.asarray(t, dtype=float)[..., None]
        pos = t * v
        return pos, np.broadcast_to(v, pos.shape).copy(), np.zeros_like(pos)

    def radial_ricci(self, r):
        ratio2, _, _ = self.warp.ratios(r)
        return -(self.n - 1) * ratio2

    def tangential_ricci(self, r):
        ratio2, ratio_t, _ = self.warp.ratios(r)
        return -ratio2 + (self.n - 2) * ratio_t

    def describe(self):
        return {"base": self.name, "base_params": {"warp": self.warp.describe()}}


# -- weighted model ------------------------------------------------------------


@dataclass(frozen=True)
class BallSpec:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.ravel(self.center)))
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius!r}")

    @property
    def point(self):
        return np.array(self.center)


@dataclass
class AlongGeodesic:
    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    ric_g: np.ndarray
    A_root: np.ndarray


class WeightedModel:
    """A base manifold together with a smooth weight f (measure e^{-f} dvol)."""

    def __init__(self, base, weight=None):
        self.base = base
        if weight is None:
            weight = RadialWeight("zero") if isinstance(base, WarpedProduct) else ZeroWeight()
        if isinstance(base, WarpedProduct) != bool(getattr(weight, "radial", False)):
            raise UnsupportedError("warped products take radial weights; other bases take ambient weights")
        if isinstance(base, FlatTorus) and isinstance(weight, QuadraticWeight) and not weight.is_constant:
            raise UnsupportedError("linear/quadratic weights are not periodic on a flat torus; use an expression")
        self.weight = weight

    @property
    def n(self):
        return self.base.n

    def describe(self):
        out = {"dimension": self.n}
        out.update(self.base.describe())
        out["weight"] = self.weight.describe()
        return out

    def f(self, x):
        return self.weight.value(x)

    def along(self, start, direction, t):
        """Closed-form quantities along the unit-speed geodesic t -> exp(start, t direction)."""
        t = np.asarray(t, dtype=float)
        base = self.base
        pos, vel, acc = base.geodesic(start, direction, t)
        if isinstance(base, WarpedProduct):
            g, g1, g2 = self.weight.profile(t)
            ric = base.radial_ricci(t)
            return AlongGeodesic(t, pos, vel, g, g1, g2, ric, base.jacobian_root(t))
        f = self.weight.value(pos)
        grad = self.weight.grad(pos)
        hess = self.weight.hess(pos)
        f1 = np.einsum("...i,...i->...", grad, vel)
        f2 = np.einsum("...i,...i->...", (hess @ vel[..., None])[..., 0], vel) + np.einsum("...i,...i->...", grad, acc)
        ric = base.ricci_coefficient(pos)
        return AlongGeodesic(t, pos, vel, f, f1, f2, ric, base.jacobian_root(t))

    def ricci_form(self, points, p):
        """Tangent quadratic form of Ric_N at each point, in an orthonormal frame.

        Returns (M, frames) with M of shape (..., n, n): Ric_N(E u, E u) = u^T M u.
        """
        base = self.base
        x = np.asarray(points, dtype=float)
        n = self.n
        inv = inv_n_minus_dim(n, p.N)
        if isinstance(base, WarpedProduct):
            r = np.linalg.norm(x, axis=-1)
            theta = np.where(r[..., None] > 0, x / np.where(r > 0, r, 1.0)[..., None], np.eye(n)[0])
            frames = _householder_frame(theta, 0)
            g, g1, g2 = self.weight.profile(r)
            ric_r = base.radial_ricci(r)
            ric_t = base.tangential_ricci(r)
            ratio2, ratio_t, dlog = base.warp.ratios(r)
            # g'(r) psi'/psi -> g''(0) at the pole for smooth radial g.
            tang_hess = np.where(r > 1e-4, g1 * dlog, g2)
            M = np.zeros(x.shape[:-1] + (n, n))
            idx = np.arange(1, n)
            M[..., 0, 0] = ric_r + g2 - inv * g1 * g1
            M[..., idx, idx] = (ric_t + tang_hess)[..., None]
            return M, frames
        frames = base.frame(x)
        grad = self.weight.grad(x)
        hess = self.weight.hess(x)
        gE = np.einsum("...a,...ai->...i", grad, frames)
        HE = np.swapaxes(frames, -1, -2) @ hess @ frames
        sigma = base.accel_coefficient()
        scalar = base.ricci_coefficient(x)
        if sigma:
            scalar = scalar + sigma * np.einsum("...a,...a->...", grad, x)
        M = HE + scalar[..., None, None] * np.eye(n) - inv * gE[..., :, None] * gE[..., None, :]
        return M, frames

    def ric_n_infinite(self, p):
        """True when Ric_N is identically -inf (N = n with a non-constant weight)."""
        return p.N == p.n and not self.weight.is_constant


# -- geodesic records ------------------------------------------------------------


@dataclass
class GeodesicRecord:
    """Sampled unit-speed geodesic with weight, reparametrization and volume densities."""

    start: np.ndarray
    direction: np.ndarray
    eps: float
    t: np.ndarray
    positions: np.ndarray
    f: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    phi: np.ndarray
    A: np.ndarray
    Af: np.ndarray
    ric_g: np.ndarray
    A_root: np.ndarray
    length: float
    step: float
    n: int = 2

    def phi_for(self, eps):
        if eps == self.eps:
            return self.phi
        return _phi(self.f, self.t, eps, self.n)


def _phi(f, t, eps, n):
    return cumulative_trapezoid(np.exp(2.0 * (eps - 1.0) * f / (n - 1)), t, initial=0.0)


def geodesic(model, start, direction, length, step=None, eps=0.0):
    """Sample the unit-speed geodesic from ``start`` with unit ``direction``.

    ``step`` defaults to length/2048 and is rounded so that it divides the length.
    The reparametrization phi uses the given eps.
    """
    if not length > 0:
        raise DomainError(f"geodesic length must be positive, got {length!r}")
    if step is None:
        step = length / DEFAULT_STEPS
    if not step > 0:
        raise DomainError(f"step must be positive, got {step!r}", clause="step>0")
    start = np.asarray(start, dtype=float)
    direction = np.asarray(direction, dtype=float)
    model.base.check_tangent(start, direction)
    m = max(2, int(math.ceil(length / step - 1e-9)))
    t = np.linspace(0.0, length, m + 1)
    along = model.along(start, direction, t)
    A = along.A_root ** (model.n - 1)
    phi = _phi(along.f, t, eps, model.n)
    return GeodesicRecord(
        start=start,
        direction=direction,
        eps=float(eps),
        t=t,
        positions=along.pos,
        f=along.f,
        f1=along.f1,
        f2=along.f2,
        phi=phi,
        A=A,
        Af=np.exp(-along.f) * A,
        ric_g=along.ric_g,
        A_root=along.A_root,
        length=float(length),
        step=float(length / m),
        n=model.n,
    )


def ric_n_along(model, rec, p):
    """Ric_N(gamma', gamma') at each sample; -inf everywhere when N = n and f is not constant."""
    if model.ric_n_infinite(p):
        return np.full_like(rec.t, -np.inf)
    return rec.ric_g + rec.f2 - inv_n_minus_dim(p.n, p.N) * rec.f1**2


# -- direction sets and Ric_{N-} -----------------------------------------------------


def _van_der_corput(count):
    out = np.zeros(count)
    for i in range(count):
        k, denom, x = i, 1.0, 0.0
        while k:
            denom *= 2.0
            k, bit = divmod(k, 2)
            x += bit / denom
        out[i] = x
    return out


@lru_cache(maxsize=64)
def _direction_set_cached(n, count):
    if n == 2:
        ang = 2.0 * math.pi * _van_der_corput(count)
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    from scipy.special import ndtri

    pts = qmc.Halton(d=n, scramble=False).random(count + 1)[1:]
    g = ndtri(pts)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def default_direction_count(n):
    if n == 2:
        return 64
    if n == 3:
        return 256
    return 256 * (n - 2)


def direction_set(n, count=None):
    """Deterministic quasi-uniform unit vectors in R^n; the set for ``count`` extends every smaller one."""
    if count is None:
        count = default_direction_count(n)
    if count < 1:
        raise DomainError("direction count must be positive")
    return _direction_set_cached(int(n), int(count)).copy()


def _direction_values(M, U):
    """u^T M u for every direction u (rows of U) and every form M: shape (..., len(U))."""
    n = U.shape[-1]
    outer = (U[:, :, None] * U[:, None, :]).reshape(len(U), n * n)
    return M.reshape(M.shape[:-2] + (n * n,)) @ outer.T


def ric_n_minus_many(model, points, p, directions=None, exact=False):
    """Ric_{N-} at many points: sampled minimum over a direction set, or exact eigenvalue minimum."""
    points = np.asarray(points, dtype=float)
    if model.ric_n_infinite(p):
        return np.full(points.shape[:-1], -np.inf)
    M, _ = model.ricci_form(points, p)
    if exact:
        return np.linalg.eigvalsh(M)[..., 0]
    n = model.n
    diag = np.einsum("...ii->...i", M)
    off = M - diag[..., :, None] * np.eye(n)
    scale = np.maximum(np.abs(diag).max(axis=-1), 1.0)
    isotropic = (np.abs(off).max(axis=(-1, -2)) <= 1e-12 * scale) & (np.ptp(diag, axis=-1) <= 1e-12 * scale)
    if directions is not None and directions < 8:
        raise DomainError("at least 8 directions are required", clause="directions>=8")
    U = direction_set(n, directions)
    vals = _direction_values(M, U).min(axis=-1)
    return np.where(isotropic, diag[..., 0], vals)


def ric_n_minus(model, point, p, directions=None, exact=False):
    """Ric_{N-}(point): see :data:`RIC_N_MINUS_LABEL` for what the sampled value bounds."""
    point = np.asarray(point, dtype=float)
    return float(ric_n_minus_many(model, point[None, :], p, directions, exact)[0])


# -- quadrature over balls -----------------------------------------------------------


@lru_cache(maxsize=64)
def _sphere_rule(dim_sphere, m):
    """Nodes/weights on S^dim_sphere in R^(dim_sphere+1); weights sum to its area."""
    if dim_sphere == 1:
        ang = 2.0 * math.pi * np.arange(m) / m
        return np.stack([np.cos(ang), np.sin(ang)], axis=-1), np.full(m, 2.0 * math.pi / m)
    alpha = (dim_sphere - 2) / 2.0
    if alpha == 0:
        z, wz = roots_legendre(m)
    else:
        z, wz = roots_jacobi(m, alpha, alpha)
    sub, wsub = _sphere_rule(dim_sphere - 1, 2 * m if dim_sphere == 2 else m)
    rho = np.sqrt(1.0 - z * z)
    nodes = np.concatenate(
        [rho[:, None, None] * sub[None, :, :], np.broadcast_to(z[:, None, None], (m, sub.shape[0], 1))], axis=-1
    ).reshape(-1, dim_sphere + 1)
    weights = (wz[:, None] * wsub[None, :]).reshape(-1)
    return nodes, weights


def sphere_quadrature(n, m):
    """Product quadrature on the unit sphere S^(n-1) in R^n with resolution m."""
    nodes, weights = _sphere_rule(n - 1, m)
    return nodes.copy(), weights.copy()


def _check_radius(model, center, R):
    inj = model.base.injectivity_radius(center)
    if not R < inj:
        raise UnsupportedError(
            f"radius {R!r} is not below the injectivity radius {inj!r} at the center; cut-locus integration is out of scope"
        )


def _polar_nodes(model, center, R, m_r, m_ang):
    center = np.asarray(center, dtype=float)
    n = model.n
    u, wu = sphere_quadrature(n, m_ang)
    z, wz = roots_legendre(m_r)
    t = 0.5 * R * (z + 1.0)
    wt = 0.5 * R * wz
    frame = model.base.frame(center)
    dirs = u @ frame.T  # ambient unit vectors
    pos, _, _ = model.base.geodesic(center, dirs[None, :, :], t[:, None])
    A = model.base.jacobian(t)
    w = (wt * A)[:, None] * wu[None, :]
    return pos.reshape(-1, pos.shape[-1]), w.reshape(-1)


def ball_integral(model, center, R, func=None, rtol=1e-6, m_start=16, max_level=6, weighted=True):
    """int_{B(center, R)} func d mu_f by polar Gauss quadrature, refined until successive
    resolutions agree to ``rtol``. ``func`` maps ambient points (..., d) to values."""
    center = np.asarray(center, dtype=float)
    _check_radius(model, center, R)
    prev = None
    m = m_start
    history = []
    for level in range(max_level):
        m_ang = m if model.n <= 3 else max(4, m // 2)
        pos, w = _polar_nodes(model, center, R, m, m_ang)
        vals = np.ones(len(w)) if func is None else np.asarray(func(pos), dtype=float)
        dens = np.exp(-model.f(pos)) if weighted else 1.0
        value = float(np.sum(w * dens * vals))
        history.append((m, value))
        if prev is not None and abs(value - prev) <= rtol * max(abs(value), 1e-300):
            return value
        if prev is not None and value == 0.0 and prev == 0.0:
            return 0.0
        prev = value
        m *= 2
    raise NumericError(f"ball quadrature did not reach rtol={rtol} (history {history})", diagnostics={"history": history})


def ball_measure(model, center, R, rtol=1e-6, **kw):
    """mu_f(B(center, R))."""
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R!r}")
    return ball_integral(model, center, R, None, rtol=rtol, **kw)


def ball_measure_fixed(model, center, R, m_r, m_ang):
    """mu_f(B(center, R)) with a fixed product rule (used for convergence studies)."""
    _check_radius(model, np.asarray(center, dtype=float), R)
    pos, w = _polar_nodes(model, center, R, m_r, m_ang)
    return float(np.sum(w * np.exp(-model.f(pos))))


def manifold_integral(model, func=None, m=64, weighted=True):
    """int_M func d mu_f over a compact base (sphere by polar coordinates, torus by a periodic grid)."""
    base = model.base
    if isinstance(base, RoundSphere):
        center = base.default_point()
        R = math.pi * base.radius
        m_ang = m if model.n <= 3 else max(4, m // 2)
        pos, w = _polar_nodes(model, center, R, m, m_ang)
    elif isinstance(base, FlatTorus):
        axes = [np.arange(m) * P / m for P in base.periods]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.n)
        pos = grid
        w = np.full(len(grid), base.volume() / len(grid))
    else:
        raise UnsupportedError(f"{base.name} is not compact")
    vals = np.ones(len(w)) if func is None else np.asarray(func(pos), dtype=float)
    dens = np.exp(-model.f(pos)) if weighted else 1.0
    return float(np.sum(w * dens * vals))


def _excess_integrand(model, p, H, directions):
    def integrand(pos):
        ric = ric_n_minus_many(model, pos, p, directions)
        return np.maximum((model.n - 1) * H - ric, 0.0)

    return integrand


def curvature_excess(model, center, R, p, H, rtol=1e-4, directions=None):
    """(int_B ((n-1)H - Ric_{N-})_+ d mu_f, the same divided by mu_f(B))."""
    if not H > 0:
        raise DomainError(f"H must be positive, got {H!r}", clause="H>0")
    if model.ric_n_infinite(p):
        raise DomainError(
            "Ric_n is -inf for a non-constant weight; the curvature excess is not defined for this configuration",
            clause="N=n-nonconstant-f",
        )
    integral = ball_integral(model, center, R, _excess_integrand(model, p, H, directions), rtol=rtol)
    measure = ball_measure(model, center, R)
    return integral, integral / measure


def global_excess(model, p, H, m=96, directions=None):
    """Normalized excess over a compact model: int_M (...)_+ d mu_f / mu_f(M)."""
    if model.ric_n_infinite(p):
        raise DomainError(
            "Ric_n is -inf for a non-constant weight; the curvature excess is not defined for this configuration",
            clause="N=n-nonconstant-f",
        )
    integral = manifold_integral(model, _excess_integrand(model, p, H, directions), m=m)
    return integral, integral / manifold_integral(model, None, m=m)


# -- the weighted curvature condition ----------------------------------------------------


@dataclass
class ConditionResult:
    a: float
    b: float
    satisfied: bool
    witness: dict | None
    min_margin: float
    points: int
    directions: int
    label: str = RIC_N_MINUS_LABEL


def _region_points(model, region, m=32):
    base = model.base
    if region is None:
        if isinstance(base, FlatTorus):
            axes = [np.arange(m) * P / m for P in base.periods]
            return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, model.n)
        if isinstance(base, RoundSphere):
            pos, _ = _polar_nodes(model, base.default_point(), math.pi * base.radius, m, m if model.n <= 3 else m // 2)
            return np.concatenate([base.default_point()[None, :], -base.default_point()[None, :], pos])
        raise UnsupportedError("a whole-manifold region needs a compact base")
    center = region.point
    if isinstance(base, WarpedProduct):
        base.injectivity_radius(center)
    pos, _ = _polar_nodes(model, center, region.radius, m, m if model.n <= 3 else max(4, m // 2))
    return np.concatenate([center[None, :], pos])


def check_condition(model, region, p, K, directions=None, m=32):
    """Tightest (a, b) with a <= e^{2(1-eps) f/(n-1)} <= b on the sampled region, and whether
    Ric_N >= K e^{4(eps-1) f/(n-1)} holds at every sampled point and direction."""
    pts = _region_points(model, region, m)
    n = model.n
    f = model.f(pts)
    s = np.exp(2.0 * (1.0 - p.eps) * f / (n - 1))
    a, b = float(s.min()), float(s.max())
    required = K * np.exp(4.0 * (p.eps - 1.0) * f / (n - 1))
    if model.ric_n_infinite(p):
        ric_min = np.full(len(pts), -np.inf)
        dirs_used = 0
    else:
        M, frames = model.ricci_form(pts, p)
        U = direction_set(n, directions)
        dirs_used = len(U)
        vals = _direction_values(M, U)
        ric_min = vals.min(axis=-1)
    margin = ric_min - required
    worst = int(np.argmin(margin))
    satisfied = bool(margin[worst] >= 0)
    witness = None
    if not satisfied:
        witness = {"point": pts[worst].tolist(), "ric_n": float(ric_min[worst]), "required": float(required[worst])}
        if dirs_used:
            k = int(np.argmin(vals[worst]))
            witness["direction"] = (frames[worst] @ U[k]).tolist()
    return ConditionResult(a, b, satisfied, witness, float(margin[worst]), len(pts), dirs_used)


# -- Bishop profile ------------------------------------------------------------------


@dataclass
class BishopProfile:
    tau: np.ndarray
    h1: np.ndarray
    d2h1: np.ndarray  # centered second differences at tau[1:-1]
    ric_n: np.ndarray  # Ric_N of the reparametrized velocity at tau
    t_of_tau: np.ndarray
    step: float
    c: float
    truncated: bool
    truncated_at: float | None

    @property
    def rhs(self):
        return -self.c * self.h1[1:-1] * self.ric_n[1:-1]


_GL_NODES, _GL_WEIGHTS = roots_legendre(8)


def _phi_rate(model, rec, k, s):
    return np.exp(k * model.along(rec.start, rec.direction, s).f)


def _phi_between(model, rec, k, lo, hi):
    """Gauss-Legendre integral of e^{k f} over [lo, hi], elementwise."""
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    s = mid[:, None] + half[:, None] * _GL_NODES
    vals = _phi_rate(model, rec, k, s.ravel()).reshape(s.shape)
    return half * (vals @ _GL_WEIGHTS)


def _inverse_phi(model, rec, eps, end):
    """Uniform tau grid on [0, phi(t_end)] and t(tau) accurate to rounding.

    Second differences divide by step^2, so t(tau) must be smooth at the grid scale:
    phi is integrated per sample interval and the spline guess is refined by Newton.
    """
    t = rec.t[: end + 1]
    k = 2.0 * (eps - 1.0) / (model.n - 1)
    if k == 0.0:
        return t.copy(), t.copy()
    phi = np.concatenate([[0.0], np.cumsum(_phi_between(model, rec, k, t[:-1], t[1:]))])
    tau = np.linspace(0.0, phi[-1], end + 1)
    guess = np.clip(CubicSpline(phi, t)(tau), 0.0, t[-1])
    for _ in range(3):
        i = np.clip(np.searchsorted(t, guess, side="right") - 1, 0, end - 1)
        value = phi[i] + _phi_between(model, rec, k, t[i], guess)
        guess = np.clip(guess - (value - tau) / _phi_rate(model, rec, k, guess), 0.0, t[-1])
    guess[0], guess[-1] = 0.0, t[-1]
    return tau, guess


def bishop_profile(model, rec, p):
    """h1(tau) = h(phi^{-1}(tau)) with h = e^{-c f} A^c on a uniform tau grid."""
    c = p.c
    n = model.n
    t = rec.t
    root = rec.A_root
    truncated = False
    truncated_at = None
    interior_bad = np.nonzero(root[1:-1] <= 0)[0]
    end = len(t) - 1
    if interior_bad.size:
        # Keep only samples with a positive density; the next sample is past the zero.
        end = int(interior_bad[0])
        truncated = True
        truncated_at = float(t[end + 1])
    if end < 4:
        raise NumericError("geodesic profile is too short after conjugate-point truncation")
    tau, t_tau = _inverse_phi(model, rec, p.eps, end)
    along = model.along(rec.start, rec.direction, t_tau)
    root_tau = np.maximum(along.A_root, 0.0)
    h1 = np.exp(-c * along.f) * root_tau ** ((n - 1) * c)
    step = float(tau[1] - tau[0])
    d2 = (h1[2:] - 2.0 * h1[1:-1] + h1[:-2]) / step**2
    if model.ric_n_infinite(p):
        ric = np.full_like(tau, -np.inf)
    else:
        ric = along.ric_g + along.f2 - inv_n_minus_dim(n, p.N) * along.f1**2
        # |(gamma o phi^{-1})'| = 1/phi'(t) with phi' = e^{2(eps-1) f/(n-1)}.
        ric = ric * np.exp(-4.0 * (p.eps - 1.0) * along.f / (n - 1))
    return BishopProfile(tau, h1, d2, ric, t_tau, step, c, truncated, truncated_at)


# -- sampling under mu_f -----------------------------------------------------------


def sample_ball(model, center, R, count, rng, f_floor=None):
    """Draw ``count`` points of B(center, R) distributed as mu_f restricted to the ball.

    Uniform-volume polar sampling (radius by rejection against the polar density)
    followed by rejection with acceptance e^{-(f - f_floor)}. ``f_floor`` must be a
    lower bound of f on the ball; a violated bound raises :class:`NumericError`.
    """
    center = np.asarray(center, dtype=float)
    _check_radius(model, center, R)
    base = model.base
    n = model.n
    if f_floor is None:
        f_floor = weight_floor(model, center, R)
    kappa = base.kappa
    if kappa is not None and kappa > 0:
        peak_t = min(R, 0.5 * math.pi / math.sqrt(kappa))
        a_max = float(base.jacobian(np.array([peak_t]))[0])
    elif kappa is not None:
        a_max = float(base.jacobian(np.array([R]))[0])
    else:
        grid = np.linspace(0.0, R, 4097)
        a_max = float(base.jacobian(grid).max()) * 1.001
    frame = base.frame(center)
    out = []
    have = 0
    while have < count:
        batch = max(64, int(1.5 * (count - have)) + 16)
        t = rng.uniform(0.0, R, batch)
        u = rng.standard_normal((batch, n))
        coin_r = rng.uniform(0.0, 1.0, batch)
        coin_f = rng.uniform(0.0, 1.0, batch)
        keep = coin_r * a_max <= base.jacobian(t)
        t, u, coin_f = t[keep], u[keep], coin_f[keep]
        u /= np.linalg.norm(u, axis=-1, keepdims=True)
        dirs = u @ frame.T
        pos, _, _ = base.geodesic(center, dirs, t)
        accept = np.exp(-(model.f(pos) - f_floor))
        if np.any(accept > 1.0 + 1e-12):
            raise NumericError("rejection envelope violated: f dropped below the supplied floor")
        pos = pos[coin_f <= accept]
        out.append(pos)
        have += len(pos)
    return np.concatenate(out)[:count]


def weight_floor(model, center, R, m=48):
    """A conservative lower bound of f on B(center, R) from a dense polar grid."""
    pos, _ = _polar_nodes(model, center, R, m, m if model.n <= 3 else max(4, m // 2))
    f = np.concatenate([model.f(pos), model.f(np.asarray(center, dtype=float)[None, :])])
    spread = float(f.max() - f.min())
    return float(f.min()) - 0.05 * spread - 1e-9


# -- model specification files ----------------------------------------------------------


def _build_weight(spec, base):
    spec = spec or {"kind": "zero"}
    kind = spec.get("kind", "zero")
    params = spec.get("params", {})
    if isinstance(base, WarpedProduct):
        if kind == "zero":
            return RadialWeight("zero")
        if kind == "constant":
            return RadialWeight("constant", value=params.get("value", 0.0))
        if kind == "quadratic":
            return RadialWeight("quadratic", value=params.get("value", 0.0), q=params.get("q", 0.0))
        if kind == "expression":
            return RadialWeight("expression", expr=params["expr"], scale=params.get("scale", 1.0))
        raise UnsupportedError(f"weight kind {kind!r} is not supported on warped products")
    d = base.ambient_dim
    if kind == "zero":
        return ZeroWeight()
    if kind == "constant":
        return ConstantWeight(params.get("value", 0.0))
    if kind == "linear":
        return LinearWeight(params["w"], params.get("value", 0.0))
    if kind == "quadratic":
        return QuadraticWeight(params.get("Q"), params.get("w"), params.get("value", 0.0), dim=d)
    if kind == "spherical_harmonic":
        if not isinstance(base, RoundSphere):
            raise UnsupportedError("spherical_harmonic weights need a round_sphere base")
        axis = np.asarray(params.get("axis", np.eye(d)[-1]), dtype=float)
        axis = axis / np.linalg.norm(axis)
        amp = float(params.get("amplitude", 1.0))
        degree = int(params.get("degree", 1))
        rho = base.radius
        if degree == 1:
            return QuadraticWeight(None, amp * axis / rho, 0.0, dim=d)
        if degree == 2:
            Q = 2.0 * amp * np.outer(axis, axis) / rho**2
            return QuadraticWeight(Q, None, -amp / (base.n + 1), dim=d)
        raise UnsupportedError("spherical_harmonic weights support degree 1 or 2")
    if kind == "expression":
        return ExpressionWeight(params["expr"], params.get("scale", 1.0))
    raise UnsupportedError(f"unknown weight kind {kind!r}")


def load_model(spec):
    """Build a :class:`WeightedModel` from a JSON-compatible dict."""
    try:
        n = int(spec["dimension"])
        kind = spec["base"]
    except KeyError as exc:
        raise DomainError(f"model spec is missing field {exc.args[0]!r}") from None
    params = spec.get("base_params", {}) or {}
    if kind == "euclidean":
        base = Euclidean(n)
    elif kind == "flat_torus":
        base = FlatTorus(n, params.get("periods", 2.0 * math.pi))
    elif kind == "round_sphere":
        base = RoundSphere(n, params.get("radius", 1.0))
    elif kind == "hyperbolic":
        base = Hyperbolic(n, params.get("curvature_scale", 1.0))
    elif kind == "warped_product":
        warp = dict(params.get("warp", {"kind": "sn", "kappa": 0.0}))
        base = WarpedProduct(n, Warp(**warp))
    else:
        raise UnsupportedError(f"unknown base {kind!r}")
    return WeightedModel(base, _build_weight(spec.get("weight"), base))


def load_model_file(path):
    with open(path) as fh:
        return load_model(json.load(fh))

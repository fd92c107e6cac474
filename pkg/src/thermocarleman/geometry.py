"""Boundary meshes for the two benchmark domains.

Cap: Sigma is the flat disk (segment in 2-D) on y_n = 0, S the hemisphere
(semicircle) of the same radius.  Cone: Sigma is the lateral surface
``|y'| = tau_rho * y_n`` cut off by the sphere ``|y| = R``; S is the
spherical cap inside the cone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ParameterViolation

S_TAG = "S"
SIGMA_TAG = "Sigma"


@dataclass(frozen=True)
class BoundaryMesh:
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    tags: np.ndarray
    kind: str = "cap"
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def select(self, tag: str | None) -> BoundaryMesh:
        if tag is None:
            return self
        sel = self.tags == tag
        return BoundaryMesh(self.nodes[sel], self.normals[sel], self.weights[sel], self.tags[sel], self.kind, self.params)

    def area(self, tag: str | None = None) -> float:
        return float(self.select(tag).weights.sum())

    def __len__(self) -> int:
        return len(self.weights)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Strict interior predicate of the domain the mesh bounds."""
        pts = np.atleast_2d(pts)
        if self.kind == "cap":
            return (np.linalg.norm(pts, axis=1) < self.params["radius"]) & (pts[:, -1] > 0)
        rad = self.params["radius"]
        lateral = np.linalg.norm(pts[:, :-1], axis=1)
        return (np.linalg.norm(pts, axis=1) < rad) & (pts[:, -1] > 0) & (lateral < self.params["tau_rho"] * pts[:, -1])

    def spacing(self) -> float:
        """Typical node spacing (square root of the mean patch area in 3-D)."""
        w = self.weights
        return float(np.sqrt(w.mean())) if self.dim == 3 else float(w.mean())

    def distance_to_boundary(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        rad = self.params["radius"]
        if self.kind == "cap":
            return float(min(rad - np.linalg.norm(x), x[-1]))
        beta = math.atan(self.params["tau_rho"])
        lat = np.linalg.norm(x[:-1])
        polar = math.atan2(lat, x[-1])
        d_cone = np.linalg.norm(x) * math.sin(beta - polar) if polar < beta else 0.0
        return float(min(rad - np.linalg.norm(x), d_cone))

    def to_csv(self, path: str | Path) -> None:
        n = self.dim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tag"] + [f"x{i+1}" for i in range(n)] + [f"nu{i+1}" for i in range(n)] + ["weight"])
            for t, p, nu, wt in zip(self.tags, self.nodes, self.normals, self.weights):
                w.writerow([t] + [repr(float(v)) for v in p] + [repr(float(v)) for v in nu] + [repr(float(wt))])

    @classmethod
    def from_csv(cls, path: str | Path, kind: str = "cap", params: dict | None = None) -> BoundaryMesh:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        n = sum(1 for h in head if h.startswith("x"))
        tags = np.array([r[0] for r in body])
        arr = np.array([[float(v) for v in r[1:]] for r in body])
        return cls(arr[:, :n], arr[:, n : 2 * n], arr[:, 2 * n], tags, kind, dict(params or {}))


def _gl(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _concat(parts, kind, params):
    nodes = np.concatenate([p[0] for p in parts])
    normals = np.concatenate([p[1] for p in parts])
    weights = np.concatenate([p[2] for p in parts])
    tags = np.concatenate([np.full(len(p[2]), p[3]) for p in parts])
    return BoundaryMesh(nodes, normals, weights, tags, kind, params)


def _sphere_patch(radius: float, theta_max: float, res: int, tag: str):
    th, wth = _gl(0.0, theta_max, res)
    nphi = 2 * res
    phi = 2 * math.pi * np.arange(nphi) / nphi
    T, P = np.meshgrid(th, phi, indexing="ij")
    W = np.outer(wth * np.sin(th), np.full(nphi, 2 * math.pi / nphi)) * radius**2
    unit = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    return radius * unit, unit, W.ravel(), tag


def make_cap_domain(radius: float = 1.0, resolution: int = 16, n: int = 3) -> BoundaryMesh:
    if radius <= 0:
        raise ParameterViolation("radius", "must be positive")
    if resolution < 4:
        raise ParameterViolation("resolution", "must be >= 4")
    params = {"radius": float(radius), "resolution": resolution}
    if n == 3:
        s = _sphere_patch(radius, math.pi / 2, resolution, S_TAG)
        rr, wr = _gl(0.0, radius, resolution)
        nphi = 2 * resolution
        phi = 2 * math.pi * np.arange(nphi) / nphi
        Rr, P = np.meshgrid(rr, phi, indexing="ij")
        nodes = np.stack([Rr * np.cos(P), Rr * np.sin(P), np.zeros_like(Rr)], axis=-1).reshape(-1, 3)
        W = np.outer(wr * rr, np.full(nphi, 2 * math.pi / nphi)).ravel()
        normals = np.tile([0.0, 0.0, -1.0], (len(W), 1))
        return _concat([s, (nodes, normals, W, SIGMA_TAG)], "cap", params)
    if n == 2:
        th, wth = _gl(0.0, math.pi, 2 * resolution)
        unit = np.stack([np.cos(th), np.sin(th)], axis=-1)
        s = (radius * unit, unit, radius * wth, S_TAG)
        xs, wx = _gl(-radius, radius, 2 * resolution)
        nodes = np.stack([xs, np.zeros_like(xs)], axis=-1)
        normals = np.tile([0.0, -1.0], (len(xs), 1))
        return _concat([s, (nodes, normals, wx, SIGMA_TAG)], "cap", params)
    raise ValueError("n must be 2 or 3")


@dataclass(frozen=True)
class ConeSpec:
    rho_exp: float
    cap_radius: float = 1.0

    def __post_init__(self):
        if not self.rho_exp > 1:
            raise ParameterViolation("rho", "rho > 1 required")
        if not self.cap_radius > 0:
            raise ParameterViolation("cap_radius", "must be positive")

    @property
    def tau_rho(self) -> float:
        return math.tan(math.pi / (2 * self.rho_exp))

    @property
    def half_angle(self) -> float:
        return math.atan(self.tau_rho)


def make_cone_domain(spec: ConeSpec, resolution: int = 16) -> BoundaryMesh:
    if resolution < 4:
        raise ParameterViolation("resolution", "must be >= 4")
    beta = spec.half_angle
    rad = spec.cap_radius
    params = {"radius": rad, "tau_rho": spec.tau_rho, "rho_exp": spec.rho_exp, "resolution": resolution}
    s = _sphere_patch(rad, beta, resolution, S_TAG)
    t, wt = _gl(0.0, rad, 2 * resolution)
    nphi = 2 * resolution
    phi = 2 * math.pi * np.arange(nphi) / nphi
    Tt, P = np.meshgrid(t, phi, indexing="ij")
    sb, cb = math.sin(beta), math.cos(beta)
    nodes = np.stack([Tt * sb * np.cos(P), Tt * sb * np.sin(P), Tt * cb], axis=-1).reshape(-1, 3)
    normals = np.stack([cb * np.cos(P), cb * np.sin(P), -sb * np.ones_like(P)], axis=-1).reshape(-1, 3)
    W = np.outer(wt * t * sb, np.full(nphi, 2 * math.pi / nphi)).ravel()
    return _concat([s, (nodes, normals, W, SIGMA_TAG)], "cone", params)


def surface_integrate(mesh: BoundaryMesh, tagfilter: str | None, integrand: Callable) -> np.ndarray:
    """Weighted sum of ``integrand(nodes, normals)`` over the selected nodes.

    The integrand returns an array whose first axis runs over the nodes.
    """
    sub = mesh.select(tagfilter)
    vals = np.asarray(integrand(sub.nodes, sub.normals))
    return np.tensordot(sub.weights, vals, axes=(0, 0))

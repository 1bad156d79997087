"""Samplers for spheres, wavefronts, the caustic and the cut locus, plus export.

Every sampler returns a ``MeshOutput`` whose vertices carry the covector and
time that produced them, so an exported file can be re-validated through
``exp`` on its own.  Rows of the covector grid may be processed by a thread
pool (the compiled kernels release the GIL); assembly is always row-major.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .elliptic import complete_K
from .errors import DomainError
from .expmap import GroupPoint, exp, r1r2
from .pendulum import Covector, EllipticCoords, Stratum, StratumTag, classify, from_elliptic
from .plane import TWO_PI, classify_plane_batch, cut_family, gamma_curves
from .symmetry import plane_signs
from .synthesis import plane_minimizer_batch, tt_vec

FOUR_PI = 4.0 * math.pi
CLIP = 1e3
FIELDS = ("x", "y", "z", "gamma", "c", "t", "stratum", "family", "r1", "r2")


@dataclass(frozen=True)
class SampleGrid:
    n_gamma: int = 256
    n_c: int = 256
    c_max: float = 6.0
    t_steps: int = 8
    radius: float = math.pi

    def __post_init__(self):
        if min(self.n_gamma, self.n_c, self.t_steps) < 2:
            raise DomainError("grid counts must be at least 2")
        if not (self.c_max > 0.0 and self.radius > 0.0):
            raise DomainError("c_max and radius must be positive")

    def covectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Row-major (gamma, c) arrays of shape (n_gamma, n_c)."""
        g = np.arange(self.n_gamma) * (FOUR_PI / self.n_gamma)
        c = np.linspace(-self.c_max, self.c_max, self.n_c)
        return np.meshgrid(g, c, indexing="ij")


@dataclass
class MeshOutput:
    vertices: np.ndarray                      # (n, 3)
    gamma: np.ndarray
    c: np.ndarray
    t: np.ndarray
    stratum: list[str]
    family: list[str]
    faces: np.ndarray | None = None           # (m, 3) vertex indices
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.vertices)
        if not (len(self.gamma) == len(self.c) == len(self.t) == len(self.stratum)
                == len(self.family) == n):
            raise DomainError("payload length differs from vertex count")
        if self.faces is not None and len(self.faces) and (
                self.faces.min() < 0 or self.faces.max() >= n):
            raise DomainError("face index out of range")

    def __len__(self) -> int:
        return len(self.vertices)

    def revalidate(self, atol: float = 1e-9) -> float:
        """Max distance between each vertex and exp of its payload; raises above atol."""
        worst = 0.0
        for v, g, c, t in zip(self.vertices, self.gamma, self.c, self.t):
            p = exp(Covector(float(g), float(c)), float(t))
            worst = max(worst, float(np.max(np.abs(np.array(tuple(p)) - v))))
        if worst > atol:
            raise DomainError(f"vertex re-validation failed: {worst:.3e} > {atol:.1e}")
        return worst


def _component(g: float, c: float) -> str:
    return classify(Covector(g, c)).component


def _map_rows(fn, rows, workers: int):
    if workers <= 1:
        return [fn(r) for r in rows]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, rows))


def _grid_faces(keep: np.ndarray) -> np.ndarray:
    """Triangles of the (gamma periodic) x c grid whose corners are all kept."""
    n_g, n_c = keep.shape
    index = -np.ones(keep.shape, dtype=np.int64)
    index[keep] = np.arange(int(keep.sum()))
    faces = []
    for i in range(n_g):
        i2 = (i + 1) % n_g
        for j in range(n_c - 1):
            a, b, c, d = index[i, j], index[i2, j], index[i2, j + 1], index[i, j + 1]
            if a >= 0 and b >= 0 and c >= 0:
                faces.append((a, b, c))
            if a >= 0 and c >= 0 and d >= 0:
                faces.append((a, c, d))
    return np.array(faces, dtype=np.int64).reshape(-1, 3)


def _equilibria(r: float, filtered: bool) -> list[tuple[float, float, bool]]:
    """Equilibria missed by a generic grid, as (gamma, c, minimizing).

    C4 (x-axis) stays minimizing up to 2pi, C5 (z-axis) for ever.
    """
    out = [(math.pi, 0.0, True), (3.0 * math.pi, 0.0, True)]
    if not filtered or r <= TWO_PI:
        out = [(0.0, 0.0, r <= TWO_PI), (TWO_PI, 0.0, r <= TWO_PI)] + out
    return out


def _endpoint_mesh(r: float, grid: SampleGrid, filtered: bool, workers: int) -> MeshOutput:
    if not r > 0.0:
        raise DomainError("radius must be positive")
    gg, cc = grid.covectors()

    def row(i):
        q = kernels.exp_batch(gg[i], cc[i], np.full(grid.n_c, r))
        return q, tt_vec(gg[i], cc[i])

    parts = _map_rows(row, range(grid.n_gamma), workers)
    q = np.stack([p[0] for p in parts])
    cut = np.stack([p[1] for p in parts])
    optimal = cut >= r
    finite = np.all(np.isfinite(q), axis=2) & np.all(np.abs(q) <= CLIP, axis=2)
    keep = finite & (optimal if filtered else True)
    verts = q[keep]
    g, c = gg[keep], cc[keep]
    fam = np.where(optimal[keep], "minimizing", "beyond-cut")
    faces = _grid_faces(keep)
    extra = _equilibria(r, filtered)
    ev = np.array([tuple(exp(Covector(a, b), r)) for a, b, _ in extra]).reshape(-1, 3)
    verts = np.vstack([verts, ev])
    g = np.concatenate([g, [a for a, _, _ in extra]])
    c = np.concatenate([c, [b for _, b, _ in extra]])
    fam = list(fam) + ["minimizing" if m else "beyond-cut" for _, _, m in extra]
    strata = [_component(a, b) for a, b in zip(g, c)]
    stats = {"clipped": int(np.sum(~finite & (optimal if filtered else True))),
             "vertices": len(verts), "faces": len(faces)}
    return MeshOutput(verts, g, c, np.full(len(verts), r), strata, fam, faces, stats)


def sample_sphere(radius: float, grid: SampleGrid = SampleGrid(), workers: int = 1) -> MeshOutput:
    """Endpoints Exp(lambda, R) of geodesics still minimizing at length R."""
    return _endpoint_mesh(radius, grid, True, workers)


def sample_wavefront(radius: float, grid: SampleGrid = SampleGrid(), workers: int = 1) -> MeshOutput:
    """All endpoints Exp(lambda, R), minimizing or not."""
    return _endpoint_mesh(radius, grid, False, workers)


def sample_caustic(grid: SampleGrid = SampleGrid(), workers: int = 1) -> MeshOutput:
    """First conjugate points Exp(lambda, t_conj) over the oscillating and rotating strata."""
    gg, cc = grid.covectors()

    def row(i):
        t = kernels.conj_time_batch(gg[i], cc[i])
        q = kernels.exp_batch(gg[i], cc[i], np.where(np.isfinite(t), t, 0.0))
        return t, q

    parts = _map_rows(row, range(grid.n_gamma), workers)
    t = np.stack([p[0] for p in parts])
    q = np.stack([p[1] for p in parts])
    failed = np.isnan(t)
    conj = np.isfinite(t)
    ok = conj & np.all(np.abs(q) <= CLIP, axis=2)
    verts, g, c, tv = q[ok], gg[ok], cc[ok], t[ok]
    strata = [_component(a, b) for a, b in zip(g, c)]
    stats = {"failed": int(failed.sum()), "clipped": int(np.sum(conj & ~ok)),
             "no_conjugate": int(np.sum(np.isinf(t))), "vertices": len(verts)}
    return MeshOutput(verts, g, c, tv, strata, ["conjugate"] * len(verts),
                      _grid_faces(ok), stats)


def conjugate_level(k: float, s2: int, n: int = 160) -> tuple[np.ndarray, np.ndarray]:
    """Caustic points of one energy level of C2 (modulus k, sign s2), one period.

    Returns (points, phi) with points of shape (n, 3).
    """
    if not 0.0 < k < 1.0:
        raise DomainError("modulus must lie in (0, 1)")
    tag = StratumTag(Stratum.C2, s2=s2)
    phi = np.arange(n) * (4.0 * k * complete_K(k) / n)
    lam = [from_elliptic(EllipticCoords(float(p), k, tag)) for p in phi]
    g = np.array([v.gamma for v in lam])
    c = np.array([v.c for v in lam])
    t = kernels.conj_time_batch(g, c)
    return kernels.exp_batch(g, c, t), phi


def caustic_cusps(k: float, n: int = 160, z_frac: float = 0.05) -> np.ndarray:
    """Cusps of the local caustic component that lie on the plane z = 0.

    On a fixed energy level of C2 the conjugate curve reverses its tangent at
    its cusps; a reversal counts as planar when its |z| is below ``z_frac``
    times the largest |z| on the level.  Both rotation directions are scanned.
    """
    found = []
    for s2 in (1, -1):
        q, _ = conjugate_level(k, s2, n)
        d = np.roll(q, -1, axis=0) - q
        rev = np.nonzero(np.einsum("ij,ij->i", d, np.roll(d, -1, axis=0)) < 0.0)[0]
        zmax = float(np.max(np.abs(q[:, 2])))
        for i in rev:
            p = q[(i + 1) % n]
            if abs(p[2]) <= z_frac * zmax:
                found.append(p)
    return np.array(found).reshape(-1, 3)


def _curve_samples(extent: float, n: int):
    """Points of gamma_1, gamma_2, gamma_3, gamma_5 and P with their reflections."""
    ks = np.linspace(0.0, 1.0, n + 2)[1:-1]
    pts = []
    for which in (1, 2, 3, 5):
        for k in ks:
            x, y = gamma_curves(which, float(k))
            for i in (0, 1, 4, 5):
                sx, sy = plane_signs(i)
                pts.append((sx * x, sy * y))
    pts += [(TWO_PI, 0.0), (-TWO_PI, 0.0)]
    arr = np.unique(np.array(pts), axis=0)
    inside = np.all(np.abs(arr) <= extent, axis=1) & np.any(arr != 0.0, axis=1)
    return arr[inside]


def sample_cutlocus(extent: float, grid: SampleGrid = SampleGrid(), band: float = 1e-7) -> MeshOutput:
    """The cut locus in the plane z = 0: every non-Rest stratum, tagged Max or ConjCut."""
    if not extent > 0.0:
        raise DomainError("extent must be positive")
    xs = np.linspace(-extent, extent, grid.n_gamma)
    ys = np.linspace(-extent, extent, grid.n_c)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    pts = pts[np.any(pts != 0.0, axis=1)]
    pts = np.vstack([pts, _curve_samples(extent, max(grid.n_gamma // 4, 8))])
    idx = classify_plane_batch(pts[:, 0], pts[:, 1], band)
    cut = np.array([cut_family(int(j)) != "Rest" for j in idx])
    pts, idx = pts[cut], idx[cut]
    g, c, t = plane_minimizer_batch(pts[:, 0], pts[:, 1], band)
    verts = np.column_stack([pts, np.zeros(len(pts))])
    strata = [f"M{int(j)}" for j in idx]
    fam = [cut_family(int(j)) for j in idx]
    return MeshOutput(verts, g, c, t, strata, fam, None, {"vertices": len(verts)})


# Export ------------------------------------------------------------------------

def _rows(mesh: MeshOutput):
    for v, g, c, t, s, f in zip(mesh.vertices, mesh.gamma, mesh.c, mesh.t,
                                mesh.stratum, mesh.family):
        r1, r2 = r1r2(GroupPoint(*map(float, v)))
        yield [float(v[0]), float(v[1]), float(v[2]), float(g), float(c), float(t), s, f, r1, r2]


def _fmt(v) -> str:
    return format(v, ".17g") if isinstance(v, float) else str(v)


def export(mesh: MeshOutput, path, fmt: str | None = None) -> Path:
    """Write CSV, JSON lines or OBJ, chosen by ``fmt`` or the file extension."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt in ("csv",):
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(FIELDS)
            for row in _rows(mesh):
                w.writerow([_fmt(v) for v in row])
    elif fmt in ("jsonl", "json"):
        with path.open("w") as fh:
            for row in _rows(mesh):
                fh.write(json.dumps(dict(zip(FIELDS, row))) + "\n")
    elif fmt == "obj":
        with path.open("w") as fh:
            fh.write("# x y z vertices; payload in comments: gamma c t stratum family\n")
            for row in _rows(mesh):
                fh.write("v " + " ".join(_fmt(v) for v in row[:3]) + "\n")
                fh.write("# " + " ".join(_fmt(v) for v in row[3:8]) + "\n")
            if mesh.faces is not None:
                for a, b, c in mesh.faces:
                    fh.write(f"f {a + 1} {b + 1} {c + 1}\n")
    else:
        raise DomainError(f"unknown export format {fmt!r}")
    return path


def load_csv(path) -> MeshOutput:
    """Read back a CSV export (faces are not stored in CSV)."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    num = lambda key: np.array([float(r[key]) for r in rows])  # noqa: E731
    verts = np.column_stack([num("x"), num("y"), num("z")]).reshape(-1, 3)
    return MeshOutput(verts, num("gamma"), num("c"), num("t"),
                      [r["stratum"] for r in rows], [r["family"] for r in rows])


__all__ = [
    "CLIP", "FIELDS", "MeshOutput", "SampleGrid", "caustic_cusps",
    "conjugate_level", "export", "load_csv", "sample_caustic", "sample_cutlocus",
    "sample_sphere", "sample_wavefront",
]


import csv
import json
import math

import numpy as np
import pytest

from sh2synth.errors import DomainError
from sh2synth.expmap import GeodesicSpec
from sh2synth.optimality import jacobian_det, tt
from sh2synth.pendulum import Covector
from sh2synth.sampling import (
    CLIP,
    FIELDS,
    MeshOutput,
    SampleGrid,
    caustic_cusps,
    export,
    load_csv,
    sample_caustic,
    sample_cutlocus,
    sample_sphere,
    sample_wavefront,
)
from sh2synth.synthesis import distance_batch

TWO_PI = 2 * math.pi
SMALL = SampleGrid(n_gamma=32, n_c=33, c_max=3.0)


@pytest.fixture(scope="module")
def sphere_pi():
    return sample_sphere(math.pi, SMALL)


@pytest.fixture(scope="module")
def wave_pi():
    return sample_wavefront(math.pi, SMALL)


def test_grid_validation():
    with pytest.raises(DomainError):
        SampleGrid(n_gamma=1)
    with pytest.raises(DomainError):
        SampleGrid(c_max=0.0)
    with pytest.raises(DomainError):
        SampleGrid(radius=-1.0)
    g, c = SMALL.covectors()
    assert g.shape == c.shape == (32, 33)
    assert g[1, 0] - g[0, 0] == pytest.approx(4 * math.pi / 32)
    assert c[0, 0] == -3.0 and c[0, -1] == 3.0
    with pytest.raises(DomainError):
        sample_sphere(0.0, SMALL)


def test_sphere_vertices_are_minimizing(sphere_pi):
    assert np.all(sphere_pi.t == math.pi)
    for g, c in zip(sphere_pi.gamma, sphere_pi.c):
        assert tt(Covector(float(g), float(c))) >= math.pi
    assert set(sphere_pi.family) == {"minimizing"}
    assert sphere_pi.stats["vertices"] == len(sphere_pi)
    assert sphere_pi.revalidate() <= 1e-9


def test_sphere_contains_c4_vertex(sphere_pi):
    hits = np.all(np.abs(sphere_pi.vertices - [math.pi, 0.0, 0.0]) <= 1e-12, axis=1)
    assert hits.any()
    hits = np.all(np.abs(sphere_pi.vertices - [0.0, 0.0, math.pi]) <= 1e-12, axis=1)
    assert hits.any()


def test_sphere_vertices_at_distance_r(sphere_pi, rng):
    pts = sphere_pi.vertices
    pick = rng.choice(len(pts), size=40, replace=False)
    d = distance_batch(pts[pick])
    np.testing.assert_allclose(d, math.pi, atol=1e-5)


def test_sphere_inside_wavefront(sphere_pi, wave_pi):
    assert len(sphere_pi) <= len(wave_pi)
    wave = {tuple(np.round(v, 12)) for v in wave_pi.vertices}
    assert all(tuple(np.round(v, 12)) in wave for v in sphere_pi.vertices)


def test_wavefront_beyond_cut_not_on_sphere():
    r = 7.0
    sphere, wave = sample_sphere(r, SMALL), sample_wavefront(r, SMALL)
    beyond = [i for i, f in enumerate(wave.family) if f == "beyond-cut"]
    assert beyond
    sphere_set = {(round(g, 12), round(c, 12)) for g, c in zip(sphere.gamma, sphere.c)}
    for i in beyond:
        lam = Covector(float(wave.gamma[i]), float(wave.c[i]))
        assert tt(lam) < r
        assert (round(wave.gamma[i], 12), round(wave.c[i], 12)) not in sphere_set
    # C4 is no longer minimizing beyond 2pi
    assert not np.any(np.all(np.abs(sphere.vertices - [r, 0, 0]) <= 1e-12, axis=1))


def test_matryoshka_nesting(rng):
    small, big = sample_sphere(1.5, SMALL), sample_sphere(3.0, SMALL)
    ds = distance_batch(small.vertices[rng.choice(len(small), 25, replace=False)])
    db = distance_batch(big.vertices[rng.choice(len(big), 25, replace=False)])
    np.testing.assert_allclose(ds, 1.5, atol=1e-5)
    np.testing.assert_allclose(db, 3.0, atol=1e-5)
    assert ds.max() < db.min()


def test_workers_do_not_change_output(sphere_pi):
    again = sample_sphere(math.pi, SMALL, workers=4)
    np.testing.assert_array_equal(again.vertices, sphere_pi.vertices)
    np.testing.assert_array_equal(again.faces, sphere_pi.faces)


def test_clipping_counts_blow_up():
    mesh = sample_wavefront(60.0, SampleGrid(n_gamma=32, n_c=33, c_max=4.0))
    assert mesh.stats["clipped"] > 0
    assert np.all(np.abs(mesh.vertices) <= CLIP)


# caustic -----------------------------------------------------------------------------

def test_caustic_meets_x_axis_at_two_pi():
    mesh = sample_caustic(SampleGrid(n_gamma=16, n_c=17, c_max=3.0))
    for x in (TWO_PI, -TWO_PI):
        assert np.any(np.all(np.abs(mesh.vertices - [x, 0.0, 0.0]) <= 1e-9, axis=1))
    assert {"failed", "clipped", "no_conjugate", "vertices"} <= set(mesh.stats)
    assert mesh.stats["failed"] == 0
    assert mesh.revalidate() <= 1e-9


def test_caustic_vertices_are_jacobian_roots(rng):
    mesh = sample_caustic(SampleGrid(n_gamma=16, n_c=17, c_max=3.0))
    for i in rng.choice(len(mesh), 30, replace=False):
        nu = GeodesicSpec(Covector(float(mesh.gamma[i]), float(mesh.c[i])), float(mesh.t[i]))
        assert abs(jacobian_det(nu)) < 1e-6


@pytest.mark.parametrize("k", [0.3, 0.6, 0.9])
def test_caustic_has_four_planar_cusps(k):
    cusps = caustic_cusps(k)
    assert len(cusps) == 4
    # one cusp in each open quadrant of the plane
    signs = {(np.sign(p[0]), np.sign(p[1])) for p in cusps}
    assert len(signs) == 4


# cut locus ---------------------------------------------------------------------------

def test_cutlocus_tags():
    mesh = sample_cutlocus(12.0, SampleGrid(n_gamma=25, n_c=25))
    assert set(mesh.family) <= {"Max", "ConjCut"}
    assert np.all(mesh.vertices[:, 2] == 0.0)
    xy = mesh.vertices[:, :2]

    def tag_of(x, y):
        hit = np.nonzero(np.all(np.abs(xy - [x, y]) <= 1e-12, axis=1))[0]
        return mesh.family[hit[0]] if hit.size else None

    assert tag_of(1.0, -10.0) == "Max"
    assert tag_of(TWO_PI, 0.0) == "ConjCut"
    assert tag_of(math.pi, 0.0) is None
    assert tag_of(2.0, 0.0) is None
    assert mesh.revalidate(1e-8) <= 1e-8
    with pytest.raises(DomainError):
        sample_cutlocus(0.0)


# export ------------------------------------------------------------------------------

def test_csv_round_trip(sphere_pi, tmp_path):
    path = export(sphere_pi, tmp_path / "s.csv")
    with path.open() as fh:
        assert tuple(next(csv.reader(fh))) == FIELDS
    back = load_csv(path)
    np.testing.assert_array_equal(back.vertices, sphere_pi.vertices)
    np.testing.assert_array_equal(back.gamma, sphere_pi.gamma)
    assert back.stratum == sphere_pi.stratum
    assert back.revalidate() <= 1e-9


def test_jsonl_and_obj(sphere_pi, tmp_path):
    path = export(sphere_pi, tmp_path / "s.jsonl")
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(rows) == len(sphere_pi) and tuple(rows[0]) == FIELDS
    assert rows[0]["x"] == sphere_pi.vertices[0, 0]
    path = export(sphere_pi, tmp_path / "s.txt", fmt="obj")
    lines = path.read_text().splitlines()
    verts = [ln for ln in lines if ln.startswith("v ")]
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(verts) == len(sphere_pi) and len(faces) == len(sphere_pi.faces)
    idx = np.array([[int(v) for v in ln.split()[1:]] for ln in faces])
    assert idx.min() >= 1 and idx.max() <= len(sphere_pi)
    with pytest.raises(DomainError):
        export(sphere_pi, tmp_path / "s.ply")


def test_mesh_validation():
    v = np.zeros((2, 3))
    with pytest.raises(DomainError):
        MeshOutput(v, np.zeros(2), np.zeros(2), np.zeros(1), ["a", "b"], ["f", "f"])
    with pytest.raises(DomainError):
        MeshOutput(v, np.zeros(2), np.zeros(2), np.zeros(2), ["a", "b"], ["f", "f"],
                   faces=np.array([[0, 1, 2]]))
    mesh = MeshOutput(np.array([[1.0, 0.0, 0.5]]), np.zeros(1), np.zeros(1), np.ones(1),
                      ["C4^0"], ["minimizing"])
    with pytest.raises(DomainError):
        mesh.revalidate()

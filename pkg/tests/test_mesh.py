import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stdg.mesh import (FacetKind, Pattern, SlabMesh, Side, build_slab_mesh,
                       facet_quadrature_trace, shape_regularity)
from stdg.polynomials import AffineMap, segment_rule


def test_uniform_diagonal_counts_and_area():
    m = build_slab_mesh(0.0, 1.0, 0.0, 0.1, 4, Pattern.UNIFORM_DIAGONAL)
    assert m.n_elements == 8
    assert m.area.sum() == pytest.approx(0.1, abs=1e-15)


def test_crisscross_counts():
    m = build_slab_mesh(0.0, 1.0, 0.0, 0.1, 4, Pattern.CRISS_CROSS)
    assert m.n_elements == 16
    assert m.area.sum() == pytest.approx(0.1, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.sampled_from(list(Pattern)),
       st.floats(0.01, 1.0), st.floats(-2.0, 0.0))
def test_conformity(n_x, pattern, dt, xl):
    m = build_slab_mesh(xl, xl + 1.5, 0.0, dt, n_x, pattern)
    counts = np.zeros(m.n_facets, dtype=int)
    for k, tri in enumerate(m.elements):
        for le in range(3):
            key = tuple(sorted((tri[le], tri[(le + 1) % 3])))
            counts[[i for i, e in enumerate(m.facet_ends) if tuple(sorted(e)) == key]] += 1
    internal = m.facet_kind == FacetKind.INTERNAL
    assert np.all(counts[internal] == 2)
    assert np.all(counts[~internal] == 1)
    assert np.all(m.facet_neighbor[internal] >= 0)
    # boundary length: two vertical sides plus bottom and top
    assert m.facet_length[~internal].sum() == pytest.approx(2 * dt + 2 * 1.5)


def test_normals_point_out_of_owner():
    m = build_slab_mesh(-1.0, 1.0, 0.0, 0.2, 5)
    cent = m.points[m.elements].mean(axis=1)
    mid = m.points[m.facet_ends].mean(axis=1)
    out = np.einsum("fd,fd->f", m.facet_normal, mid - cent[m.facet_owner])
    assert np.all(out > 0)
    np.testing.assert_allclose(np.linalg.norm(m.facet_normal, axis=1), 1.0)
    np.testing.assert_array_equal(m.facet_normal[m.bottom_facets()], [[-1.0, 0.0]] * 5)
    np.testing.assert_array_equal(m.facet_normal[m.top_facets()], [[1.0, 0.0]] * 5)


def test_equilateral_shape_ratio():
    s = 0.3
    pts = [[0.0, 0.0], [0.0, s], [s * np.sqrt(3) / 2, s / 2]]
    m = SlabMesh(pts, [[0, 1, 2]], 0.0, s, 0.0, s)
    lo, hi = shape_regularity(m)
    assert lo == pytest.approx(12 / np.sqrt(3), rel=1e-12)
    assert hi == pytest.approx(12 / np.sqrt(3), rel=1e-12)


@pytest.mark.parametrize("pattern", list(Pattern))
def test_shape_ratio_invariant_under_uniform_refinement(pattern):
    ratios = [shape_regularity(build_slab_mesh(0, 1, 0, 1.0 / n, n, pattern)) for n in (2, 4, 8)]
    for r in ratios[1:]:
        np.testing.assert_allclose(r, ratios[0], rtol=1e-12)


def test_sliver_sequence_ratio_grows():
    maxes = [shape_regularity(build_slab_mesh(0, 1, 0, dt, 4))[1] for dt in (0.1, 0.01, 0.001)]
    assert maxes[0] < maxes[1] < maxes[2]


def test_internal_facet_traces_coincide():
    m = build_slab_mesh(-1.0, 1.0, 0.0, 0.3, 3)
    for f in m.facets_of_kind(FacetKind.INTERNAL):
        ro, wo = facet_quadrature_trace(m, f, Side.OWNER)
        rn, wn = facet_quadrature_trace(m, f, Side.NEIGHBOR)
        po = AffineMap(m.origin[m.facet_owner[f]], m.jac[m.facet_owner[f]]).to_physical(ro)
        pn = AffineMap(m.origin[m.facet_neighbor[f]], m.jac[m.facet_neighbor[f]]).to_physical(rn)
        np.testing.assert_allclose(po, pn, atol=1e-12)
        np.testing.assert_array_equal(wo, wn)


def test_temporal_facet_points_and_weights():
    m = build_slab_mesh(-1.0, 1.0, 0.25, 0.5, 3)
    for f in m.bottom_facets():
        pts, w = m.facet_points([f], segment_rule(6))
        np.testing.assert_allclose(pts[0][:, 0], 0.25, atol=0)
        assert w.sum() == pytest.approx(m.facet_length[f])
    for f in range(m.n_facets):
        _, w = facet_quadrature_trace(m, f)
        assert w.sum() == pytest.approx(m.facet_length[f], rel=1e-14)


def test_boundary_facet_has_no_neighbor():
    m = build_slab_mesh(0.0, 1.0, 0.0, 0.1, 2)
    f = m.facets_of_kind(FacetKind.SPATIAL_BOUNDARY)[0]
    with pytest.raises(ValueError, match="no neighbor"):
        facet_quadrature_trace(m, f, Side.NEIGHBOR)


@pytest.mark.parametrize("args", [(1.0, 0.0, 0.0, 0.1, 2), (0.0, 1.0, 0.1, 0.1, 2),
                                  (0.0, 1.0, 0.0, 0.1, 0)])
def test_invalid_mesh_arguments(args):
    with pytest.raises(ValueError):
        build_slab_mesh(*args)


def test_write_dump(tmp_path):
    m = build_slab_mesh(0.0, 1.0, 0.0, 0.1, 2, Pattern.UNIFORM_DIAGONAL)
    m.write(tmp_path / "m.txt")
    lines = (tmp_path / "m.txt").read_text().splitlines()
    assert sum(l.startswith("point") for l in lines) == 6
    assert sum(l.startswith("tri") for l in lines) == 4

import numpy as np
import pytest

from conftest import built
from incidence_forge.analysis import incidences_fast
from incidence_forge.exact import GeometryError, canonicalize_line
from incidence_forge.lineset import LineSet, read_lines
from incidence_forge.projection import (
    ProjectionMap,
    find_generic_projection,
    incidences_3d,
    l3_header,
    plane_richness_3d,
    project_lines,
    report_text,
    sample_projection,
    verify_projection,
    write_witness,
)

E1, E2, E3, E4 = (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)


def test_sampling_is_deterministic():
    a, b = sample_projection(7), sample_projection(7)
    assert a == b
    assert sample_projection(7, 1) != a
    assert all(abs(x) <= 10**6 for r in a.rows for x in r)


def test_explicit_maps():
    ProjectionMap((E1, E2, E3))
    with pytest.raises(GeometryError):
        ProjectionMap((E1, E2, (1, 1, 0, 0)))
    with pytest.raises(ValueError):
        ProjectionMap((E1, E2))


def test_coordinate_drop_projection():
    drop4 = ProjectionMap((E1, E2, E3))
    ls = LineSet.from_lines([canonicalize_line((-1, 0, 0, 1), (-2, 1, 0, 1))])
    rows = project_lines(ls, drop4)
    want = canonicalize_line((-1, 0, 0), (-2, 1, 0))
    assert tuple(rows[0]) == want.base + want.dir
    assert want.dir == (2, -1, 0)


def test_parallel_lines_stay_parallel():
    pm = sample_projection(3)
    ls = LineSet.from_lines([canonicalize_line((0, 0, 0, 0), (1, 2, 3, 4)), canonicalize_line((5, 0, 1, 0), (1, 2, 3, 4))])
    rows = project_lines(ls, pm)
    assert tuple(rows[0, 3:]) == tuple(rows[1, 3:])


def test_kernel_direction_is_degenerate():
    pm = ProjectionMap((E1, E2, E3))
    ls = LineSet.from_lines([canonicalize_line((0, 0, 0, 0), E4)])
    with pytest.raises(GeometryError, match="degenerate projection"):
        project_lines(ls, pm)
    P, _ = built(1)
    assert not verify_projection(ls, P, pm).ok


def test_collapsing_map_triggers_resample():
    P, L = built(1)
    # dropping x1 keeps lines distinct on S but lets extra lines become coplanar
    rep = verify_projection(L, P, ProjectionMap((E2, E3, E4)))
    assert not rep.ok and "plane multiplicity changed" in rep.failures
    # a map sending two lines onto one
    ls = LineSet.from_lines([canonicalize_line((0, 0, 0, 0), E1), canonicalize_line(E4, E1)])
    rep = verify_projection(ls, P, ProjectionMap((E1, E2, E3)))
    assert not rep.ok and "lines merged" in rep.failures


def test_empty_set():
    P, L = built(3)
    rep, rows = find_generic_projection(L, P, 0)
    assert rep.ok and rep.n == rep.n3 == 0 and rep.I == rep.I3 == 0 and len(rows) == 0


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_preservation(k, seed):
    P, L = built(k)
    rep, rows = find_generic_projection(L, P, seed)
    I, _ = incidences_fast(L, P)
    assert rep.ok and rep.n3 == rep.n == len(L)
    assert rep.I3 == rep.I == I
    assert rep.points3 == rep.points
    assert rep.s3 == rep.s == 2
    assert rep.counts_match


def test_incidences_3d_small():
    lines3 = np.array([[0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0]])
    pts = np.array([[0, 0, 0], [5, 0, 0], [0, 3, 0], [1, 1, 0]])
    assert incidences_3d(lines3, pts).tolist() == [2, 2]


def test_plane_richness_3d():
    lines3 = np.array([[0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 1, 0], [0, 1, 0, 1, 1, 0], [0, 0, 1, 1, 0, 0]])
    r = plane_richness_3d(lines3)
    assert r.s == 3


def test_witness_export(tmp_path):
    P, L = built(1)
    rep, rows = find_generic_projection(L, P, 5)
    path = tmp_path / "w.txt"
    write_witness(path, rows, rep)
    header, back = read_lines(path, dim=3)
    assert header == l3_header(5, rep.attempt) == f"#incidence-forge L3 seed=5 attempt={rep.attempt}"
    assert len(back) == len(L)
    assert report_text(rep) == report_text(find_generic_projection(L, P, 5)[0])

"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import steinerflow as sf

TWO_PI = 2 * math.pi


@pytest.fixture(scope="module")
def triod():
    nets = sf.solve_expander([0.0, TWO_PI / 3, 2 * TWO_PI / 3])
    assert len(nets) == 1
    return nets[0]


def test_version():
    assert sf.__version__ == "0.1.0"


def test_topology_enumeration_counts():
    assert len(sf.enumerate_topologies(3)) == 1
    assert len(sf.enumerate_topologies(4)) == 2
    assert len(sf.enumerate_topologies(5)) == 5
    assert len(sf.enumerate_topologies(4, sf.TopologyMode.matchings)) == 2
    assert len(sf.enumerate_topologies(4, sf.TopologyMode.forests)) == 4
    for topo in sf.enumerate_topologies(5):
        topo.validate()
        assert topo.k == 5


def test_symmetric_triod_solution(triod):
    assert triod.status == sf.NetworkStatus.regular
    assert max(sf.balance_defect(triod)) <= 1e-8
    assert triod.max_soliton_residual() <= 1e-10
    assert triod.diagnostics.embedded and triod.diagnostics.hull_ok
    # By symmetry the junction sits at the origin.
    (vx, vy), = triod.vertex_positions
    assert math.hypot(vx, vy) <= 1e-9


def test_width_profile():
    assert sf.width(0.5) > sf.width(1.0) > sf.width(2.0)
    for r0 in (0.5, 1.0, 2.0):
        assert 0.0 < sf.width(r0) < math.pi / (1 + r0 * r0)


def test_flow_frames_scale_exactly(triod):
    base = sf.evolve(triod, 0.5)
    assert base.lambda_ == 1.0
    doubled = sf.evolve(triod, 2.0)
    assert doubled.lambda_ == 2.0
    for (bx, by), (dx, dy) in zip(base.vertex_positions, doubled.vertex_positions):
        assert dx == 2.0 * bx and dy == 2.0 * by
    with pytest.raises(ValueError):
        sf.evolve(triod, 0.0)


def test_tangent_cone(triod):
    cone = sf.tangent_cone_at_infinity(triod)
    assert cone == pytest.approx([0.0, TWO_PI / 3, 2 * TWO_PI / 3], abs=1e-9)


def test_blowup_lift_is_self_similar(triod):
    lift = sf.blowup_lift(triod, times=[0.5, 1.0, 2.0])
    assert lift.f_drift <= 1e-12
    assert lift.corner_angles == pytest.approx([0.0, TWO_PI / 3, 2 * TWO_PI / 3], abs=1e-9)
    assert len(lift.face_t) == 3


def test_document_roundtrip(triod, tmp_path):
    doc = sf.network_document_string(triod)
    back = sf.network_from_document_string(doc)
    assert sf.network_document_string(back) == doc

    path = tmp_path / "net.json"
    sf.save_network_document(path, triod)
    loaded = sf.load_network_document(path)
    assert sf.network_document_string(loaded) == doc

    with pytest.raises(RuntimeError):
        sf.network_from_document_string("{ not a document")
    with pytest.raises(RuntimeError):
        sf.network_from_document_string(doc.replace('"regular"', '"candidate"'))


def test_render_deterministic(triod):
    for chart in (sf.Chart.plane, sf.Chart.ball, sf.Chart.blowup):
        svg = sf.render_svg(triod, chart)
        assert svg.startswith("<?xml")
        assert svg == sf.render_svg(triod, chart)


def test_ball_chart():
    for r in (0.5, 3.0, 20.0):
        rho = sf.ball_chart_radius(r)
        assert 0 < rho < 1
        assert 2 * rho / (1 - rho * rho) == pytest.approx(r, rel=1e-12)
    assert sf.ball_chart_point((3.0, 4.0)) == pytest.approx(
        tuple(sf.ball_chart_radius(5.0) / 5.0 * c for c in (3.0, 4.0))
    )


def test_direct_flow_check_runs(triod):
    opts = sf.FlowCheckOptions()
    opts.h = 0.06
    opts.r_max = 5.0
    opts.report_times = 4
    report = sf.direct_flow_check(triod, 0.7, opts)
    assert len(report.times) == 4
    assert report.times[0] == 0.5 and report.times[-1] == pytest.approx(0.7)
    assert report.max_deviation == max(report.deviation)
    assert report.max_deviation < 5e-2
    csv = sf.deviation_csv(report)
    assert csv.splitlines()[0] == "t,deviation,vertex0_x,vertex0_y"


def test_invalid_boundary_raises():
    with pytest.raises(ValueError):
        sf.solve_expander([0.5])
    with pytest.raises(ValueError):
        sf.solve_expander([0.0, 0.0, 1.0])

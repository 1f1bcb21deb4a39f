import math

import pytest

import fklab


def ellipse_deficit(eps):
    # semi-axes of {x^2 + (1 + eps) y^2 <= 1} scaled to area pi
    a = (1 + eps) ** 0.25
    b = 1 / a
    energy = -math.pi / (8 * (a * a + b * b))
    return (energy + math.pi / 16) / math.pi**2


def test_profile_roundtrip_and_norms():
    p = fklab.BoundaryProfile.parse("0 2:0.1:0 3:0:0.05")
    assert p.max_mode == 3
    assert fklab.BoundaryProfile.parse(str(p)).cos_coeffs == p.cos_coeffs
    assert p(0.0) == pytest.approx(0.1)
    c3 = fklab.BoundaryProfile.cosine(3)
    assert fklab.h_half_norm_sq(c3) == pytest.approx(4 * math.pi, rel=1e-14)
    assert fklab.hessian_form(c3) == pytest.approx(math.pi / 2, rel=1e-14)
    low, high = fklab.low_mode_projection(p + fklab.BoundaryProfile.cosine(1, 0.2))
    assert low.max_mode <= 1 and high(0.0) == pytest.approx(0.1)
    assert fklab.steklov_min_rayleigh(32) == pytest.approx(2.0, abs=1e-15)


def test_domains():
    e = fklab.ellipse(0.3)
    assert fklab.volume(e) == pytest.approx(math.pi, rel=1e-13)
    b = fklab.barycenter(e)
    assert abs(b.x) < 1e-12 and abs(b.y) < 1e-12
    q = fklab.volume_correct(fklab.BoundaryProfile.cosine(2, 0.1))
    assert fklab.volume(fklab.StarDomain(q)) == pytest.approx(math.pi, rel=1e-14)
    for t in (0.0, 0.5, 1.0):
        assert fklab.volume(fklab.volume_flow(q, t)) == pytest.approx(math.pi, abs=1e-10)
    assert fklab.alpha(fklab.StarDomain.disk(fklab.Point(0.3, -0.2))) == pytest.approx(0.0, abs=1e-9)


def test_fem_ball():
    disk = fklab.StarDomain.disk()
    assert fklab.torsion_energy(disk, 32) == pytest.approx(-math.pi / 16, rel=5e-3)
    assert fklab.principal_eigenvalue(disk, 32) == pytest.approx(5.783185962946784, rel=1e-2)


def test_energy_deficit_matches_closed_form():
    plan = fklab.MeshPlan(32)
    d = fklab.energy_deficit(fklab.ellipse(0.2), plan)
    assert d.value == pytest.approx(ellipse_deficit(0.2), rel=2e-3)


def test_report_and_sweep():
    plan = fklab.MeshPlan(16)
    ev = fklab.StabilityEvaluator(plan)
    r = ev.evaluate(fklab.ellipse(0.2), [2.0], "ellipse", 0.2)
    assert r.deficit_E > 0 and r.deficit_FK[0] > 0
    assert r.sign_violations() == []
    assert r.csv_row().count(",") == fklab.csv_header([2.0]).count(",")

    members = fklab.ellipse_family(0.05, 0.2, 2) + fklab.random_family(2, 7)
    res = fklab.sigma_scan(members, plan, qs=[2.0], threads=2)
    assert len(res.reports) == 4
    assert res.min_ratio_E > 0 and res.min_ratio_FK[0] > 0
    csv = fklab.write_csv(res.qs, res.reports)
    assert csv.startswith("# schema " + fklab.CSV_SCHEMA)


def test_errors():
    with pytest.raises(fklab.InvalidInput):
        fklab.ellipse(1.5)
    with pytest.raises(ValueError):
        fklab.BoundaryProfile.parse("0 2:x:0")
    with pytest.raises(fklab.InvalidInput):
        fklab.run_suite("nope")
    assert issubclass(fklab.NumericalFailure, fklab.Error)


def test_suite():
    r = fklab.run_suite("steklov")
    assert r["passed"], r["checks"]
    assert "fuglede" in fklab.suite_names()

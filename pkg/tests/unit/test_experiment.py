"""
Unit tests for radius selection, the gamma curve, the coverage grid and
small runs of the open-mapping experiment.
"""

import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from omt_lab.analytic import Const, Z, parse_expression  # noqa: E402
from omt_lab.brownian import SamplerConfig  # noqa: E402
from omt_lab.errors import (  # noqa: E402
    ContractError,
    DegenerateMarginError,
    GeometryError,
    NonconstantRequiredError,
    RadiusSelectionError,
)
from omt_lab.experiment import (  # noqa: E402
    CoverageGrid,
    DomainSpec,
    OmtConfig,
    build_gamma,
    containment_check,
    direct_image_coverage,
    run_experiment,
    select_radius,
)


W2 = DomainSpec(0, 2)
FAST = SamplerConfig(step_dt=1e-3)


# ============================================================================
# RADIUS SELECTION
# ============================================================================

@pytest.mark.unit
def test_select_radius_identity_passes_immediately():
    assert select_radius(Z, 0, W2) == 1.0


@pytest.mark.unit
def test_select_radius_halves_past_a_zero_on_the_circle():
    """Test that z^2 + z fails at r = 1 (zero at -1) and passes at 0.5."""
    assert select_radius(Z ** 2 + Z, 0, W2, v=0) == 0.5


@pytest.mark.unit
def test_select_radius_rejects_constants():
    with pytest.raises(NonconstantRequiredError):
        select_radius(Const(5.0), 0, W2)


@pytest.mark.unit
def test_select_radius_rejects_bad_geometry():
    """Test a outside W and a closed disk leaving W."""
    with pytest.raises(GeometryError):
        select_radius(Z, 3.0, W2)
    with pytest.raises(GeometryError):
        select_radius(Z, 0, W2, r0=2.0)


@pytest.mark.unit
def test_select_radius_gives_up_after_halving_budget():
    """Test that a target value on every circle exhausts the halvings."""
    # f(z) = z has |f - v| = r on |z| = r, which drops below margin_tol
    with pytest.raises(RadiusSelectionError):
        select_radius(Z, 0, W2, r0=0.4, margin_tol=0.5, max_halvings=3)


# ============================================================================
# GAMMA CURVE
# ============================================================================

@pytest.mark.unit
def test_gamma_of_square_traverses_unit_circle_twice():
    """Test the self-intersecting image of |z| = 1 under z^2."""
    gamma = build_gamma(Z ** 2, 0, 1.0, 0, K=1024)

    assert gamma.m == pytest.approx(1.0, abs=1e-12)
    half = gamma.K // 2
    np.testing.assert_allclose(gamma.points[:half], gamma.points[half:], atol=1e-9)


@pytest.mark.unit
def test_gamma_examples():
    assert build_gamma(Z, 0, 1.0, 0, K=512).m == pytest.approx(1.0, abs=1e-12)
    assert build_gamma(Z ** 2 + Z, 0, 0.5, 0, K=1024).m == pytest.approx(0.25, abs=1e-9)


@pytest.mark.unit
def test_gamma_requires_enough_samples_and_margin():
    with pytest.raises(ContractError):
        build_gamma(Z, 0, 1.0, 0, K=128)
    with pytest.raises(DegenerateMarginError):
        build_gamma(Z ** 2 + Z, 0, 1.0, 0, K=1024)


@pytest.mark.unit
def test_gamma_polyline_distance():
    """Test distances to the sampled unit circle."""
    gamma = build_gamma(Z, 0, 1.0, 0, K=1024)

    assert gamma.distance_to(1.0) == pytest.approx(0.0, abs=1e-12)
    assert gamma.distance_to(0.0) == pytest.approx(1.0, abs=1e-4)
    assert gamma.distance_to(np.exp(0.001j)) <= gamma.tolerance


# ============================================================================
# COVERAGE GRID
# ============================================================================

@pytest.mark.unit
def test_grid_eligible_cells_lie_inside_the_disk():
    """Test that eligible cells have their corners in D(v, 0.95 m)."""
    grid = CoverageGrid(0.3 + 0.1j, 1.0, 10, 0.95)

    assert 0 < grid.cells_total < 100
    for flat in np.flatnonzero(grid.eligible):
        center = grid.cell_center(flat)
        assert abs(center - grid.v) < grid.m
        corners = center + grid.cell_size / 2 * np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        assert np.all(np.abs(corners - grid.v) < 0.95 * grid.m + 1e-12)


@pytest.mark.unit
def test_grid_visited_cells():
    """Test that points map to their eligible cells only."""
    grid = CoverageGrid(0j, 1.0, 10, 0.95)

    cells = grid.visited(np.array([0.01 + 0.01j, 0.011 + 0.012j, 0.99 + 0.99j, 5.0]))

    assert cells.tolist() == [55]
    assert grid.cell_center(55) == pytest.approx(0.1 + 0.1j)


# ============================================================================
# EXPERIMENT
# ============================================================================

@pytest.mark.unit
def test_omt_config_validation():
    with pytest.raises(GeometryError):
        OmtConfig(f=Z, a=3.0, W=W2, n_paths=10)
    with pytest.raises(ContractError):
        OmtConfig(f=Z, a=0, W=W2, n_paths=0)


@pytest.mark.unit
def test_identity_experiment_has_no_violations():
    """Test that for f = z every terminal point sits on |w| = m."""
    report = run_experiment(OmtConfig(f=Z, a=0, W=W2, n_paths=40, sampler=FAST, seed=3))

    assert report.r == 1.0
    assert report.m == pytest.approx(1.0, abs=1e-12)
    assert report.crossing_violations == 0
    assert report.path_errors == 0
    assert report.gamma_violations == 0
    assert report.terminal_margin_min >= -1e-8
    assert report.cells_hit <= report.cells_total


@pytest.mark.unit
@pytest.mark.parametrize("text, r", [("z^2", 1.0), ("z^2 + z", 0.5), ("z^3", 1.0)])
def test_per_path_crossing_claim(text, r):
    """Test that no image path reaches gamma without crossing |w - v| = m."""
    cfg = OmtConfig(f=parse_expression(text), a=0, W=W2, n_paths=60, sampler=SamplerConfig(step_dt=1e-3 * r * r),
                    seed=11, grid_cells=8)
    report = run_experiment(cfg)

    assert report.r == r
    assert report.crossing_violations == 0
    assert report.gamma_violations == 0
    assert report.terminal_margin_min >= -report.tolerance
    assert report.paths_run == 60


@pytest.mark.unit
def test_crossing_claim_off_the_origin():
    """Test the crossing claim for z^2 at a = 1, where m = 0.5 * min |z + 1| = 0.75."""
    cfg = OmtConfig(f=Z ** 2, a=1.0, W=DomainSpec(1.0, 1.0), n_paths=40,
                    sampler=SamplerConfig(step_dt=2.5e-4), seed=2)
    report = run_experiment(cfg)

    assert report.r == 0.5
    assert report.m == pytest.approx(0.75, abs=1e-9)
    assert report.crossing_violations == 0


@pytest.mark.unit
def test_coverage_is_monotone_in_path_count():
    """Test that more paths on the same seed only add hits."""
    base = OmtConfig(f=Z ** 2, a=0, W=W2, n_paths=30, sampler=FAST, seed=4)

    small = run_experiment(base)
    large = run_experiment(replace(base, n_paths=60))

    assert np.all(large.per_cell_hit_counts >= small.per_cell_hit_counts)
    assert large.cells_hit >= small.cells_hit


@pytest.mark.unit
def test_recorded_cells_are_inside_the_margin_disk():
    """Test that every hit cell center is within m of v."""
    report = run_experiment(OmtConfig(f=parse_expression("z^2 + z"), a=0, W=W2, n_paths=30,
                                      sampler=SamplerConfig(step_dt=2.5e-4), seed=6, grid_cells=8))

    for flat in np.flatnonzero(report.per_cell_hit_counts.ravel()):
        assert abs(report.grid.cell_center(flat) - report.v) < report.m


@pytest.mark.unit
def test_report_serializes_to_json():
    """Test the report layout: row-major counts with grid metadata."""
    report = run_experiment(OmtConfig(f=Z ** 2, a=0, W=W2, n_paths=10, sampler=FAST, seed=1, grid_cells=6))

    document = json.loads(json.dumps(report.to_dict()))

    counts = document["per_cell_hit_counts"]
    assert counts["rows"] == counts["cols"] == 6
    assert len(counts["counts"]) == 36
    assert len(counts["eligible"]) == 36
    assert document["cells_total"] == sum(counts["eligible"])
    assert document["v"] == {"re": 0.0, "im": 0.0}


@pytest.mark.unit
def test_containment_check_verdicts():
    """Test the verdict on complete and incomplete coverage."""
    report = run_experiment(OmtConfig(f=Z, a=0, W=W2, n_paths=5, sampler=FAST, seed=1, grid_cells=4))
    covered = replace(report, cells_hit=report.cells_total, crossing_violations=0)
    uncovered = replace(covered, cells_hit=covered.cells_total - 1)

    assert containment_check(covered)
    assert not containment_check(uncovered)
    assert not containment_check(replace(covered, crossing_violations=1))


@pytest.mark.unit
def test_direct_image_oracle_covers_every_cell():
    """Test that squaring uniform points of the unit disk hits every cell of D(0, 0.95)."""
    result = direct_image_coverage(Z ** 2, 0, 1.0, 0, 1.0, 10, 100_000, seed=1)

    assert result.cells_total > 0
    assert result.cells_hit == result.cells_total


@pytest.mark.unit
def test_direct_image_oracle_for_critical_point():
    """Test z^3 at its critical point 0."""
    result = direct_image_coverage(Z ** 3, 0, 1.0, 0, 1.0, 10, 200_000, seed=2)

    assert result.cells_hit == result.cells_total

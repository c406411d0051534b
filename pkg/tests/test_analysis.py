"""Constraint taxonomy, residual fields, and shrinkage measurements."""

import numpy as np
import pytest

from smocklab import fixtures
from smocklab.analysis import classify_pattern, energy_distribution, shrinkage
from smocklab.arap import full_pipeline
from smocklab.embedding import embed_two_stage
from smocklab.pattern import GridSpec, build_grid
from smocklab.smocked_graph import extract


@pytest.mark.parametrize("name,expected", [
    ("arrow", "well"),
    ("box", "well"),
    ("braid", "well"),
    ("basket", "well"),
    ("p1", "well"),
    ("p2", "under"),
    ("p4", "over"),
    ("leaf", "over"),
])
def test_taxonomy(name, expected):
    report = classify_pattern(getattr(fixtures, name)())
    assert report.classification == expected, report.dof_note


def test_under_constrained_slack_pair():
    report = classify_pattern(fixtures.p2())
    slack = {(i, j): s for i, j, s in report.slack_pairs}
    assert (0, 2) in slack
    assert slack[(0, 2)] == pytest.approx(np.sqrt(5) - 2.0, abs=1e-9)


def test_over_constrained_has_residual():
    report = classify_pattern(fixtures.p4())
    assert report.residual > 1e-8
    assert "plane" in report.dof_note


def test_report_round_trips_to_dict():
    d = classify_pattern(fixtures.p2()).to_dict()
    assert d["classification"] == "under"
    assert all(len(t) == 3 for t in d["slack_pairs"])
    assert isinstance(d["residual"], float)


def test_energy_distribution_shape_and_sign():
    pattern = fixtures.arrow()
    sol = embed_two_stage(extract(pattern))
    field = energy_distribution(pattern, sol)
    assert field.shape == (pattern.num_vertices,)
    assert (field >= 0).all()


def test_energy_distribution_fused_vertices_share_value():
    pattern = fixtures.arrow()
    sol = embed_two_stage(extract(pattern))
    field = energy_distribution(pattern, sol)
    for line in pattern.stitching_lines:
        vals = field[list(line)]
        assert np.allclose(vals, vals[0])


def test_shrinkage_contracts_fabric():
    pattern = fixtures.arrow()
    design = full_pipeline(pattern)
    s = shrinkage(pattern, design)
    assert 0 < s["ratio_x"] < 1
    assert 0 < s["ratio_y"] < 1
    assert s["area_ratio"] == pytest.approx(s["ratio_x"] * s["ratio_y"])


def test_shrinkage_identity_without_stitches():
    pattern = build_grid(GridSpec(kind="square", cols=3, rows=3))
    design = full_pipeline(fixtures.arrow())  # design unused for empty lines
    s = shrinkage(pattern, design)
    assert s == {"ratio_x": 1.0, "ratio_y": 1.0, "area_ratio": 1.0}


def test_shrinkage_rigid_invariant():
    pattern = fixtures.arrow()
    design = full_pipeline(pattern)
    s1 = shrinkage(pattern, design)
    theta = 0.61
    R = np.array([
        [np.cos(theta), -np.sin(theta), 0.0],
        [np.sin(theta), np.cos(theta), 0.0],
        [0.0, 0.0, 1.0],
    ])
    moved = design.merged
    rotated = type(moved)(vertices=moved.vertices @ R.T + 5.0, faces=moved.faces,
                          fine_to_merged=moved.fine_to_merged)
    moved_design = type(design)(
        fine_positions=design.fine_positions @ R.T + 5.0, faces=design.faces,
        merged=rotated, arap_energy=design.arap_energy,
        height_field=design.height_field, fine=design.fine,
    )
    s2 = shrinkage(pattern, moved_design)
    assert s2["ratio_x"] == pytest.approx(s1["ratio_x"], abs=1e-6)
    assert s2["ratio_y"] == pytest.approx(s1["ratio_y"], abs=1e-6)

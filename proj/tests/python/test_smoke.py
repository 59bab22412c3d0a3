import json
import math

import numpy as np
import pytest

import spbvem


def test_composite_mesh_has_five_edge_cell():
    m = spbvem.composite_mesh(2, 4)
    assert any(len(c) == 5 for c in m.cells)
    assert m.area == pytest.approx(1.0)


def test_mesh_json_round_trip(tmp_path):
    m = spbvem.family_mesh("hex", 6, seed=3)
    j = json.loads(m.to_json())
    assert set(j) == {"vertices", "cells", "boundary_tags"}
    assert spbvem.Mesh.from_json(m.to_json()) == m
    spbvem.write_mesh(str(tmp_path / "m.json"), m)
    assert spbvem.read_mesh(str(tmp_path / "m.json")) == m


def test_mesh_from_arrays():
    m = spbvem.Mesh(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float), [[0, 1, 2, 3]])
    assert m.num_cells == 1
    assert m.h == pytest.approx(math.sqrt(2))
    # 4 vertices, 4 edges, one element: 4 + 4 + 1 scalar DOFs at k = 2
    assert spbvem.dof_count(m, 2) == 9


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        spbvem.family_mesh("triangles", 4)
    with pytest.raises(ValueError):
        spbvem.solve({"k": 5, "n": 4})
    with pytest.raises(spbvem.SolverError):
        spbvem.solve({"n": 4, "solver": {"max_outer": 1, "fixed_point_tol": 1e-14}})


def test_solve_and_vtk(tmp_path):
    out = spbvem.solve({"family": "nonconvex", "n": 4, "k": 1}, vtk=str(tmp_path / "s.vtk"))
    assert 0 < out["E_u"] < 0.1
    assert abs(out["pressure_mean"]) < 1e-10
    assert out["outer_iterations"] <= 10
    assert out["ux"].shape == out["p"].shape == out["psi"].shape
    text = (tmp_path / "s.vtk").read_text()
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert f"CELL_TYPES {out['mesh'].num_cells}" in text


def test_convergence_rows_and_rates():
    res = spbvem.convergence({"family": "hex", "n": [4, 8], "k": 1})
    rows = res["rows"]
    assert len(rows) == 2
    assert rows[0]["rate_u"] is None
    assert rows[1]["E_u"] < rows[0]["E_u"]
    assert res["csv"].splitlines()[0] == "h,E^u,rate,E^p,rate,E^psi,rate,itr"
    assert spbvem.observed_rate(1.0, 0.25, 0.2, 0.1) == pytest.approx(2.0)

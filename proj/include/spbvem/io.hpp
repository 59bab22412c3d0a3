#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "spbvem/verification.hpp"

namespace spbvem {

using Json = nlohmann::json;

// Mesh files: {"vertices": [[x, y], ...], "cells": [[i, j, k, ...], ...],
// "boundary_tags": [[v0, v1, tag], ...]} with one entry per boundary edge.
Json mesh_to_json(const PolygonalMesh& mesh);
/// Throws ValidationError on malformed input, GeometryError on a bad mesh.
PolygonalMesh mesh_from_json(const Json& j);
void write_mesh(const std::filesystem::path& path, const PolygonalMesh& mesh);
PolygonalMesh read_mesh(const std::filesystem::path& path);

/// Point data for the VTK export, one value per mesh vertex.
struct VertexFields {
  std::vector<double> speed;      // |Pi_nabla u_h|, averaged over the cells sharing the vertex
  std::vector<double> pressure;   // Pi0 p_h, averaged likewise
  std::vector<double> potential;  // vertex DOFs of psi_h
};
VertexFields vertex_fields(const Discretization& disc, const SolutionState& st);

/// Legacy VTK ASCII unstructured grid with POLYGON cells.
void write_vtk(std::ostream& os, const PolygonalMesh& mesh, const VertexFields& f, const std::string& title = "spbvem");
void write_vtk(const std::filesystem::path& path, const PolygonalMesh& mesh, const VertexFields& f);

/// Parameters of one CLI run. `n_values` holds a single entry for `solve`
/// and `mesh`; `coarse`/`fine` > 0 select an explicit composite mesh.
struct RunConfig {
  MeshFamily family = MeshFamily::Hex;
  Domain domain = Domain::UnitSquare;
  std::vector<int> n_values{5, 10, 20, 40};
  int k = 1;
  FamilyParams mesh;
  int coarse = 0;
  int fine = 0;
  std::string mesh_file;  // solve: read the mesh instead of generating it
  Coefficients coeffs;
  SolverConfig solver;
  double rate_tol = 0.2;
  std::string output_dir = "out";

  /// Throws ValidationError on anything the solver modules would reject.
  void validate() const;
  StudyConfig study() const;
  /// Mesh for resolution n (or the explicit composite / file mesh).
  PolygonalMesh build_mesh(int n) const;
};

/// Fields missing from `j` keep their value from `base`; unknown keys are rejected.
RunConfig run_config_from_json(const Json& j, RunConfig base = {});
Json to_json(const RunConfig& cfg);

Json to_json(const ConvergenceTable& table);

/// Rate check on the finest pair: every rate within `tol` of k.
struct RateSummary {
  bool pass = false;
  std::string line;
};
RateSummary rate_summary(const ConvergenceTable& table, double tol);

/// run.json: command, code version, sparse backend, full config and results.
void write_run_record(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg,
                      const Json& results);

}  // namespace spbvem

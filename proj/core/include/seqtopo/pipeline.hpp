#pragma once

#include <string>
#include <vector>

#include "seqtopo/config.hpp"
#include "seqtopo/evaluate.hpp"
#include "seqtopo/history.hpp"
#include "seqtopo/levelset.hpp"
#include "seqtopo/simp.hpp"
#include "seqtopo/transfer.hpp"

namespace seqtopo {

struct StageTimings {
  double simp = 0.0;
  double transfer = 0.0;
  double levelset = 0.0;
  double evaluate = 0.0;

  // SIMP + extraction + level set.
  double cumulative() const { return simp + transfer + levelset; }
};

struct TransferResult {
  NodalField nodal_density;
  TriangleSurface surface;
  NodalField phi;
};

// Nodal mapping, iso-surface extraction at `iso` and signed distance.
TransferResult run_transfer(const StructuredHexMesh& mesh, const DensityField& density, double iso);

// Iso-surface of a level set (phi <= 0 solid) with outward normals.
TriangleSurface extract_levelset_surface(const StructuredHexMesh& mesh, const LevelSetField& phi);

struct PipelineResult {
  StageTimings timings;
  RunHistory history;

  bool ran_simp = false;
  int simp_iterations = 0;
  bool simp_converged = false;
  double simp_volume_fraction = kUnset;
  double simp_extracted_volume_fraction = kUnset;
  double simp_extracted_compliance = kUnset;

  int levelset_iterations = 0;
  bool levelset_converged = false;
  double levelset_initial_volume_fraction = kUnset;
  double levelset_volume_fraction = kUnset;  // H-volume of the final field
  double final_volume_fraction = kUnset;     // evaluated
  double final_compliance = kUnset;          // evaluated

  std::size_t ambiguous_cells = 0;
  std::size_t dropped_triangles = 0;
  std::vector<std::string> artifacts;
};

// Runs SIMP (unless porous) -> transfer -> level set -> evaluation. With
// write_artifacts, files go to config.output_dir: history.csv, VTK fields,
// one STL per stage boundary, summary.txt and manifest.txt. On failure the
// manifest lists what was written and the error is rethrown.
PipelineResult run_pipeline(const PipelineConfig& config, bool write_artifacts = true);

std::string summary_text(const PipelineConfig& config, const PipelineResult& result);

// Appends an evaluation row for a design to the history.
void append_evaluation(RunHistory& history, int iteration, const EvaluatedDesign& design, double wall_seconds,
                       const std::string& note);

}  // namespace seqtopo

#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqtopo/history.hpp"
#include "seqtopo/mesh.hpp"
#include "seqtopo/transfer.hpp"

namespace seqtopo {

struct NamedField {
  std::string name;
  std::vector<double> values;
};

// Legacy ASCII VTK (STRUCTURED_POINTS) with point and cell scalars. Values
// are written with round-trip precision. Throws IoError with the path on
// failure and DomainError on a length mismatch.
void write_vtk(const std::string& path, const StructuredHexMesh& mesh, std::span<const NamedField> point_data,
               std::span<const NamedField> cell_data);

struct VtkData {
  int nx = 0;  // cells per axis
  int ny = 0;
  int nz = 0;
  Vec3 origin;
  double spacing = 0.0;
  std::vector<NamedField> point_data;
  std::vector<NamedField> cell_data;

  StructuredHexMesh mesh() const;
  const std::vector<double>& point(const std::string& name) const;  // throws IoError if absent
  const std::vector<double>& cell(const std::string& name) const;
};

VtkData read_vtk(const std::string& path);

// ASCII STL with facet normals from the vertex winding.
void write_stl(const std::string& path, const TriangleSurface& surface, const std::string& name = "seqtopo");

// CSV with header stage,iteration,objective,volume_fraction,constraint,change,
// lambda,penalty,alpha,gamma,wall_seconds,note; unset values are empty.
void write_history(const std::string& path, const RunHistory& history);
std::string history_csv(const RunHistory& history);

// Reads text files written by write_history.
RunHistory read_history(const std::string& path);

}  // namespace seqtopo

#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "seqtopo/geometry.hpp"

namespace seqtopo {

using Index = std::size_t;

// Lattice coordinate of a node or element.
struct LatticeIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  friend constexpr bool operator==(const LatticeIndex&, const LatticeIndex&) = default;
};

// Local vertex order of a hexahedral element, shared by the element stiffness
// matrix, the marching-cubes case table and every trilinear interpolation:
//
//   0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0)
//   4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1)
inline constexpr std::array<LatticeIndex, 8> kHexCorners = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

// Uniform structured hexahedral grid with lexicographic numbering (i fastest,
// then j, then k) for both nodes and elements. Immutable after construction.
class StructuredHexMesh {
 public:
  StructuredHexMesh(int nx, int ny, int nz, double h, Vec3 origin = {});

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double h() const { return h_; }
  const Vec3& origin() const { return origin_; }
  Vec3 extent() const { return {nx_ * h_, ny_ * h_, nz_ * h_}; }

  Index node_count() const { return static_cast<Index>(nx_ + 1) * (ny_ + 1) * (nz_ + 1); }
  Index element_count() const { return static_cast<Index>(nx_) * ny_ * nz_; }
  Index dof_count() const { return 3 * node_count(); }

  double element_volume(Index /*e*/) const { return h_ * h_ * h_; }
  double domain_volume() const { return element_count() * h_ * h_ * h_; }

  Index node_index(int i, int j, int k) const {
    return static_cast<Index>(i) + static_cast<Index>(nx_ + 1) * (j + static_cast<Index>(ny_ + 1) * k);
  }
  Index element_index(int i, int j, int k) const {
    return static_cast<Index>(i) + static_cast<Index>(nx_) * (j + static_cast<Index>(ny_) * k);
  }

  // Throw std::out_of_range for indices past the end.
  LatticeIndex node_lattice(Index n) const;
  LatticeIndex element_lattice(Index e) const;
  Vec3 node_coords(Index n) const;
  std::array<Index, 8> element_nodes(Index e) const;
  Vec3 element_centroid(Index e) const;

  Vec3 node_coords(int i, int j, int k) const {
    return {origin_.x + h_ * i, origin_.y + h_ * j, origin_.z + h_ * k};
  }

  // Elements incident to node n (between 1 and 8 of them), ascending.
  std::vector<Index> node_elements(Index n) const;

  bool is_boundary_node(Index n) const;

 private:
  int nx_;
  int ny_;
  int nz_;
  double h_;
  Vec3 origin_;
};

enum class Face { XMin, XMax, YMin, YMax, ZMin, ZMax };

// Parses "x=0", "x=L", "xmin", "xmax" (and the y/z equivalents).
Face parse_face(std::string_view text);
std::string_view face_name(Face face);

struct DofMask {
  bool x = true;
  bool y = true;
  bool z = true;
};

// Geometric predicate over node coordinates.
struct RegionSelector {
  enum class Kind { Face, Box, DiskOnFace, StripOnFace };

  Kind kind = Kind::Face;
  Face face = Face::XMin;
  Vec3 center;       // disk center (on the face plane)
  double radius = 0; // disk radius
  Vec3 lo;           // box corners
  Vec3 hi;
  int strip_axis = 0;  // strip: in-face axis and coordinate range along it
  double strip_lo = 0;
  double strip_hi = 0;
  DofMask dofs;

  static RegionSelector whole_face(Face f, DofMask m = {});
  static RegionSelector box(Vec3 lo, Vec3 hi, DofMask m = {});
  static RegionSelector disk(Face f, Vec3 center, double radius, DofMask m = {});
  static RegionSelector strip(Face f, int axis, double lo, double hi, DofMask m = {});
};

// Nodes satisfying the selector predicate within a tolerance of 1e-9*h,
// ascending. Throws ConfigError when a face-bound selector is inconsistent
// with the domain.
std::vector<Index> select_nodes(const StructuredHexMesh& mesh, const RegionSelector& selector);

}  // namespace seqtopo

#include "seqtopo/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "seqtopo/error.hpp"

namespace seqtopo {

StructuredHexMesh::StructuredHexMesh(int nx, int ny, int nz, double h, Vec3 origin)
    : nx_(nx), ny_(ny), nz_(nz), h_(h), origin_(origin) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw ConfigError("mesh: element counts must be >= 1");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("mesh: element edge length must be positive");
  }
}

LatticeIndex StructuredHexMesh::node_lattice(Index n) const {
  if (n >= node_count()) {
    throw std::out_of_range("node index " + std::to_string(n) + " out of range");
  }
  const Index sx = nx_ + 1;
  const Index sy = ny_ + 1;
  return {static_cast<int>(n % sx), static_cast<int>((n / sx) % sy), static_cast<int>(n / (sx * sy))};
}

LatticeIndex StructuredHexMesh::element_lattice(Index e) const {
  if (e >= element_count()) {
    throw std::out_of_range("element index " + std::to_string(e) + " out of range");
  }
  const Index sx = nx_;
  const Index sy = ny_;
  return {static_cast<int>(e % sx), static_cast<int>((e / sx) % sy), static_cast<int>(e / (sx * sy))};
}

Vec3 StructuredHexMesh::node_coords(Index n) const {
  const auto l = node_lattice(n);
  return node_coords(l.i, l.j, l.k);
}

std::array<Index, 8> StructuredHexMesh::element_nodes(Index e) const {
  const auto l = element_lattice(e);
  std::array<Index, 8> nodes{};
  for (std::size_t a = 0; a < 8; ++a) {
    const auto& c = kHexCorners[a];
    nodes[a] = node_index(l.i + c.i, l.j + c.j, l.k + c.k);
  }
  return nodes;
}

Vec3 StructuredHexMesh::element_centroid(Index e) const {
  const auto l = element_lattice(e);
  return {origin_.x + h_ * (l.i + 0.5), origin_.y + h_ * (l.j + 0.5), origin_.z + h_ * (l.k + 0.5)};
}

std::vector<Index> StructuredHexMesh::node_elements(Index n) const {
  const auto l = node_lattice(n);
  std::vector<Index> out;
  out.reserve(8);
  for (int dk = -1; dk <= 0; ++dk) {
    for (int dj = -1; dj <= 0; ++dj) {
      for (int di = -1; di <= 0; ++di) {
        const int i = l.i + di;
        const int j = l.j + dj;
        const int k = l.k + dk;
        if (i < 0 || j < 0 || k < 0 || i >= nx_ || j >= ny_ || k >= nz_) continue;
        out.push_back(element_index(i, j, k));
      }
    }
  }
  return out;
}

bool StructuredHexMesh::is_boundary_node(Index n) const {
  const auto l = node_lattice(n);
  return l.i == 0 || l.j == 0 || l.k == 0 || l.i == nx_ || l.j == ny_ || l.k == nz_;
}

Face parse_face(std::string_view text) {
  static constexpr std::pair<std::string_view, Face> kNames[] = {
      {"x=0", Face::XMin}, {"x=L", Face::XMax}, {"xmin", Face::XMin}, {"xmax", Face::XMax},
      {"y=0", Face::YMin}, {"y=L", Face::YMax}, {"ymin", Face::YMin}, {"ymax", Face::YMax},
      {"z=0", Face::ZMin}, {"z=L", Face::ZMax}, {"zmin", Face::ZMin}, {"zmax", Face::ZMax},
  };
  for (const auto& [name, face] : kNames) {
    if (name == text) return face;
  }
  throw ConfigError("unknown face '" + std::string(text) + "' (expected x=0, x=L, y=0, y=L, z=0 or z=L)");
}

std::string_view face_name(Face face) {
  switch (face) {
    case Face::XMin: return "x=0";
    case Face::XMax: return "x=L";
    case Face::YMin: return "y=0";
    case Face::YMax: return "y=L";
    case Face::ZMin: return "z=0";
    case Face::ZMax: return "z=L";
  }
  return "?";
}

RegionSelector RegionSelector::whole_face(Face f, DofMask m) {
  RegionSelector s;
  s.kind = Kind::Face;
  s.face = f;
  s.dofs = m;
  return s;
}

RegionSelector RegionSelector::box(Vec3 lo, Vec3 hi, DofMask m) {
  RegionSelector s;
  s.kind = Kind::Box;
  s.lo = lo;
  s.hi = hi;
  s.dofs = m;
  return s;
}

RegionSelector RegionSelector::disk(Face f, Vec3 center, double radius, DofMask m) {
  RegionSelector s;
  s.kind = Kind::DiskOnFace;
  s.face = f;
  s.center = center;
  s.radius = radius;
  s.dofs = m;
  return s;
}

RegionSelector RegionSelector::strip(Face f, int axis, double lo, double hi, DofMask m) {
  RegionSelector s;
  s.kind = Kind::StripOnFace;
  s.face = f;
  s.strip_axis = axis;
  s.strip_lo = lo;
  s.strip_hi = hi;
  s.dofs = m;
  return s;
}

namespace {

struct FacePlane {
  int axis;
  double coord;
};

FacePlane face_plane(const StructuredHexMesh& mesh, Face face) {
  const Vec3 o = mesh.origin();
  const Vec3 ext = mesh.extent();
  switch (face) {
    case Face::XMin: return {0, o.x};
    case Face::XMax: return {0, o.x + ext.x};
    case Face::YMin: return {1, o.y};
    case Face::YMax: return {1, o.y + ext.y};
    case Face::ZMin: return {2, o.z};
    case Face::ZMax: return {2, o.z + ext.z};
  }
  throw ConfigError("invalid face");
}

}  // namespace

std::vector<Index> select_nodes(const StructuredHexMesh& mesh, const RegionSelector& sel) {
  const double tol = 1e-9 * mesh.h();
  std::vector<Index> out;

  if (sel.kind == RegionSelector::Kind::Box) {
    for (std::size_t a = 0; a < 3; ++a) {
      if (sel.lo[a] > sel.hi[a]) throw ConfigError("box selector: lo > hi");
    }
    for (Index n = 0; n < mesh.node_count(); ++n) {
      const Vec3 x = mesh.node_coords(n);
      bool inside = true;
      for (std::size_t a = 0; a < 3 && inside; ++a) {
        inside = x[a] >= sel.lo[a] - tol && x[a] <= sel.hi[a] + tol;
      }
      if (inside) out.push_back(n);
    }
    return out;
  }

  const FacePlane plane = face_plane(mesh, sel.face);
  if (sel.kind == RegionSelector::Kind::DiskOnFace) {
    if (std::abs(sel.center[plane.axis] - plane.coord) > tol) {
      throw ConfigError("disk selector: center does not lie on face " + std::string(face_name(sel.face)));
    }
    if (!(sel.radius >= 0.0)) throw ConfigError("disk selector: negative radius");
  }
  if (sel.kind == RegionSelector::Kind::StripOnFace) {
    if (sel.strip_axis < 0 || sel.strip_axis > 2 || sel.strip_axis == plane.axis) {
      throw ConfigError("strip selector: axis must be an in-face axis");
    }
    if (sel.strip_lo > sel.strip_hi) throw ConfigError("strip selector: lo > hi");
  }

  const double r2 = (sel.radius + tol) * (sel.radius + tol);
  for (Index n = 0; n < mesh.node_count(); ++n) {
    const Vec3 x = mesh.node_coords(n);
    if (std::abs(x[plane.axis] - plane.coord) > tol) continue;
    switch (sel.kind) {
      case RegionSelector::Kind::Face:
        out.push_back(n);
        break;
      case RegionSelector::Kind::DiskOnFace: {
        Vec3 d = x - sel.center;
        d[plane.axis] = 0.0;
        if (norm2(d) <= r2) out.push_back(n);
        break;
      }
      case RegionSelector::Kind::StripOnFace: {
        const double c = x[sel.strip_axis];
        if (c >= sel.strip_lo - tol && c <= sel.strip_hi + tol) out.push_back(n);
        break;
      }
      case RegionSelector::Kind::Box:
        break;
    }
  }
  return out;
}

}  // namespace seqtopo

#include "seqtopo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "seqtopo/error.hpp"

namespace seqtopo {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

double parse_number(const std::string& token, const std::string& path) {
  double v = 0.0;
  const auto r = std::from_chars(token.data(), token.data() + token.size(), v);
  if (r.ec != std::errc{} || r.ptr != token.data() + token.size()) {
    throw IoError(path + ": expected a number, got '" + token + "'");
  }
  return v;
}

void write_scalars(std::ofstream& out, std::span<const NamedField> fields, std::size_t expected, const char* kind) {
  for (const NamedField& f : fields) {
    if (f.values.size() != expected) {
      throw DomainError(std::string(kind) + " field '" + f.name + "' has the wrong length");
    }
    if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos) {
      throw DomainError("VTK field names must be non-empty and free of whitespace");
    }
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << fmt(v) << '\n';
  }
}

}  // namespace

void write_vtk(const std::string& path, const StructuredHexMesh& mesh, std::span<const NamedField> point_data,
               std::span<const NamedField> cell_data) {
  std::ofstream out = open_out(path);
  const Vec3& o = mesh.origin();
  out << "# vtk DataFile Version 3.0\nseqtopo\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << mesh.nx() + 1 << ' ' << mesh.ny() + 1 << ' ' << mesh.nz() + 1 << '\n';
  out << "ORIGIN " << fmt(o.x) << ' ' << fmt(o.y) << ' ' << fmt(o.z) << '\n';
  out << "SPACING " << fmt(mesh.h()) << ' ' << fmt(mesh.h()) << ' ' << fmt(mesh.h()) << '\n';
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.node_count() << '\n';
    write_scalars(out, point_data, mesh.node_count(), "point");
  }
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.element_count() << '\n';
    write_scalars(out, cell_data, mesh.element_count(), "cell");
  }
  finish(out, path);
}

StructuredHexMesh VtkData::mesh() const { return StructuredHexMesh(nx, ny, nz, spacing, origin); }

const std::vector<double>& VtkData::point(const std::string& name) const {
  for (const auto& f : point_data) {
    if (f.name == name) return f.values;
  }
  throw IoError("VTK file has no point field '" + name + "'");
}

const std::vector<double>& VtkData::cell(const std::string& name) const {
  for (const auto& f : cell_data) {
    if (f.name == name) return f.values;
  }
  throw IoError("VTK file has no cell field '" + name + "'");
}

VtkData read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line)) throw IoError(path + ": truncated header");
  }
  if (line.rfind("ASCII", 0) != 0) throw IoError(path + ": only ASCII VTK is supported");

  VtkData d;
  std::string token;
  std::vector<NamedField>* target = nullptr;
  std::size_t count = 0;
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  while (in >> token) {
    if (token == "DATASET") {
      in >> token;
      if (token != "STRUCTURED_POINTS") throw IoError(path + ": unsupported dataset '" + token + "'");
    } else if (token == "DIMENSIONS") {
      int a = 0;
      int b = 0;
      int c = 0;
      in >> a >> b >> c;
      d.nx = a - 1;
      d.ny = b - 1;
      d.nz = c - 1;
    } else if (token == "ORIGIN") {
      std::string a, b, c;
      in >> a >> b >> c;
      d.origin = {parse_number(a, path), parse_number(b, path), parse_number(c, path)};
    } else if (token == "SPACING") {
      std::string a, b, c;
      in >> a >> b >> c;
      sx = parse_number(a, path);
      sy = parse_number(b, path);
      sz = parse_number(c, path);
    } else if (token == "POINT_DATA") {
      in >> count;
      target = &d.point_data;
    } else if (token == "CELL_DATA") {
      in >> count;
      target = &d.cell_data;
    } else if (token == "SCALARS") {
      if (target == nullptr) throw IoError(path + ": SCALARS before POINT_DATA/CELL_DATA");
      NamedField f;
      std::string type;
      std::string lookup;
      in >> f.name >> type;
      // Optional component count, then LOOKUP_TABLE <name>.
      in >> token;
      if (token != "LOOKUP_TABLE") in >> token;
      if (token != "LOOKUP_TABLE") throw IoError(path + ": expected LOOKUP_TABLE");
      in >> lookup;
      f.values.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> token)) throw IoError(path + ": truncated field '" + f.name + "'");
        f.values[i] = parse_number(token, path);
      }
      target->push_back(std::move(f));
    } else {
      throw IoError(path + ": unexpected token '" + token + "'");
    }
  }
  if (d.nx < 1 || d.ny < 1 || d.nz < 1) throw IoError(path + ": missing or invalid DIMENSIONS");
  if (sx != sy || sy != sz) throw IoError(path + ": only uniform spacing is supported");
  d.spacing = sx;
  return d;
}

void write_stl(const std::string& path, const TriangleSurface& surface, const std::string& name) {
  std::ofstream out = open_out(path);
  out << "solid " << name << '\n';
  for (std::size_t t = 0; t < surface.triangles.size(); ++t) {
    const Vec3 n = surface.normal(t);
    out << "  facet normal " << fmt(n.x) << ' ' << fmt(n.y) << ' ' << fmt(n.z) << "\n    outer loop\n";
    for (auto v : surface.triangles[t]) {
      const Vec3& p = surface.vertices[v];
      out << "      vertex " << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(p.z) << '\n';
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << name << '\n';
  finish(out, path);
}

namespace {

constexpr const char* kHistoryHeader =
    "stage,iteration,objective,volume_fraction,constraint,change,lambda,penalty,alpha,gamma,wall_seconds,note";

std::string csv_number(double v) { return std::isnan(v) ? std::string() : fmt(v); }

}  // namespace

std::string history_csv(const RunHistory& history) {
  std::string out = std::string(kHistoryHeader) + "\n";
  for (const HistoryRecord& r : history.records()) {
    out += r.stage + "," + std::to_string(r.iteration);
    for (double v : {r.objective, r.volume_fraction, r.constraint, r.change, r.lambda, r.penalty, r.alpha, r.gamma,
                     r.wall_seconds}) {
      out += "," + csv_number(v);
    }
    out += "," + r.note + "\n";
  }
  return out;
}

void write_history(const std::string& path, const RunHistory& history) {
  std::ofstream out = open_out(path);
  out << history_csv(history);
  finish(out, path);
}

RunHistory read_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader) throw IoError(path + ": unexpected history header");
  RunHistory h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 12) throw IoError(path + ": malformed history row '" + line + "'");
    HistoryRecord r;
    r.stage = cells[0];
    r.iteration = static_cast<int>(parse_number(cells[1], path));
    double* numeric[] = {&r.objective, &r.volume_fraction, &r.constraint, &r.change, &r.lambda,
                         &r.penalty,   &r.alpha,           &r.gamma,      &r.wall_seconds};
    for (int i = 0; i < 9; ++i) *numeric[i] = cells[2 + i].empty() ? kUnset : parse_number(cells[2 + i], path);
    r.note = cells[11];
    h.append(std::move(r));
  }
  return h;
}

}  // namespace seqtopo

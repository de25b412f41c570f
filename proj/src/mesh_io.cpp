#include "polyb/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace polyb {

namespace {

// Whitespace-separated token reader that remembers line numbers.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    while (true) {
      if (line_stream_ >> token_) return token_;
      std::string line;
      if (!std::getline(in_, line)) {
        throw MeshError("mesh file: unexpected end of file while reading " + std::string(what) +
                        " (line " + std::to_string(line_no_) + ")");
      }
      ++line_no_;
      line_stream_.clear();
      line_stream_.str(line);
    }
  }

  template <class T>
  T number(const char* what) {
    const std::string tok = next(what);
    std::istringstream conv(tok);
    T value{};
    if (!(conv >> value) || !conv.eof()) {
      throw MeshError("mesh file: line " + std::to_string(line_no_) + ": cannot parse " + what +
                      " from '" + tok + "'");
    }
    return value;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  std::istringstream line_stream_;
  std::string token_;
  int line_no_ = 0;
};

}  // namespace

void write_mesh(std::ostream& out, const PolygonalMesh& mesh) {
  out << "polymesh 1\n" << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  char buf[64];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    out << buf;
  }
  for (const auto& loop : mesh.cells) {
    out << loop.size();
    for (int i : loop) out << ' ' << i;
    out << '\n';
  }
}

void save_mesh(const std::string& path, const PolygonalMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  write_mesh(out, mesh);
}

PolygonalMesh read_mesh(std::istream& in, std::vector<std::string>* warnings) {
  TokenReader reader(in);
  if (reader.next("header") != "polymesh" || reader.number<int>("format version") != 1) {
    throw MeshError("mesh file: line " + std::to_string(reader.line()) + ": expected 'polymesh 1'");
  }
  const long nv = reader.number<long>("vertex count");
  const long nc = reader.number<long>("cell count");
  if (nv < 3 || nc < 1) {
    throw MeshError("mesh file: line " + std::to_string(reader.line()) + ": invalid counts");
  }
  PolygonalMesh mesh;
  mesh.vertices.resize(static_cast<std::size_t>(nv));
  for (auto& v : mesh.vertices) {
    v.x() = reader.number<double>("x coordinate");
    v.y() = reader.number<double>("y coordinate");
  }
  mesh.cells.resize(static_cast<std::size_t>(nc));
  for (auto& loop : mesh.cells) {
    const int m = reader.number<int>("cell size");
    if (m < 3) {
      throw MeshError("mesh file: line " + std::to_string(reader.line()) + ": cell with fewer than 3 vertices");
    }
    loop.resize(static_cast<std::size_t>(m));
    for (auto& i : loop) i = reader.number<int>("vertex index");
  }
  mesh.domain_descriptor = "file";
  const auto flipped = finalize_mesh(mesh, /*fix_orientation=*/true);
  for (int c : flipped) {
    const std::string msg = "mesh file: cell " + std::to_string(c) + " was clockwise; re-oriented";
    if (warnings) {
      warnings->push_back(msg);
    } else {
      std::clog << "warning: " << msg << '\n';
    }
  }
  return mesh;
}

PolygonalMesh load_mesh(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return read_mesh(in, warnings);
}

}  // namespace polyb

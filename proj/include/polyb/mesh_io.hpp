#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polyb/mesh.hpp"

namespace polyb {

/// Text mesh format:
///   polymesh 1
///   <nv> <nc>
///   x y                  (nv lines)
///   m i1 ... im          (nc lines, 0-based counter-clockwise loops)
void write_mesh(std::ostream& out, const PolygonalMesh& mesh);
void save_mesh(const std::string& path, const PolygonalMesh& mesh);

/// Parses the text format. Clockwise cells are reversed and reported through
/// `warnings` (and std::clog when `warnings` is null).
PolygonalMesh read_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);
PolygonalMesh load_mesh(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace polyb

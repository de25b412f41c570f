#pragma once

#include <iosfwd>

#include "polyb/config.hpp"

namespace polyb {

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// Each command validates `cfg` first (no files are written on a config error),
/// reports progress on `out` and diagnostics on `err`.
int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_equivalence(const RunConfig& cfg, std::ostream& out, std::ostream& err);
/// Writes the mesh of every level to <out>/mesh_<family>_<n>.txt, or the single
/// requested mesh to `out` when `to_stdout` is set.
int cmd_mesh(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool to_stdout);

}  // namespace polyb

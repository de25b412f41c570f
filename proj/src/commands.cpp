#include "polyb/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "polyb/mesh_io.hpp"
#include "polyb/output.hpp"

namespace polyb {

namespace {

namespace fs = std::filesystem;

// Maps the library's exception families onto the exit code contract.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MeshError& e) {
    err << "mesh error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StudyError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const PicardError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SingularMatrixError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  const fs::path path = fs::path(cfg.out) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  return f;
}

PolygonalMesh build_mesh(const RunConfig& cfg, const ProblemSpec& pb, int n) {
  if (!cfg.mesh_file.empty()) return load_mesh(cfg.mesh_file);
  return generate_family(mesh_family_from_string(cfg.family), n, pb.domain, cfg.seed);
}

StudyOptions study_options(const RunConfig& cfg) {
  StudyOptions o;
  o.params = cfg.stab;
  o.picard.tol = cfg.tol;
  o.picard.max_iter = cfg.max_iter;
  o.seed = cfg.seed;
  return o;
}

}  // namespace

int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const ProblemSpec pb = make_problem(cfg);
    if (!pb.exact) throw ConfigError("problem '" + cfg.problem + "' has no exact solution to converge to");
    if (cfg.levels.size() < 2) throw ConfigError("'levels': a convergence study needs at least two levels");
    if (!cfg.mesh_file.empty()) throw ConfigError("'mesh_file' cannot be refined; use family and levels");

    std::ofstream csv = open_output(cfg, "convergence.csv");
    write_convergence_header(csv);
    csv.flush();
    StudyOptions opts = study_options(cfg);
    opts.on_row = [&](const ConvergenceRow& row) {
      write_convergence_row(csv, row);
      csv.flush();
    };
    out << "converge: " << cfg.problem << " on " << cfg.family << ", k = " << cfg.order << '\n';
    const ConvergenceTable table =
        convergence_study(pb, mesh_family_from_string(cfg.family), cfg.levels, cfg.order, opts);
    print_convergence_table(out, table);
    return static_cast<int>(kExitOk);
  });
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const ProblemSpec pb = make_problem(cfg);
    const Discretization disc = discretize(build_mesh(cfg, pb, cfg.levels.back()), cfg.order, cfg.stab);
    const SolutionState state = picard_solve(disc, pb, {cfg.tol, cfg.max_iter});

    std::vector<std::pair<std::string, double>> extra;
    if (pb.exact) {
      const ErrorReport e = compute_errors(disc, state, pb);
      for (int i = 0; i < kNumErrors; ++i) extra.emplace_back(kErrorNames[i], e[i]);
    }
    if (cfg.problem == "cavity") extra.emplace_back("u1_mirror_residual", mirror_symmetry_residual(disc, state.u1, 64));

    std::ofstream vtk = open_output(cfg, "solution.vtk");
    write_vtk(vtk, disc, state, "polyboussinesq " + cfg.problem);
    std::ofstream summary = open_output(cfg, "summary.csv");
    write_summary_csv(summary, disc, state, extra);

    char line[160];
    std::snprintf(line, sizeof line, "solve: %s, %d cells, %d scalar dofs, h = %.4e, %d Picard iterations\n",
                  cfg.problem.c_str(), disc.mesh.num_cells(), disc.num_scalar(), disc.h(), state.iteration_count);
    out << line;
    for (const auto& [key, value] : extra) {
      std::snprintf(line, sizeof line, "  %-20s %.6e\n", key.c_str(), value);
      out << line;
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_equivalence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    const Rectangle domain = cfg.domain.value_or(Rectangle{});
    const EquivalenceReport report = stabilization_equivalence_probe(
        mesh_family_from_string(cfg.family), cfg.levels, cfg.order, cfg.samples, cfg.seed, cfg.stab, domain);
    std::ofstream csv = open_output(cfg, "equivalence.csv");
    write_equivalence_csv(csv, report);

    char line[160];
    for (const auto& lv : report.levels) {
      std::snprintf(line, sizeof line, "n = %4d  h = %.4e  ratio in [%.4e, %.4e]  median %.4e\n", lv.level, lv.h,
                    lv.min_ratio, lv.max_ratio, lv.median_ratio);
      out << line;
    }
    std::snprintf(line, sizeof line, "spread (max/min over all levels) = %.4f, median variation = %.2f%%\n",
                  report.spread, 100.0 * report.median_variation);
    out << line;
    return static_cast<int>(kExitOk);
  });
}

int cmd_mesh(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool to_stdout) {
  return guarded(err, [&] {
    cfg.validate();
    const ProblemSpec pb = make_problem(cfg);
    if (to_stdout) {
      if (cfg.levels.size() != 1 && cfg.mesh_file.empty()) {
        throw ConfigError("'levels': give a single level when writing the mesh to standard output");
      }
      write_mesh(out, build_mesh(cfg, pb, cfg.levels.front()));
      return static_cast<int>(kExitOk);
    }
    for (int n : cfg.levels) {
      const PolygonalMesh mesh = build_mesh(cfg, pb, n);
      const std::string name = "mesh_" + cfg.family + "_" + std::to_string(n) + ".txt";
      std::ofstream f = open_output(cfg, name);
      write_mesh(f, mesh);
      const RegularityReport reg = check_regularity(mesh, 0.0);
      char line[160];
      std::snprintf(line, sizeof line, "%s: %d cells, %d vertices, h = %.4e, min edge/h = %.3f\n", name.c_str(),
                    mesh.num_cells(), mesh.num_vertices(), mesh_metrics(mesh).h, reg.min_edge_ratio);
      out << line;
      if (!cfg.mesh_file.empty()) break;
    }
    return static_cast<int>(kExitOk);
  });
}

}  // namespace polyb

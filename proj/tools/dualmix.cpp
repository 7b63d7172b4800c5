// Command-line driver: convergence / stability studies and single solves
// over a mesh sequence, with CSV or Markdown table output.
#include <Eigen/Core>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualmix/solver.hpp"
#include "dualmix/verify.hpp"

namespace {

using namespace dualmix;

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

bool allFinite(const dualmix::ErrorRow& r) {
  return std::isfinite(r.gsym) && std::isfinite(r.gskw) && std::isfinite(r.u) &&
         std::isfinite(r.s) && std::isfinite(r.divs);
}

bool allFinite(const dualmix::ConvergenceReport& rep) {
  for (const auto& r : rep.rows)
    if (!allFinite(r)) return false;
  return allFinite(rep.norms) && allFinite(rep.rates);
}

bool allFinite(const dualmix::StabilityReport& rep) {
  for (const auto& r : rep.rows)
    if (!(std::isfinite(r.infsup) && std::isfinite(r.korn) &&
          std::isfinite(r.trace_lo) && std::isfinite(r.trace_hi)))
      return false;
  return true;
}

void writeFile(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

void dumpDofCounts(const Problem& pr, std::ostream& out) {
  out << "G ndof " << pr.g.ndof << "\n"
      << "U ndof " << pr.u.ndof << "\n"
      << "S ndof " << pr.s.ndof << "\n"
      << "S traction dofs " << pr.s.traction_dofs.size() << "\n"
      << "mean trace constraint " << (pr.s.mean_trace_active ? 1 : 0) << "\n";
  if (pr.g.family.isSVRT()) {
    LocalDims d = localSpaceDims();
    out << "local dims " << d.g << " " << d.u << " " << d.s << " "
        << d.s_condensed << "\n";
  }
}

void dumpSolution(const FESpace& ssp, const SolutionFields& f,
                  std::ostream& out) {
  out << "g " << f.g.size() << "\n";
  for (int i = 0; i < f.g.size(); ++i) out << fmt6(f.g[i]) << "\n";
  out << "u " << f.u.size() << "\n";
  for (int i = 0; i < f.u.size(); ++i) out << fmt6(f.u[i]) << "\n";
  out << "s " << f.s.size() << "\n";
  for (int i = 0; i < f.s.size(); ++i) out << fmt6(f.s[i]) << "\n";
  if (ssp.mean_trace_active) out << "multiplier " << fmt6(f.multiplier) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-mixed Navier-Stokes studies"};
  app.set_config("--config", "", "plain key=value configuration file");
  app.allow_config_extras(false);

  std::string family_name, study = "convergence", bc = "traction-right";
  std::string format = "csv", out_dir = ".";
  std::vector<int> meshes = {8, 16, 32, 64, 128};
  double nu = 0.05, kpar = M_PI, mpar = M_PI / 2, tol = 1e-10;
  bool newton = false, condense = false;
  bool dump_mesh = false, dump_dofs = false, dump_solution = false;

  app.add_option("--family", family_name, "element family: peers | afw | svrt1")
      ->required();
  app.add_option("--mesh", meshes, "mesh sizes N (h = 2/N), strictly increasing")
      ->delimiter(',');
  app.add_option("--study", study, "convergence | stability | solve")
      ->check(CLI::IsMember({"convergence", "stability", "solve"}));
  app.add_option("--bc", bc, "dirichlet | traction-right")
      ->check(CLI::IsMember({"dirichlet", "traction-right"}));
  app.add_option("--nu", nu, "viscosity")->check(CLI::PositiveNumber);
  app.add_option("--k", kpar, "x wave number")->check(CLI::PositiveNumber);
  app.add_option("--m", mpar, "y wave number")->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "nonlinear residual tolerance")
      ->check(CLI::PositiveNumber);
  app.add_flag("--newton", newton, "enable Newton acceleration");
  app.add_flag("--condense", condense, "static condensation (svrt1 only)");
  app.add_option("--format", format, "csv | md")
      ->check(CLI::IsMember({"csv", "md"}));
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dump-mesh", dump_mesh, "write the mesh of every run");
  app.add_flag("--dump-dofs", dump_dofs, "write dof counts per space");
  app.add_flag("--dump-solution", dump_solution, "write solution coefficients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (const char* threads = std::getenv("DUALMIX_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));

  std::vector<std::string> violations;
  for (size_t i = 1; i < meshes.size(); ++i)
    if (meshes[i] <= meshes[i - 1])
      violations.push_back("mesh sizes must be strictly increasing");
  for (int n : meshes)
    if (n < 1) violations.push_back("mesh size must be positive");
  ElementFamily family;
  try {
    family = ElementFamily::parse(family_name);
  } catch (const std::exception& e) {
    violations.push_back(e.what());
  }
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "config error: " << v << "\n";
    return 2;
  }

  StudyConfig cfg;
  cfg.family = family;
  cfg.meshes = meshes;
  cfg.traction_right = (bc == "traction-right");
  cfg.nu = nu;
  cfg.k = kpar;
  cfg.m = mpar;
  cfg.solver.tol = tol;
  cfg.solver.newton = newton;
  cfg.condense = condense;
  // Second-order family: fit rates on the finer meshes only (pre-asymptotic
  // coarse rows would drag the slope).
  if (family.isSVRT()) cfg.rate_hmax = 0.125 * (1.0 + 1e-12);

  std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::string ext = format == "md" ? ".md" : ".csv";

  try {
    if (dump_mesh) {
      for (int n : meshes) {
        Problem pr = makeProblem(family, n, cfg.traction_right);
        std::ofstream out(dir / (family.name() + "_mesh_" + std::to_string(n) +
                                 ".txt"));
        dumpMesh(*pr.base, out);
      }
    }
    if (dump_dofs) {
      for (int n : meshes) {
        Problem pr = makeProblem(family, n, cfg.traction_right);
        std::ofstream out(dir / (family.name() + "_dofs_" + std::to_string(n) +
                                 ".txt"));
        dumpDofCounts(pr, out);
      }
    }

    if (study == "convergence") {
      ConvergenceReport report = convergenceStudy(cfg);
      if (!allFinite(report)) throw std::runtime_error("non-finite table cell");
      std::string body = format == "md" ? toMarkdown(report) : toCsv(report);
      writeFile(dir / (family.name() + "_convergence" + ext), body);
      std::cout << body;
    } else if (study == "stability") {
      StabilityReport report = stabilityStudy(cfg);
      if (!allFinite(report)) throw std::runtime_error("non-finite table cell");
      std::string body = format == "md" ? toMarkdown(report) : toCsv(report);
      writeFile(dir / (family.name() + "_stability" + ext), body);
      std::cout << body;
    } else {  // solve
      ManufacturedSolution ms{cfg.k, cfg.m, cfg.nu};
      std::string body = "h,iterations,residual,energy_gap\n";
      for (int n : meshes) {
        Problem pr = makeProblem(family, n, cfg.traction_right);
        AssembledSystem sys = assembleManufactured(pr, ms);
        SolutionFields f;
        if (cfg.condense && family.isSVRT()) {
          auto patches = buildParentPatches(pr.g, pr.u, pr.s);
          f = solveNavierStokesCondensed(pr.g, pr.u, pr.s, sys, cfg.solver,
                                         patches);
        } else {
          f = solveNavierStokes(pr.g, pr.u, pr.s, sys, cfg.solver);
        }
        recoverPressure(pr.u, pr.s, f);
        if (!(std::isfinite(f.residual) && std::isfinite(f.energy_gap)))
          throw std::runtime_error("non-finite table cell");
        char row[128];
        std::snprintf(row, sizeof row, "%g,%d,%s,%s\n", pr.h, f.iterations,
                      fmt6(f.residual).c_str(), fmt6(f.energy_gap).c_str());
        body += row;
        if (dump_solution) {
          std::ofstream out(dir / (family.name() + "_solution_" +
                                   std::to_string(n) + ".txt"));
          dumpSolution(pr.s, f, out);
        }
      }
      writeFile(dir / (family.name() + "_solve.csv"), body);
      std::cout << body;
    }
  } catch (const std::exception& e) {
    std::cerr << "{\"status\":\"error\",\"family\":\"" << family.name()
              << "\",\"study\":\"" << study << "\",\"message\":\"" << e.what()
              << "\"}\n";
    return 1;
  }
  return 0;
}

// Python bindings for the main library operations: mesh construction,
// manufactured-solution solves and studies, and the stability diagnostics.
// Reports are returned as plain dicts/lists to keep the surface small.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dualmix/verify.hpp"

namespace py = pybind11;
using namespace dualmix;

namespace {

py::dict rowDict(const ErrorRow& r) {
  py::dict d;
  d["h"] = r.h;
  d["gsym"] = r.gsym;
  d["gskw"] = r.gskw;
  d["u"] = r.u;
  d["s"] = r.s;
  d["divs"] = r.divs;
  return d;
}

StudyConfig makeConfig(const std::string& family, const std::vector<int>& meshes,
                       bool traction, double nu, bool condense,
                       double rate_hmax) {
  StudyConfig cfg;
  cfg.family = ElementFamily::parse(family);
  cfg.meshes = meshes;
  cfg.traction_right = traction;
  cfg.nu = nu;
  cfg.condense = condense;
  cfg.rate_hmax = rate_hmax;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_dualmix, m) {
  m.doc() = "Dual-mixed finite elements for stationary Navier-Stokes in 2D";

  py::class_<Triangulation>(m, "Triangulation")
      .def_property_readonly("num_vertices", &Triangulation::numVertices)
      .def_property_readonly("num_triangles", &Triangulation::numTriangles)
      .def_property_readonly("num_edges", &Triangulation::numEdges)
      .def_property_readonly("is_refinement", &Triangulation::isRefinement)
      .def("area", &Triangulation::area, py::arg("t"))
      .def("max_edge_length", &Triangulation::maxEdgeLength);

  m.def(
      "uniform_square_mesh",
      [](int n, bool traction_right) {
        Rect rect;
        auto tag = traction_right ? tractionRightTag(rect)
                                  : std::function<BoundaryTag(const Vec2&)>();
        return uniformSquareMesh(n, rect, tag);
      },
      py::arg("n"), py::arg("traction_right") = false,
      "Uniform n x n triangulation of (-1,1)^2; optionally tag x=1 as a "
      "traction boundary.");

  m.def("barycentric_refine", &barycentricRefine, py::arg("mesh"));

  m.def(
      "collinearity_margin",
      [](const std::vector<std::pair<double, double>>& pts) {
        if (pts.size() != 4)
          throw std::invalid_argument("expected exactly 4 centroids");
        std::array<Vec2, 4> c;
        for (int i = 0; i < 4; ++i) c[i] = {pts[i].first, pts[i].second};
        return centroidCollinearityMargin(c);
      },
      py::arg("centroids"),
      "Smallest singular value of the mean-shifted 4x2 centroid matrix; "
      "zero iff the points are collinear.");

  m.def(
      "dof_counts",
      [](const std::string& family, int n) {
        Problem pr = makeProblem(ElementFamily::parse(family), n, false);
        py::dict d;
        d["g"] = pr.g.ndof;
        d["u"] = pr.u.ndof;
        d["s"] = pr.s.ndof;
        return d;
      },
      py::arg("family"), py::arg("n"));

  m.def("local_dims", [] {
    LocalDims d = localSpaceDims();
    py::dict out;
    out["g"] = d.g;
    out["u"] = d.u;
    out["s"] = d.s;
    out["s_condensed"] = d.s_condensed;
    return out;
  });

  m.def(
      "solve",
      [](const std::string& family, int n, bool traction, double nu,
         bool newton, bool condense) {
        ManufacturedSolution ms;
        ms.nu = nu;
        Problem pr = makeProblem(ElementFamily::parse(family), n, traction);
        AssembledSystem sys = assembleManufactured(pr, ms);
        SolverConfig cfg;
        cfg.newton = newton;
        SolutionFields f;
        if (condense) {
          auto patches = buildParentPatches(pr.g, pr.u, pr.s);
          f = solveNavierStokesCondensed(pr.g, pr.u, pr.s, sys, cfg, patches);
        } else {
          f = solveNavierStokes(pr.g, pr.u, pr.s, sys, cfg);
        }
        ErrorRow err = errorNorms(pr.g, pr.u, pr.s, f, ms);
        err.h = pr.h;
        py::dict d;
        d["converged"] = f.converged;
        d["iterations"] = f.iterations;
        d["residual"] = f.residual;
        d["energy_gap"] = f.energy_gap;
        d["errors"] = rowDict(err);
        return d;
      },
      py::arg("family"), py::arg("n"), py::arg("traction") = true,
      py::arg("nu") = 0.05, py::arg("newton") = false,
      py::arg("condense") = false,
      "Solve the manufactured problem on an n x n mesh and return the "
      "iteration record and error norms.");

  m.def(
      "convergence_study",
      [](const std::string& family, const std::vector<int>& meshes,
         bool traction, double nu, bool condense, double rate_hmax) {
        ConvergenceReport rep = convergenceStudy(
            makeConfig(family, meshes, traction, nu, condense, rate_hmax));
        py::dict d;
        py::list rows;
        for (const auto& r : rep.rows) rows.append(rowDict(r));
        d["family"] = rep.family;
        d["rows"] = rows;
        d["norms"] = rowDict(rep.norms);
        d["rates"] = rowDict(rep.rates);
        return d;
      },
      py::arg("family"), py::arg("meshes"), py::arg("traction") = true,
      py::arg("nu") = 0.05, py::arg("condense") = false,
      py::arg("rate_hmax") = 1e30);

  m.def(
      "stability_study",
      [](const std::string& family, const std::vector<int>& meshes) {
        StabilityReport rep =
            stabilityStudy(makeConfig(family, meshes, false, 0.05, false, 1e30));
        py::list rows;
        for (const auto& r : rep.rows) {
          py::dict d;
          d["h"] = r.h;
          d["infsup"] = r.infsup;
          d["korn"] = r.korn;
          d["trace_lo"] = r.trace_lo;
          d["trace_hi"] = r.trace_hi;
          rows.append(d);
        }
        return rows;
      },
      py::arg("family"), py::arg("meshes"),
      "Inf-sup, Korn and trace-equivalence constants per mesh level.");

  m.def("exact_norms", [] {
    ManufacturedSolution ms;
    return rowDict(exactNorms(ms));
  });

  m.def(
      "certify_macroelements",
      [](const std::string& family, int n, bool include_skw) {
        ElementFamily fam = ElementFamily::parse(family);
        int certified = 0, total = 0;
        if (fam.isSVRT()) {
          Triangulation base = uniformSquareMesh(n);
          Triangulation mesh = barycentricRefine(base);
          FESpace g = buildGSpace(fam, mesh);
          FESpace u = buildUSpace(fam, mesh);
          FESpace s = buildSSpace(fam, mesh);
          for (int t = 0; t < base.numTriangles(); ++t) {
            MacroElement me{MacroKind::FacetPatch,
                            {3 * t, 3 * t + 1, 3 * t + 2}, t};
            KernelResult r = macroelementKernel(g, u, s, me, include_skw);
            ++total;
            if (r.dim == 1 && r.identity_residual < 1e-10) ++certified;
          }
        } else {
          Triangulation mesh = uniformSquareMesh(n);
          FESpace g = buildGSpace(fam, mesh);
          FESpace u = buildUSpace(fam, mesh);
          FESpace s = buildSSpace(fam, mesh);
          MacroKind kind = fam.kind == FamilyKind::AugmentedPEERS
                               ? MacroKind::VertexPatch
                               : MacroKind::FacetPatch;
          for (const auto& p : extractMacroelements(mesh, kind)) {
            KernelResult r = macroelementKernel(g, u, s, p, include_skw);
            ++total;
            if (r.dim == 1 && r.identity_residual < 1e-10) ++certified;
          }
        }
        return py::make_tuple(certified, total);
      },
      py::arg("family"), py::arg("n"), py::arg("include_skw") = true,
      "Count macroelement patches whose orthogonality kernel is exactly "
      "span{I}.");
}

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"
#include "solver.hpp"
#include "tensorfield.hpp"
#include "verify.hpp"

namespace orlicz_elastica {

/// Shortest round-trip-safe text for a double; identical bits give identical text.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

inline void write_solution_csv(std::ostream& out, const Mesh& mesh, const DisplacementField& u) {
  out << "node,x,y,u_x,u_y\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const auto& p = mesh.node(i);
    out << i << ',' << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(u(i, 0)) << ',' << fmt(u(i, 1)) << '\n';
  }
}

inline void write_energy_csv(std::ostream& out, const EnergyBreakdown& e) {
  out << "shear,bulk,load,total\n"
      << fmt(e.shear) << ',' << fmt(e.bulk) << ',' << fmt(e.load) << ',' << fmt(e.total) << '\n';
}

/// One row per Newton iterate; step is empty for the initial guess.
inline void write_history_csv(std::ostream& out, const SolveReport& rep) {
  out << "iteration,residual,energy,step\n";
  for (std::size_t k = 0; k < rep.residual_history.size(); ++k) {
    out << k << ',' << fmt(rep.residual_history[k]) << ',' << fmt(rep.energy_history[k]) << ',';
    if (k > 0) out << fmt(rep.step_history[k - 1]);
    out << '\n';
  }
}

/// key,value summary of a solve.
inline void write_report_csv(std::ostream& out, const SolveReport& rep) {
  out << "key,value\n";
  out << "converged," << (rep.converged ? 1 : 0) << '\n';
  out << "iterations," << rep.iterations << '\n';
  out << "tolerance," << fmt(rep.tolerance) << '\n';
  out << "initial_residual," << fmt(rep.residual_history.front()) << '\n';
  out << "final_residual," << fmt(rep.residual_history.back()) << '\n';
  out << "energy_shear," << fmt(rep.final_energy.shear) << '\n';
  out << "energy_bulk," << fmt(rep.final_energy.bulk) << '\n';
  out << "energy_load," << fmt(rep.final_energy.load) << '\n';
  out << "energy_total," << fmt(rep.final_energy.total) << '\n';
  if (rep.estimate) {
    const auto& e = *rep.estimate;
    out << "estimate_lhs," << fmt(e.lhs) << '\n';
    out << "estimate_dev_load," << fmt(e.dev_load) << '\n';
    out << "estimate_dev_lifting," << fmt(e.dev_lifting) << '\n';
    out << "estimate_conjugate_trace," << fmt(e.conjugate_trace) << '\n';
    out << "estimate_bulk_lifting," << fmt(e.bulk_lifting) << '\n';
    out << "estimate_constant," << fmt(e.constant) << '\n';
    out << "estimate_ratio," << fmt(e.ratio()) << '\n';
    out << "estimate_holds," << (e.estimate_holds() ? 1 : 0) << '\n';
    out << "energy_lifting," << fmt(e.energy_lifting) << '\n';
    out << "energy_zero_extension," << fmt(e.energy_zero_extension) << '\n';
    out << "competitor_holds," << (e.competitor_holds() ? 1 : 0) << '\n';
  }
}

/// Legacy ASCII VTK unstructured grid with the displacement as point vectors.
inline void write_vtk(std::ostream& out, const Mesh& mesh, const DisplacementField& u) {
  out << "# vtk DataFile Version 3.0\n"
      << "displacement\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.num_nodes() << " double\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    out << fmt(mesh.node(i)[0]) << ' ' << fmt(mesh.node(i)[1]) << " 0\n";
  }
  out << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_elements() << '\n';
  for (int e = 0; e < mesh.num_elements(); ++e) out << "5\n";
  out << "POINT_DATA " << mesh.num_nodes() << '\n' << "VECTORS displacement double\n";
  for (int i = 0; i < mesh.num_nodes(); ++i) out << fmt(u(i, 0)) << ' ' << fmt(u(i, 1)) << " 0\n";
}

/// One ladder check: a named column of per-level values.
struct LadderColumn {
  std::string case_id;
  std::string check;  ///< h1, harmonic, curl, estimate_ratio
  std::vector<int> n;
  std::vector<double> h;
  std::vector<double> value;
};

/// rate is the local order log(v_{k-1}/v_k) / log(h_{k-1}/h_k); empty on the first row.
inline void write_ladder_header(std::ostream& out) { out << "case,check,n,h,value,rate\n"; }

inline void write_ladder_rows(std::ostream& out, const LadderColumn& col) {
  for (std::size_t k = 0; k < col.value.size(); ++k) {
    out << col.case_id << ',' << col.check << ',' << col.n[k] << ',' << fmt(col.h[k]) << ',' << fmt(col.value[k]) << ',';
    if (k > 0) out << fmt(std::log(col.value[k - 1] / col.value[k]) / std::log(col.h[k - 1] / col.h[k]));
    out << '\n';
  }
}

}  // namespace orlicz_elastica

#pragma once

// Per-step diagnostics row and its CSV encoding. Column order is part of the output format.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "elastoslab/stability.hpp"

namespace elastoslab {

struct DiagnosticsRow {
  int step = 0;
  double t = 0.0, dt = 0.0;
  StabilityReport stability;
  EnergyReport energy;
  double div_u = 0.0, div_F = 0.0, normal_trace = 0.0;
  double curl_u_l2sq = 0.0;
  double f_max = 0.0;
};

inline const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols = {
      "step",        "t",         "dt",        "taylor_min", "lambda_min", "taylor_ok",  "lambda_ok",
      "e_material",  "e_elastic", "e_capillary", "e_weighted", "e_f_l2",   "e_ft_l2",    "e_u_hs",
      "e_F_hs",      "e_total",   "weight_min", "weight_max", "div_u",     "div_F",      "normal_trace",
      "curl_u_l2sq", "f_max"};
  return cols;
}

inline DiagnosticsRow collect_diagnostics(const FlowState& st, int step, double dt) {
  const auto pr = assemble_pressure(st);
  DiagnosticsRow r;
  r.step = step;
  r.t = st.t;
  r.dt = dt;
  r.stability = stability_report(st, pr);
  r.energy = energy_es_eps(st, st.params.s, pr);
  const auto div = divergence_residuals(st);
  r.div_u = div[0];
  r.div_F = div[1];
  r.normal_trace = normal_trace_residual(st);
  r.curl_u_l2sq = curl_sq(st.u, *st.map);
  r.f_max = st.f.max_abs();
  return r;
}

/// %.17g, so the text round-trips to the same double. inf prints as "inf".
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv_header(std::ostream& os) {
  const auto& cols = diagnostics_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j];
  os << '\n';
}

inline void write_csv_row(std::ostream& os, const DiagnosticsRow& r) {
  const auto& e = r.energy;
  const double vals[] = {r.t,         r.dt,        r.stability.taylor_min, r.stability.lambda_min,
                         e.material,  e.elastic,   e.capillary,            e.weighted,
                         e.f_l2,      e.ft_l2,     e.u_hs,                 e.F_hs,
                         e.total(),   e.weight_min, e.weight_max,          r.div_u,
                         r.div_F,     r.normal_trace, r.curl_u_l2sq,       r.f_max};
  os << r.step;
  for (int j = 0; j < 4; ++j) os << ',' << format_double(vals[j]);
  os << ',' << int(r.stability.taylor_ok) << ',' << int(r.stability.lambda_ok);
  for (std::size_t j = 4; j < std::size(vals); ++j) os << ',' << format_double(vals[j]);
  os << '\n';
}

}  // namespace elastoslab

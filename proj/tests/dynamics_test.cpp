#include <gtest/gtest.h>

#include "elastoslab/interface_equation.hpp"
#include "elastoslab/scenarios.hpp"
#include "test_support.hpp"

using namespace elastoslab;
using testing_support::rel_l2;
using testing_support::smooth_random;

namespace {

double max_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, (a[i] - b[i]).max_abs());
  return m;
}

double max_diff(const Deformation& a, const Deformation& b) {
  double m = 0.0;
  for (int j = 0; j < 3; ++j) m = std::max(m, max_diff(a[j], b[j]));
  return m;
}

FlowState quiet(FlowState st) {
  st.params.reproject = false;
  return st;
}

std::vector<FlowState> trajectory(FlowState st, double h, int n) {
  std::vector<FlowState> out{st};
  for (int k = 1; k < n; ++k) out.push_back(step(out.back(), h));
  return out;
}

InterfaceField cos1(int n, double a) {
  return InterfaceField::sample(n, n, [a](double x1, double) { return a * std::cos(x1); });
}

}  // namespace

TEST(Dynamics, PrepareInitialDataExamples) {
  auto g = SlabGrid::make(32, 32, 32);
  auto st = make_scenario("perturbed", g);
  auto again = prepare_initial_data(st.f, st.u, st.F, 0.0, g, st.params);
  EXPECT_LT((again.f - st.f).max_abs(), 1e-10);
  EXPECT_LT(max_diff(again.u, st.u), 1e-10);
  EXPECT_LT(max_diff(again.F, st.F), 1e-10);

  auto m = prepare_initial_data(cos1(32, 0.1), zero_vector(g), zero_deformation(g), 0.01, g);
  EXPECT_LT((m.f - cos1(32, 0.1 * std::exp(-0.0025))).max_abs(), 1e-15);
  EXPECT_EQ(max_diff(m.u, zero_vector(g)), 0.0);
  EXPECT_EQ(max_diff(m.F, zero_deformation(g)), 0.0);
}

TEST(Dynamics, PreparedDataSatisfiesInvariants) {
  auto g = SlabGrid::make(32, 32, 32);
  for (double eps : {0.0, 0.01, 0.1}) {
    auto o = default_options("perturbed");
    o.eps = eps;
    auto st = make_scenario("perturbed", g, o);
    const auto div = divergence_residuals(st);
    EXPECT_LT(div[0], 1e-6) << eps;
    EXPECT_LT(div[1], 1e-6) << eps;
    EXPECT_LT(normal_trace_residual(st), 1e-6) << eps;
    EXPECT_EQ(bottom_trace(st.u[2]).max_abs(), 0.0);
    for (const auto& col : st.F) EXPECT_EQ(bottom_trace(col[2]).max_abs(), 0.0);
    EXPECT_LT(std::abs(st.f.mean()), 1e-15);
  }
}

namespace {

VectorField sample_field(const SlabGrid& g) {
  return {BulkField::sample(g, [](double x1, double x2, double y) { return std::sin(x2) * y + std::cos(x1); }),
          BulkField::sample(g, [](double x1, double, double y) { return std::sin(2 * x1) * y * y; }),
          BulkField::sample(g, [](double x1, double x2, double y) { return std::cos(x1 - x2) * (y + 1); })};
}

CoordinateMap sample_map(const SlabGrid& g) {
  return build_map(InterfaceField::sample(g.n1, g.n2,
                                          [](double x1, double x2) { return 0.1 * std::cos(x1) + 0.05 * std::sin(x1 + x2); }),
                   g);
}

}  // namespace

TEST(Dynamics, ProjectionConvergesToDivergenceFree) {
  double res[2], res_n[2];
  for (int r = 0; r < 2; ++r) {
    const int n = 16 << r;
    auto g = SlabGrid::make(n, n, n);
    auto map = sample_map(g);
    auto v = sample_field(g);
    res[r] = divergence(project_div(v, map), map).max_abs();
    res_n[r] = divergence(project_div_normal(v, map, InterfaceField(n, n)), map).max_abs();
  }
  EXPECT_LT(res[0], 1e-6);
  EXPECT_LT(res_n[0], 1e-6);
  EXPECT_LT(res[1], 1e-8);
  EXPECT_LT(res_n[1], 1e-8);
  EXPECT_GT(res[0] / res[1], 16.0);
}

TEST(Dynamics, ProjectionExamples) {
  auto g = SlabGrid::make(32, 32, 32);
  auto map = sample_map(g);
  auto q = poisson_dirichlet(BulkField::sample(g, [](double x1, double x2, double y) { return std::cos(x1 + x2) * (1 + y); }), map);
  auto gq = mapped_gradient(q, map);
  EXPECT_LT(max_diff(project_div(gq, map), zero_vector(g)), 1e-6 * gq[0].max_abs());

  auto v = sample_field(g);
  auto p = project_div(v, map);
  auto removed = v;
  for (int i = 0; i < 3; ++i) removed[i] -= p[i];
  double dot = 0.0, pp = 0.0, rr = 0.0;
  for (int i = 0; i < 3; ++i) {
    dot += volume_inner(p[i], removed[i], map);
    pp += volume_inner(p[i], p[i], map);
    rr += volume_inner(removed[i], removed[i], map);
  }
  EXPECT_LT(std::abs(dot), 1e-6 * std::sqrt(pp * rr));
  EXPECT_LT(max_diff(project_div(p, map), p), 1e-6 * p[0].max_abs());

  std::mt19937_64 rng(41);
  auto target = smooth_random(32, 3, 0.3, rng);
  auto pn = project_div_normal(v, map, target);
  EXPECT_LT((normal_trace(pn, map.interface()) - target).max_abs(), 1e-6);
  EXPECT_EQ(bottom_trace(pn[2]).max_abs(), 0.0);
  try {
    project_div_normal(v, map, target + 0.5);
    FAIL() << "expected ProjectionIncompatible";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProjectionIncompatible);
  }
}

TEST(Dynamics, PressureExamples) {
  auto g = SlabGrid::make(16, 16, 16);
  auto rest = make_scenario("rest", g);
  auto pr = assemble_pressure(rest);
  EXPECT_EQ(pr.p.max_abs(), 0.0);

  const double delta = 1e-4, eps = 0.3;
  auto st = make_state(cos1(16, delta), zero_vector(g), zero_deformation(g), eps, g);
  auto ps = assemble_pressure(st);
  const auto want = cos1(16, eps * delta / std::tanh(1.0));
  EXPECT_LT((trace(ps.p) - want).max_abs(), 1e-3 * want.max_abs());
  EXPECT_EQ(ps.p_ring.max_abs(), 0.0);

  auto e0 = make_scenario("perturbed", g, [] {
    auto o = default_options("perturbed");
    o.eps = 0.0;
    return o;
  }());
  auto p0 = assemble_pressure(e0);
  EXPECT_EQ(trace(p0.p).max_abs(), 0.0);
  EXPECT_GT(p0.p.max_abs(), 0.0);
}

TEST(Dynamics, BulkRhsExamples) {
  auto g = SlabGrid::make(16, 16, 16);
  auto rest = bulk_rhs(make_scenario("rest", g));
  EXPECT_EQ(max_diff(rest.du, zero_vector(g)), 0.0);
  EXPECT_EQ(max_diff(rest.dF, zero_deformation(g)), 0.0);
  auto steady = make_state(InterfaceField(16, 16), zero_vector(g), uniform_deformation(g, {{{1.3, 0, 0}, {0, 1.3, 0}, {0, 0, 0}}}),
                           0.0, g);
  auto r = bulk_rhs(steady);
  EXPECT_LT(max_diff(r.du, zero_vector(g)), 1e-10);
  EXPECT_LT(max_diff(r.dF, zero_deformation(g)), 1e-10);
}

TEST(Dynamics, StepExamples) {
  auto g = SlabGrid::make(16, 16, 16);
  auto rest = make_scenario("rest", g);
  auto next = step(rest, 0.05);
  EXPECT_DOUBLE_EQ(next.t, 0.05);
  EXPECT_EQ(next.f.max_abs(), 0.0);
  EXPECT_EQ(max_diff(next.u, rest.u), 0.0);

  auto steady = make_state(InterfaceField(16, 16), zero_vector(g), uniform_deformation(g, {{{1.0, 0, 0}, {0, 1.0, 0}, {0, 0, 0}}}),
                           0.0, g);
  auto s1 = step(steady, 0.05);
  EXPECT_LT(max_diff(s1.F, steady.F), 1e-9);
  EXPECT_LT(max_diff(s1.u, steady.u), 1e-9);
  EXPECT_LT(s1.f.max_abs(), 1e-9);
}

TEST(Dynamics, CeilingViolationHalts) {
  auto g = SlabGrid::make(8, 8, 8);
  auto o = default_options("elastic-mode");
  o.amplitude = 0.5;
  o.c0 = 0.6;
  auto st = make_scenario("elastic-mode", g, o);
  try {
    step(st, 0.01);
    FAIL() << "expected CeilingViolated";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CeilingViolated);
  }
}

TEST(Dynamics, RungeKuttaSelfConvergence) {
  auto g = SlabGrid::make(16, 16, 16);
  auto st = quiet(make_scenario("elastic-mode", g));
  const double T = 0.4;
  InterfaceField f[3];
  for (int r = 0; r < 3; ++r) {
    const int n = 5 << r;
    auto s = st;
    for (int k = 0; k < n; ++k) s = step(s, T / n);
    f[r] = s.f;
  }
  const double order = std::log2(l2_norm(f[0] - f[1]) / l2_norm(f[1] - f[2]));
  EXPECT_GE(order, 3.8);
}

TEST(Dynamics, TransportInvariantsWithoutReprojection) {
  auto g = SlabGrid::make(16, 16, 16);
  auto o = default_options("perturbed");
  o.amplitude = 0.01;
  auto st = quiet(make_scenario("perturbed", g, o));
  const double dt = stable_dt_bound(st);
  double worst_div = 0.0, worst_normal = 0.0;
  for (int k = 0; k < 100; ++k) {
    st = step(st, dt);
    worst_div = std::max(worst_div, divergence_residuals(st)[1]);
    worst_normal = std::max(worst_normal, normal_trace_residual(st));
  }
  EXPECT_LT(worst_div, 1e-6);
  EXPECT_LT(worst_normal, 1e-6);
}

TEST(Dynamics, ThetaRhsExamples) {
  auto g = SlabGrid::make(16, 16, 16);
  auto rest = make_scenario("rest", g);
  EXPECT_EQ(interface_theta_rhs(rest, InterfaceField(16, 16)).max_abs(), 0.0);
  const double delta = 1e-4, c = 1.2;
  auto st = make_state(cos1(16, delta), zero_vector(g), uniform_deformation(g, {{{c, 0, 0}, {0, c, 0}, {0, 0, 0}}}), 0.0, g);
  auto rhs = interface_theta_rhs(st, InterfaceField(16, 16));
  EXPECT_LT((rhs - cos1(16, -c * c * delta)).max_abs(), 1e-2 * c * c * delta);
}

TEST(Dynamics, ThetaAndKinematicSteppersAgree) {
  auto g = SlabGrid::make(32, 32, 32);
  auto st = quiet(make_scenario("perturbed", g));
  double diff[2];
  for (int r = 0; r < 2; ++r) {
    const double dt = 0.04 / (1 << r);
    auto a = st, b = with_theta(st);
    for (int k = 0; k < 10; ++k) {
      a = step(a, dt);
      b = step(b, dt);
    }
    diff[r] = l2_norm(a.f - b.f);
  }
  EXPECT_LT(diff[0], 1e-6);
  EXPECT_GE(diff[0] / diff[1], 4.0);
}

TEST(InterfaceEquation, AccelRhsExamples) {
  auto g = SlabGrid::make(16, 16, 16);
  auto rest = interface_accel_rhs(make_scenario("rest", g));
  EXPECT_EQ(rest[0].max_abs() + rest[1].max_abs(), 0.0);
  const double delta = 1e-4, c = 1.2;
  auto st = make_state(cos1(16, delta), zero_vector(g), uniform_deformation(g, {{{c, 0, 0}, {0, c, 0}, {0, 0, 0}}}), 0.0, g);
  auto terms = accel_terms(st, assemble_pressure(st));
  // d1 f = -delta sin x1, so c^2 d1^2 d1 f = c^2 delta sin x1.
  auto want = InterfaceField::sample(16, 16, [&](double x1, double) { return c * c * delta * std::sin(x1); });
  EXPECT_LT((terms[kElasticSecond][0] - want).max_abs(), 1e-12);
  auto total = interface_accel_rhs(st);
  EXPECT_LT((total[0] - want).max_abs(), 1e-2 * want.max_abs());
}

TEST(InterfaceEquation, EvoResidualGuards) {
  auto g = SlabGrid::make(8, 8, 8);
  auto rest = trajectory(make_scenario("rest", g), 0.1, 5);
  EXPECT_EQ(evo_residual(rest), 0.0);
  std::vector<FlowState> short_traj(rest.begin(), rest.begin() + 4);
  try {
    evo_residual(short_traj);
    FAIL() << "expected InsufficientHistory";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientHistory);
  }
}

TEST(InterfaceEquation, EvoResidualDecreasesUnderRefinement) {
  double res[3];
  for (int r = 0; r < 3; ++r) {
    const int n = 8 << r;
    auto g = SlabGrid::make(n, n, n);
    res[r] = evo_residual(trajectory(quiet(make_scenario("elastic-mode", g)), 0.04 / (1 << r), 5));
  }
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(res[2], res[1]);
  EXPECT_LT(res[2], 1e-8);
}

TEST(InterfaceEquation, EveryTermMatters) {
  auto g = SlabGrid::make(16, 16, 16);
  auto traj = trajectory(quiet(make_scenario("perturbed", g)), 0.01, 5);
  const double base = evo_residual(traj);
  EXPECT_LT(base, 1e-4);
  for (int t = 0; t < kAccelTermCount; ++t)
    EXPECT_GE(evo_residual(traj, kAllAccelTerms & ~(1u << t)), 10.0 * base) << accel_term_name(t);
}

TEST(InterfaceEquation, BoundaryIdentitiesAlongRun) {
  auto g = SlabGrid::make(32, 32, 32);
  auto traj = trajectory(quiet(make_scenario("perturbed", g)), 0.005, 5);
  const auto& mid = traj[2];
  const auto ub = vector_trace(mid.u);
  const auto ft = deformation_traces(mid.F);
  const auto fr = normal_vector(mid.f);
  for (int i = 1; i <= 2; ++i) {
    // D_t d_i f (fourth-order in time) against d_i u . N.
    auto slope = [i](const FlowState& s) { return horizontal_derivative(s.f, i); };
    auto dt = (1.0 / (12 * 0.005)) * (slope(traj[0]) - 8.0 * slope(traj[1]) + 8.0 * slope(traj[3]) - slope(traj[4]));
    for (int s = 0; s < 2; ++s) dt += ub[s] * horizontal_derivative(slope(mid), s + 1);
    InterfaceField want(32, 32);
    for (int c = 0; c < 3; ++c) want += horizontal_derivative(ub[c], i) * fr.normal[c];
    EXPECT_LT((dt - want).max_abs(), 1e-8);
    for (int k = 0; k < 3; ++k) {
      InterfaceField lhs(32, 32), rhs(32, 32);
      for (int s = 0; s < 2; ++s) lhs += ft[s][k] * horizontal_derivative(horizontal_derivative(mid.f, s + 1), i);
      for (int c = 0; c < 3; ++c) rhs += horizontal_derivative(trace(mid.F[k][c]), i) * fr.normal[c];
      EXPECT_LT((lhs - rhs).max_abs(), 1e-8);
    }
  }
}

TEST(InterfaceEquation, SurfaceCommutatorIdentities) {
  std::mt19937_64 rng(42);
  const int n = 32;
  auto g = smooth_random(n, 4, 1.0, rng), gt = smooth_random(n, 4, 1.0, rng);
  std::array<InterfaceField, 2> u{smooth_random(n, 4, 1.0, rng), smooth_random(n, 4, 1.0, rng)};
  std::array<InterfaceField, 2> F{smooth_random(n, 4, 1.0, rng), smooth_random(n, 4, 1.0, rng)};
  auto d = [](const InterfaceField& h, int i) { return horizontal_derivative(h, i); };
  auto dt = [&](const InterfaceField& h, const InterfaceField& ht) { return ht + u[0] * d(h, 1) + u[1] * d(h, 2); };
  auto df = [&](const InterfaceField& h) { return F[0] * d(h, 1) + F[1] * d(h, 2); };
  // Exact transport: d_t F_j = F_s d_s u_j - u_s d_s F_j.
  std::array<InterfaceField, 2> Ft;
  for (int j = 0; j < 2; ++j) Ft[j] = F[0] * d(u[j], 1) + F[1] * d(u[j], 2) - u[0] * d(F[j], 1) - u[1] * d(F[j], 2);
  for (int i = 1; i <= 2; ++i) {
    auto lhs = dt(d(g, i), d(gt, i)) - d(dt(g, gt), i);
    auto rhs = -1.0 * (d(u[0], i) * d(g, 1) + d(u[1], i) * d(g, 2));
    EXPECT_LT((lhs - rhs).max_abs(), 1e-10);
    auto c2 = d(df(g), i) - df(d(g, i));
    EXPECT_LT((c2 - (d(F[0], i) * d(g, 1) + d(F[1], i) * d(g, 2))).max_abs(), 1e-10);
  }
  auto dfg_t = Ft[0] * d(g, 1) + Ft[1] * d(g, 2) + df(gt);
  auto c3 = dt(df(g), dfg_t) - df(dt(g, gt));
  EXPECT_LT(c3.max_abs(), 1e-10);
}

TEST(InterfaceEquation, MaterialPressureDerivative) {
  auto g = SlabGrid::make(16, 16, 16);
  EXPECT_EQ(material_pressure_derivative(make_scenario("rest", g)).max_abs(), 0.0);
  auto steady = make_state(InterfaceField(16, 16), zero_vector(g), uniform_deformation(g, {{{1.0, 0, 0}, {0, 1.0, 0}, {0, 0, 0}}}),
                           0.0, g);
  EXPECT_LT(material_pressure_derivative(steady).max_abs(), 1e-10);

  auto st = quiet(make_scenario("perturbed", g));
  const auto pr = assemble_pressure(st);
  const auto dtp = material_pressure_derivative(st, pr);
  const auto gp = mapped_gradient(pr.p, *st.map);
  const auto w = extend_flat(surface_rate(st), g);
  double err[2];
  for (int r = 0; r < 2; ++r) {
    const double h = 0.02 / (1 << r);
    BulkField oracle = (1.0 / (2 * h)) * (assemble_pressure(step(st, h)).p - assemble_pressure(step(st, -h)).p);
    oracle -= w * gp[2];
    for (int i = 0; i < 3; ++i) oracle += st.u[i] * gp[i];
    double num = 0.0, den = 0.0;
    for (std::size_t x = 0; x < oracle.size(); ++x) {
      num += (oracle[x] - dtp[x]) * (oracle[x] - dtp[x]);
      den += oracle[x] * oracle[x];
    }
    err[r] = std::sqrt(num / den);
  }
  EXPECT_LT(err[1], 1e-3);
  EXPECT_GT(err[0] / err[1], 3.5);
}

#include <gtest/gtest.h>

#include <cmath>

#include "mscg/solvers.hpp"
#include "../support/oracles.hpp"

using namespace mscg;

namespace {

struct Problem {
  Grid2D grid;
  FaceField t;
  Vector b;
};

Problem random_problem(int n, unsigned seed, double decades = 2.0) {
  const Grid2D g(n, n);
  const CellField k = oracle::random_permeability(g, seed, -decades, decades);
  return {g, build_transmissivities(k, BoundarySpec::left_right_pressure_drop(g)),
          oracle::random_vector(g.size(), seed + 1)};
}

Eigen::MatrixXd reconstruct_map(std::size_t n, const std::function<Vector(const Vector&)>& f) {
  return oracle::reconstruct(n, [&](std::span<const double> v, std::span<double> out) {
    const Vector r = f(Vector(v.begin(), v.end()));
    std::copy(r.begin(), r.end(), out.begin());
  });
}

Eigen::MatrixXd dense_p_inverse(const Splitting& s) {
  return reconstruct_map(s.op().size(), [&](const Vector& v) { return s.apply_p_inverse(v); });
}

Eigen::MatrixXd dense_transfer(const TransferOperator& e) {
  Eigen::MatrixXd m(e.fine().size(), e.coarse().size());
  Vector unit(e.coarse().size(), 0.0);
  for (std::size_t c = 0; c < unit.size(); ++c) {
    unit[c] = 1.0;
    const Vector col = e.prolongate(unit);
    for (std::size_t f = 0; f < col.size(); ++f) m(f, c) = col[f];
    unit[c] = 0.0;
  }
  return m;
}

double energy_error(const Eigen::MatrixXd& a, const Vector& x, const Eigen::VectorXd& exact) {
  const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()) - exact;
  return std::sqrt(e.dot(a * e));
}

SolveParams tight(const Vector& b, double reduction) {
  SolveParams p;
  p.epsilon = std::sqrt(reduction * dot(b, b) / b.size());
  p.max_iterations = 2000;
  return p;
}

}  // namespace

TEST(LevelTolerance, ScalesWithLevelAndSize) {
  SolveParams p;
  EXPECT_NEAR(level_tolerance(0, p, 100), 1e-8, 1e-22);
  EXPECT_NEAR(level_tolerance(2, p, 100), 1e-10, 1e-24);
  p.f = 0.5;
  p.epsilon = 1.0;
  EXPECT_DOUBLE_EQ(level_tolerance(3, p, 8), 1.0);
  EXPECT_THROW(level_tolerance(-1, p, 8), std::invalid_argument);
}

TEST(Pcg, ScaledIdentityConvergesInOneIteration) {
  const Grid2D g(5, 4);
  const StencilOperator a(g, Vector(20, 2.0), Vector(20, 0.0), Vector(20, 0.0));
  IdentityPreconditioner m;
  const Vector b = oracle::random_vector(20, 1);
  const auto out = pcg(a, b, m, {});
  EXPECT_TRUE(out.report.converged);
  EXPECT_EQ(out.report.fine_iterations(), 1);
  for (std::size_t c = 0; c < b.size(); ++c) EXPECT_NEAR(out.x[c], 0.5 * b[c], 1e-15);
  EXPECT_EQ(out.report.residual_history.size(), 2u);
}

TEST(Pcg, ZeroRightHandSide) {
  const auto p = random_problem(8, 3);
  const auto a = assemble_operator(p.t);
  IdentityPreconditioner m;
  const auto out = pcg(a, Vector(a.size(), 0.0), m, {});
  EXPECT_TRUE(out.report.converged);
  EXPECT_EQ(out.report.fine_iterations(), 0);
  for (double v : out.x) EXPECT_EQ(v, 0.0);
}

TEST(Pcg, IndefiniteOperatorIsReported) {
  const Grid2D g(3, 3);
  const StencilOperator a(g, Vector(9, -1.0), Vector(9, 0.0), Vector(9, 0.0));
  IdentityPreconditioner m;
  try {
    pcg(a, Vector(9, 1.0), m, {});
    FAIL() << "expected IndefiniteOperatorError";
  } catch (const IndefiniteOperatorError& e) {
    EXPECT_EQ(e.iteration(), 1);
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(Pcg, WarmStartIsUsed) {
  const auto p = random_problem(8, 4);
  const auto a = assemble_operator(p.t);
  const Vector exact = direct_solve(to_dense(a), p.b);
  IdentityPreconditioner m;
  const auto out = pcg(a, p.b, m, tight(p.b, 1e-20), exact);
  EXPECT_LE(out.report.fine_iterations(), 1);
}

class AllPreconditioners : public ::testing::TestWithParam<PreconditionerKind> {};

TEST_P(AllPreconditioners, ReachesDirectSolution) {
  const auto p = random_problem(16, 7);
  const auto h = build_hierarchy(p.t);
  ASSERT_EQ(h.size(), 2u);
  const Eigen::MatrixXd a = to_dense(*h.finest().op);
  const Eigen::VectorXd exact = oracle::gauss_solve(a, Eigen::Map<const Eigen::VectorXd>(p.b.data(), p.b.size()));
  const auto out = solve(h, p.b, GetParam(), tight(p.b, 1e-24));
  EXPECT_TRUE(out.report.converged);
  EXPECT_LT(energy_error(a, out.x, exact), 1e-8 * std::sqrt(exact.dot(a * exact)));
  EXPECT_EQ(out.report.levels.size(), h.size());
  EXPECT_EQ(out.report.method, to_string(GetParam()));
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllPreconditioners,
                         ::testing::Values(PreconditionerKind::kNone, PreconditionerKind::kPolynomial,
                                           PreconditionerKind::kTatebe,
                                           PreconditionerKind::kRecursiveMultiscale));

TEST(Pcg, EnergyErrorDecreasesMonotonically) {
  const auto p = random_problem(16, 9, 3.0);
  const auto a = assemble_operator(p.t);
  const Eigen::MatrixXd ad = to_dense(a);
  const Eigen::VectorXd exact = oracle::gauss_solve(ad, Eigen::Map<const Eigen::VectorXd>(p.b.data(), p.b.size()));
  const Splitting s(std::make_shared<const StencilOperator>(a), SplittingKind::kSymmetricGaussSeidel);
  double previous = std::sqrt(exact.dot(ad * exact));
  for (int k = 1; k <= 25; ++k) {
    PolynomialPreconditioner m(s, 2);
    SolveParams params;
    params.epsilon = 0.0;
    params.max_iterations = k;
    const auto out = pcg(a, p.b, m, params);
    const double e = energy_error(ad, out.x, exact);
    EXPECT_LE(e, previous * (1 + 1e-10)) << "iteration " << k;
    previous = e;
  }
}

TEST(Polynomial, DiagonalOperatorGivesInverse) {
  const Grid2D g(4, 1);
  const auto op = std::make_shared<const StencilOperator>(g, Vector{1, 2, 4, 8}, Vector(4, 0.0), Vector(4, 0.0));
  const Splitting s(op, SplittingKind::kSymmetricGaussSeidel);
  const Vector z = precond_polynomial(s, 3, Vector{1, 1, 1, 1});
  const Vector want{1, 0.5, 0.25, 0.125};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(z[i], want[i], 1e-15);
  EXPECT_THROW(PolynomialPreconditioner(s, 0), std::invalid_argument);
}

TEST(Polynomial, MatchesTruncatedSeries) {
  for (auto kind : {SplittingKind::kSymmetricGaussSeidel, SplittingKind::kModifiedJacobi}) {
    const auto p = random_problem(6, 11);
    const Splitting s(std::make_shared<const StencilOperator>(assemble_operator(p.t)), kind);
    const Eigen::MatrixXd a = to_dense(s.op());
    const Eigen::MatrixXd pinv = dense_p_inverse(s);
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(a.rows(), a.cols()) - pinv * a;
    const Eigen::MatrixXd series = pinv + h * pinv + h * h * pinv;
    const Eigen::MatrixXd got = reconstruct_map(36, [&](const Vector& v) { return precond_polynomial(s, 1, v); });
    EXPECT_LT(oracle::max_abs_diff(got, series), 1e-12 * series.cwiseAbs().maxCoeff());
    EXPECT_LT(oracle::max_abs_diff(got, got.transpose()), 1e-11 * series.cwiseAbs().maxCoeff());
  }
}

TEST(Tatebe, SingleLevelIsDirectSolve) {
  const auto p = random_problem(8, 12);
  const auto h = build_hierarchy(p.t);
  ASSERT_EQ(h.size(), 1u);
  const Vector z = precond_tatebe(h, 0, p.b);
  const Vector x = direct_solve(to_dense(*h.finest().op), p.b);
  for (std::size_t c = 0; c < x.size(); ++c) EXPECT_NEAR(z[c], x[c], 1e-12 * max_abs(x));
}

class TwoLevelIdentity : public ::testing::TestWithParam<int> {};

TEST_P(TwoLevelIdentity, CycleEqualsSmoothedCoarseCorrection) {
  const int m = GetParam();
  const auto p = random_problem(8, 13);
  HierarchyParams hp;
  hp.coarsest_threshold = 64;
  hp.smoothing_degree = m;
  const auto h = build_hierarchy(p.t, hp);
  ASSERT_EQ(h.size(), 2u);
  const Level& fine = h.finest();
  const Eigen::MatrixXd a = to_dense(*fine.op);
  const Eigen::MatrixXd ac = to_dense(*h.level(1).op);
  const Eigen::MatrixXd e = dense_transfer(*fine.transfer);
  const Eigen::MatrixXd pinv = dense_p_inverse(fine.splitting);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd hs = id - pinv * a;
  Eigen::MatrixXd hm = id;
  for (int s = 0; s < m; ++s) hm = hm * hs;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  Eigen::MatrixXd power = id;
  for (int j = 0; j < 2 * m; ++j) {
    sum += power * pinv;
    power = power * hs;
  }
  const Eigen::MatrixXd want = hm * e * ac.inverse() * e.transpose() * hm.transpose() + sum;
  const Eigen::MatrixXd got = reconstruct_map(a.rows(), [&](const Vector& v) { return precond_tatebe(h, 0, v); });
  EXPECT_LT(oracle::max_abs_diff(got, want), 1e-10 * want.cwiseAbs().maxCoeff());
}

INSTANTIATE_TEST_SUITE_P(Degrees, TwoLevelIdentity, ::testing::Values(1, 2));

TEST(Tatebe, SymmetricAndPositiveOnRoughField) {
  const auto p = random_problem(16, 14, 3.0);
  const auto h = build_hierarchy(p.t);
  ASSERT_EQ(h.size(), 2u);
  const Eigen::MatrixXd m = reconstruct_map(256, [&](const Vector& v) { return precond_tatebe(h, 0, v); });
  EXPECT_LT(oracle::max_abs_diff(m, m.transpose()), 1e-11 * m.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(), 0.0);
}

TEST(Tatebe, ImprovementBoundOnUniformProblem) {
  const Grid2D g(16, 16);
  const auto h = build_hierarchy(build_transmissivities(CellField(g, 1.0), BoundarySpec::left_right_pressure_drop(g)));
  ASSERT_EQ(h.size(), 2u);
  ASSERT_EQ(h.level(1).grid.nx, 4);
  const Level& fine = h.finest();
  const int m = fine.smoothing_degree;
  const Eigen::MatrixXd a = to_dense(*fine.op);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd mi = reconstruct_map(256, [&](const Vector& v) { return precond_tatebe(h, 0, v); });
  EXPECT_LT(oracle::max_abs_diff(mi, mi.transpose()), 1e-11 * mi.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd sym = 0.5 * (mi + mi.transpose());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(), 0.0);

  const Eigen::MatrixXd e = dense_transfer(*fine.transfer);
  const Eigen::MatrixXd w = e * to_dense(*h.level(1).op).inverse() * e.transpose();
  const Eigen::MatrixXd hs = id - dense_p_inverse(fine.splitting) * a;
  auto norm2 = [](const Eigen::MatrixXd& x) { return Eigen::JacobiSVD<Eigen::MatrixXd>(x).singularValues()(0); };
  const double lhs = norm2(a * mi - id);
  const double rhs = std::pow(norm2(hs), 2 * m) * norm2(a * w - id);
  EXPECT_LE(lhs, rhs * (1 + 1e-10));
  EXPECT_LT(lhs, 1.0);
}

TEST(SplittingIdentity, InverseExpansionHolds) {
  for (int m : {1, 2}) {
    const Grid2D g(4, 2);
    const CellField k = oracle::random_permeability(g, 40 + m);
    const Splitting s(std::make_shared<const StencilOperator>(
                          assemble_operator(build_transmissivities(k, BoundarySpec::left_right_pressure_drop(g)))),
                      SplittingKind::kSymmetricGaussSeidel);
    const Eigen::MatrixXd a = to_dense(s.op());
    const Eigen::MatrixXd ainv = a.inverse();
    const Eigen::MatrixXd pinv = dense_p_inverse(s);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(8, 8);
    const Eigen::MatrixXd hs = id - pinv * a;
    Eigen::MatrixXd hm = id;
    for (int j = 0; j < m; ++j) hm = hm * hs;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(8, 8);
    Eigen::MatrixXd power = id;
    for (int j = 0; j < 2 * m; ++j) {
      sum += power * pinv;
      power = power * hs;
    }
    const Eigen::MatrixXd rhs = hm * ainv * hm.transpose() + sum;
    EXPECT_LT(oracle::max_abs_diff(rhs, ainv), 1e-10 * ainv.cwiseAbs().maxCoeff());
  }
}

TEST(RecursiveMultiscale, NearlyLinearAndSymmetric) {
  const auto p = random_problem(16, 15);
  HierarchyParams hp;
  hp.coarsest_threshold = 16;
  const auto h = build_hierarchy(p.t, hp);
  ASSERT_EQ(h.size(), 3u);
  SolveParams params;
  params.epsilon = 1e-13;
  const Eigen::MatrixXd m = reconstruct_map(256, [&](const Vector& v) { return precond_recursive_ms(h, 0, v, params); });
  EXPECT_LT(oracle::max_abs_diff(m, m.transpose()), 1e-8 * m.cwiseAbs().maxCoeff());
}

TEST(RecursiveMultiscale, ReportsPerLevelWork) {
  const auto p = random_problem(32, 16);
  HierarchyParams hp;
  hp.coarsest_threshold = 16;
  const auto h = build_hierarchy(p.t, hp);
  ASSERT_EQ(h.size(), 3u);
  const auto out = solve(h, p.b, PreconditionerKind::kRecursiveMultiscale, tight(p.b, 1e-10));
  const auto& r = out.report;
  ASSERT_TRUE(r.converged);
  EXPECT_GT(r.levels[1].inner_solves, 0);
  EXPECT_GE(r.levels[1].iterations, r.levels[1].inner_solves);
  EXPECT_GE(r.levels[2].iterations, r.levels[1].iterations);
  double share = 0.0;
  for (std::size_t k = 0; k < r.levels.size(); ++k) share += r.level_share(k);
  EXPECT_NEAR(share, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.flop_proxy(), r.levels[0].iterations * 1024.0 + r.levels[1].iterations * 64.0 +
                                       r.levels[2].iterations * 4.0);
  const auto j = r.to_json();
  EXPECT_EQ(j["levels"].size(), 3u);
  EXPECT_EQ(j["fine_iterations"], r.fine_iterations());
  EXPECT_FALSE(r.events.empty());
  EXPECT_EQ(r.residual_history.size(), static_cast<std::size_t>(r.fine_iterations()) + 1);
}

TEST(StandardMultigrid, ConvergesOnUniformField) {
  const Grid2D g(64, 64);
  const auto h = build_hierarchy(build_transmissivities(CellField(g, 1.0), BoundarySpec::left_right_pressure_drop(g)));
  const Vector b = oracle::random_vector(g.size(), 17);
  SolveParams params = tight(b, 1e-10);
  params.max_iterations = 30;
  const auto out = standard_multigrid_solve(h, b, params);
  EXPECT_TRUE(out.report.converged);
  EXPECT_FALSE(out.report.diverged);
  const auto zero = standard_multigrid_solve(h, Vector(g.size(), 0.0), params);
  EXPECT_TRUE(zero.report.converged);
  EXPECT_EQ(zero.report.fine_iterations(), 0);
  for (double v : zero.x) EXPECT_EQ(v, 0.0);
}

TEST(PreconditionerNames, ParseAndPrint) {
  EXPECT_EQ(parse_preconditioner("ms"), PreconditionerKind::kRecursiveMultiscale);
  EXPECT_EQ(parse_preconditioner("tatebe"), PreconditionerKind::kTatebe);
  EXPECT_EQ(parse_preconditioner("poly"), PreconditionerKind::kPolynomial);
  EXPECT_EQ(parse_preconditioner("cg"), PreconditionerKind::kNone);
  EXPECT_THROW(parse_preconditioner("ilu"), std::invalid_argument);
  EXPECT_STREQ(to_string(PreconditionerKind::kRecursiveMultiscale), "recursive-ms");
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mscg/field_gen.hpp"

using namespace mscg;

namespace {

CorrelationSpec isotropic(CorrelationModel model, double cutoff, double variance) {
  return CorrelationSpec::oriented(model, cutoff, cutoff, 0.0, 0.0, variance);
}

}  // namespace

TEST(CorrelationKernel, KnownValues) {
  CorrelationSpec spec;
  spec.lambda = {1.0, 0.0, 1.0};
  spec.model = CorrelationModel::kPowerLaw;
  EXPECT_DOUBLE_EQ(correlation_kernel(spec, 0.0, 0.0), 1.0);
  EXPECT_NEAR(correlation_kernel(spec, 1.0, 0.0), std::pow(2.0, -0.25), 1e-15);
  EXPECT_NEAR(correlation_kernel(spec, 1.0, 1.0), std::pow(3.0, -0.25), 1e-15);
  spec.model = CorrelationModel::kGaussian;
  EXPECT_NEAR(correlation_kernel(spec, 1.0, 0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(correlation_kernel(spec, 0.0, 2.0), std::exp(-4.0), 1e-15);
}

TEST(CorrelationKernel, OrientedCutoffs) {
  const double theta = std::numbers::pi / 6;
  const auto spec = CorrelationSpec::oriented(CorrelationModel::kGaussian, 4.0, 1.0, theta, 0, 1);
  const double along = correlation_kernel(spec, 4.0 * std::cos(theta), 4.0 * std::sin(theta));
  const double across = correlation_kernel(spec, -std::sin(theta), std::cos(theta));
  EXPECT_NEAR(along, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(across, std::exp(-1.0), 1e-12);
  EXPECT_DOUBLE_EQ(spec.longest_cutoff(), 4.0);
}

TEST(CorrelationKernel, RejectsNonPositiveDefinite) {
  CorrelationSpec spec;
  spec.lambda = {1.0, 2.0, 1.0};
  EXPECT_THROW(correlation_kernel(spec, 1.0, 0.0), std::invalid_argument);
  spec.lambda = {1.0, 0.0, 1.0};
  spec.log_variance = -1.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_THROW(CorrelationSpec::oriented(CorrelationModel::kGaussian, 0.0, 1.0, 0, 0, 1),
               std::invalid_argument);
}

TEST(Generator, ZeroVarianceIsConstant) {
  const Grid2D g(32, 16);
  auto spec = isotropic(CorrelationModel::kPowerLaw, 4.0, 0.0);
  spec.log_mean = 1.5;
  const CellField k = generate_lognormal_field(g, spec, 3);
  for (double v : k.values()) EXPECT_NEAR(v, std::exp(1.5), 1e-12);
}

TEST(Generator, DeterministicAndPositive) {
  const Grid2D g(48, 40, 0.5, 0.5);
  const auto spec = isotropic(CorrelationModel::kPowerLaw, 3.0, 2.0);
  const CellField a = generate_lognormal_field(g, spec, 11);
  const CellField b = generate_lognormal_field(g, spec, 11);
  const CellField c = generate_lognormal_field(g, spec, 12);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  for (double v : a.values()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
  }
}

TEST(Generator, NormalizedMomentsAreExact) {
  const Grid2D g(64, 64);
  auto spec = isotropic(CorrelationModel::kGaussian, 6.0, 2.0);
  spec.log_mean = -0.5;
  const auto m = log_moments(generate_lognormal_field(g, spec, 5));
  EXPECT_NEAR(m.mean, -0.5, 1e-12);
  EXPECT_NEAR(m.variance, 2.0, 1e-12);
}

TEST(Generator, RawMomentsMatchTarget) {
  const Grid2D g(256, 256);
  const auto spec = isotropic(CorrelationModel::kGaussian, 4.0, 2.0);
  GeneratorOptions opts;
  opts.normalize_moments = false;
  const auto m = log_moments(generate_lognormal_field(g, spec, 1, opts));
  EXPECT_NEAR(m.mean, 0.0, 0.1);
  EXPECT_NEAR(m.variance, 2.0, 0.15 * 2.0);
}

TEST(Generator, CorrelogramMatchesKernel) {
  const Grid2D g(512, 512);
  const double cutoff = 8.0;
  const auto spec = isotropic(CorrelationModel::kGaussian, cutoff, 1.0);
  GeneratorOptions opts;
  opts.normalize_moments = false;
  const int max_lag = 16;
  std::vector<double> cov(max_lag + 1, 0.0);
  double var = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const CellField k = generate_lognormal_field(g, spec, 100 + s, opts);
    Vector y(k.size());
    for (std::size_t n = 0; n < y.size(); ++n) y[n] = std::log(k.values()[n]);
    for (int lag = 0; lag <= max_lag; ++lag) {
      double sum = 0.0;
      std::size_t count = 0;
      for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i + lag < g.nx; ++i) {
          sum += y[g.index(i, j)] * y[g.index(i + lag, j)];
          sum += y[g.index(j, i)] * y[g.index(j, i + lag)];
          count += 2;
        }
      }
      cov[lag] += sum / count / seeds;
    }
  }
  var = cov[0];
  for (int lag = 0; lag <= max_lag; ++lag) {
    const double expected = correlation_kernel(spec, lag, 0.0);
    EXPECT_NEAR(cov[lag] / var, expected, 0.1) << "lag " << lag;
  }
}

TEST(Generator, BaseCaseSpanIsPlausible) {
  const Grid2D g(256, 256, 0.0005, 0.0005);
  const auto spec = CorrelationSpec::oriented(CorrelationModel::kPowerLaw, 0.016, 0.002,
                                              15.0 * std::numbers::pi / 180.0, 0.0, 2.0);
  const CellField k = generate_lognormal_field(g, spec, 1);
  const double sigma = std::sqrt(2.0);
  const double log_ratio = std::log(max_min_ratio(k));
  EXPECT_GT(log_ratio, 4.0 * sigma);
  EXPECT_LT(log_ratio, 9.0 * sigma);
}

TEST(RescaleLogVariance, IdentityAndExactness) {
  const Grid2D g(40, 30);
  const CellField k = generate_lognormal_field(g, isotropic(CorrelationModel::kGaussian, 3.0, 1.0), 2);
  const CellField same = rescale_log_variance(k, 1.0);
  for (std::size_t n = 0; n < k.size(); ++n) {
    EXPECT_NEAR(same.values()[n], k.values()[n], 1e-12 * k.values()[n]);
  }
  const auto m = log_moments(rescale_log_variance(k, 2.5));
  EXPECT_NEAR(m.variance, 2.5, 1e-12);
  EXPECT_NEAR(m.mean, log_moments(k).mean, 1e-12);
}

TEST(RescaleLogVariance, EdgeCases) {
  const Grid2D g(8, 8);
  const CellField k = generate_lognormal_field(g, isotropic(CorrelationModel::kGaussian, 2.0, 1.0), 4);
  const CellField flat = rescale_log_variance(k, 0.0);
  for (double v : flat.values()) EXPECT_NEAR(v, std::exp(log_moments(k).mean), 1e-12);
  EXPECT_THROW(rescale_log_variance(CellField(g, 2.0), 1.0), std::invalid_argument);
  EXPECT_THROW(rescale_log_variance(k, -1.0), std::invalid_argument);
  const CellField once = rescale_log_variance(k, 3.0);
  const CellField twice = rescale_log_variance(once, 3.0);
  for (std::size_t n = 0; n < k.size(); ++n) {
    EXPECT_NEAR(twice.values()[n], once.values()[n], 1e-12 * once.values()[n]);
  }
}

TEST(RescaleLogVariance, RatioScalesWithStandardDeviation) {
  const Grid2D g(64, 64);
  const CellField k = generate_lognormal_field(g, isotropic(CorrelationModel::kPowerLaw, 5.0, 1.0), 9);
  const double r2 = max_min_ratio(rescale_log_variance(k, 2.0));
  const double r3 = max_min_ratio(rescale_log_variance(k, 3.0));
  EXPECT_NEAR(std::log(r3), std::log(r2) * std::sqrt(1.5), 1e-10 * std::log(r3));
}

TEST(Subgrid, ExtractsLowerCorner) {
  const Grid2D g(4, 3, 0.5, 2.0);
  CellField k(g);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) k(i, j) = 10 * j + i + 1;
  const CellField s = extract_subgrid(k, 2, 2);
  EXPECT_EQ(s.grid(), Grid2D(2, 2, 0.5, 2.0));
  EXPECT_EQ(s.values(), (Vector{1, 2, 11, 12}));
  EXPECT_EQ(extract_subgrid(k, 4, 3).values(), k.values());
  EXPECT_THROW(extract_subgrid(k, 5, 1), std::out_of_range);
  EXPECT_THROW(extract_subgrid(k, 0, 1), std::out_of_range);
}

TEST(InterpolateToGrid, GeometricMeanOfCoveredCells) {
  const Grid2D fine(4, 2);
  const CellField k(fine, Vector{1, 4, 2, 8, 16, 1, 1, 2});
  const CellField c = interpolate_to_grid(k, Grid2D(2, 1, 2.0, 2.0));
  EXPECT_NEAR(c(0, 0), std::pow(1.0 * 4 * 16 * 1, 0.25), 1e-12);
  EXPECT_NEAR(c(1, 0), std::pow(2.0 * 8 * 1 * 2, 0.25), 1e-12);
  const CellField same = interpolate_to_grid(k, fine);
  EXPECT_EQ(same.values(), k.values());
  EXPECT_THROW(interpolate_to_grid(k, Grid2D(2, 1)), DimensionMismatch);
}

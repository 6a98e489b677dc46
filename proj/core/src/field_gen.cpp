#include "mscg/field_gen.hpp"

#include <fftw3.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <random>

namespace mscg {

namespace {

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// In-place forward 2-D transform of an ny x nx row-major buffer.
void fft2_inplace(fftw_complex* data, int ny, int nx) {
  fftw_plan plan = fftw_plan_dft_2d(ny, nx, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

// Smallest n' >= n whose only prime factors are 2, 3, 5, 7.
int fft_friendly(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

int signed_lag(int k, int m) { return (k <= m / 2) ? k : k - m; }

}  // namespace

CorrelationSpec CorrelationSpec::oriented(CorrelationModel model, double major,
                                          double minor, double angle, double log_mean,
                                          double log_variance) {
  if (!(major > 0.0) || !(minor > 0.0)) {
    throw std::invalid_argument("CorrelationSpec: cutoff lengths must be positive");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double a = 1.0 / (major * major);
  const double b = 1.0 / (minor * minor);
  CorrelationSpec spec;
  spec.model = model;
  spec.lambda = {c * c * a + s * s * b, c * s * (a - b), s * s * a + c * c * b};
  spec.log_mean = log_mean;
  spec.log_variance = log_variance;
  return spec;
}

double CorrelationSpec::quadratic_form(double sx, double sy) const {
  return lambda[0] * sx * sx + 2.0 * lambda[1] * sx * sy + lambda[2] * sy * sy;
}

double CorrelationSpec::longest_cutoff() const {
  const double tr = lambda[0] + lambda[2];
  const double det = lambda[0] * lambda[2] - lambda[1] * lambda[1];
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double smallest = tr / 2.0 - disc;
  return 1.0 / std::sqrt(smallest);
}

void CorrelationSpec::validate() const {
  const double det = lambda[0] * lambda[2] - lambda[1] * lambda[1];
  if (!(lambda[0] > 0.0) || !(det > 0.0)) {
    throw std::invalid_argument("CorrelationSpec: Lambda must be symmetric positive definite");
  }
  if (!(log_variance >= 0.0) || !std::isfinite(log_mean)) {
    throw std::invalid_argument("CorrelationSpec: log variance must be non-negative");
  }
}

namespace {

double kernel_unchecked(const CorrelationSpec& spec, double sx, double sy) {
  const double q = spec.quadratic_form(sx, sy);
  switch (spec.model) {
    case CorrelationModel::kPowerLaw:
      return std::pow(1.0 + q, -0.25);
    case CorrelationModel::kGaussian:
      return std::exp(-q);
  }
  return 0.0;
}

}  // namespace

double correlation_kernel(const CorrelationSpec& spec, double sx, double sy) {
  spec.validate();
  return kernel_unchecked(spec, sx, sy);
}

CellField generate_lognormal_field(const Grid2D& grid, const CorrelationSpec& spec,
                                   std::uint64_t seed, const GeneratorOptions& options) {
  spec.validate();
  if (spec.log_variance == 0.0) return CellField(grid, std::exp(spec.log_mean));

  if (spec.longest_cutoff() > std::max(grid.width(), grid.height())) {
    spdlog::warn("generate_lognormal_field: cutoff length {} exceeds the {}x{} domain",
                 spec.longest_cutoff(), grid.width(), grid.height());
  }

  const int mx = fft_friendly(static_cast<int>(std::ceil(options.embedding_factor * grid.nx)));
  const int my = fft_friendly(static_cast<int>(std::ceil(options.embedding_factor * grid.ny)));
  const std::size_t total = static_cast<std::size_t>(mx) * static_cast<std::size_t>(my);

  // Eigenvalues of the (symmetrised) circulant covariance.
  auto buf = fftw_buffer(total);
  for (int l = 0; l < my; ++l) {
    const double sy = signed_lag(l, my) * grid.dy;
    for (int k = 0; k < mx; ++k) {
      const double sx = signed_lag(k, mx) * grid.dx;
      fftw_complex& c = buf[static_cast<std::size_t>(l) * mx + k];
      c[0] = kernel_unchecked(spec, sx, sy);
      c[1] = 0.0;
    }
  }
  fft2_inplace(buf.get(), my, mx);

  std::vector<double> amplitude(total);
  double clamped = 0.0;
  double positive = 0.0;
  std::size_t clamped_count = 0;
  for (std::size_t n = 0; n < total; ++n) {
    const double ev = buf[n][0];
    if (ev < 0.0) {
      clamped += -ev;
      ++clamped_count;
      amplitude[n] = 0.0;
    } else {
      positive += ev;
      amplitude[n] = std::sqrt(ev / static_cast<double>(total));
    }
  }
  if (clamped_count > 0) {
    spdlog::warn("generate_lognormal_field: clamped {} negative spectral values "
                 "({:.3g} of the positive spectral mass)",
                 clamped_count, clamped / positive);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t n = 0; n < total; ++n) {
    const double re = normal(rng);
    const double im = normal(rng);
    buf[n][0] = amplitude[n] * re;
    buf[n][1] = amplitude[n] * im;
  }
  fft2_inplace(buf.get(), my, mx);

  Vector g(grid.size());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      g[grid.index(i, j)] = buf[static_cast<std::size_t>(j) * mx + i][0];
    }
  }

  double shift = spec.log_mean;
  double scale = std::sqrt(spec.log_variance);
  if (options.normalize_moments) {
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (double v : g) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.size());
    if (var > 0.0) {
      scale = std::sqrt(spec.log_variance / var);
      shift = spec.log_mean - mean * scale;
    }
  }
  for (double& v : g) v = std::exp(shift + scale * v);
  return CellField(grid, std::move(g));
}

LogMoments log_moments(const CellField& field) {
  const auto& v = field.values();
  if (v.empty()) throw std::invalid_argument("log_moments: empty field");
  double mean = 0.0;
  for (double x : v) {
    if (!(x > 0.0)) throw std::invalid_argument("log_moments: field must be strictly positive");
    mean += std::log(x);
  }
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) {
    const double d = std::log(x) - mean;
    var += d * d;
  }
  return {mean, var / static_cast<double>(v.size())};
}

CellField rescale_log_variance(const CellField& field, double target_variance) {
  if (!(target_variance >= 0.0)) {
    throw std::invalid_argument("rescale_log_variance: target variance must be >= 0");
  }
  const LogMoments m = log_moments(field);
  if (target_variance == 0.0) return CellField(field.grid(), std::exp(m.mean));
  if (m.variance <= 1e-24 * std::max(1.0, m.mean * m.mean)) {
    throw std::invalid_argument(
        "rescale_log_variance: cannot give a constant field a positive variance");
  }
  const double factor = std::sqrt(target_variance / m.variance);
  Vector out(field.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = std::exp(m.mean + (std::log(field.values()[n]) - m.mean) * factor);
  }
  return CellField(field.grid(), std::move(out));
}

CellField extract_subgrid(const CellField& field, int upper_i, int upper_j) {
  const Grid2D& g = field.grid();
  if (upper_i < 1 || upper_j < 1 || upper_i > g.nx || upper_j > g.ny) {
    throw std::out_of_range("extract_subgrid: corner (" + std::to_string(upper_i) + "," +
                            std::to_string(upper_j) + ") outside " + g.describe());
  }
  const Grid2D sub(upper_i, upper_j, g.dx, g.dy);
  CellField out(sub);
  for (int j = 0; j < upper_j; ++j) {
    for (int i = 0; i < upper_i; ++i) out(i, j) = field(i, j);
  }
  return out;
}

namespace {

struct Overlap {
  int fine;
  double length;
};

// For each target cell along one axis, the source cells it overlaps.
std::vector<std::vector<Overlap>> axis_overlaps(int n_src, double d_src, int n_dst,
                                                double d_dst) {
  std::vector<std::vector<Overlap>> out(n_dst);
  for (int c = 0; c < n_dst; ++c) {
    const double lo = c * d_dst;
    const double hi = (c + 1) * d_dst;
    int first = std::max(0, static_cast<int>(std::floor(lo / d_src)) - 1);
    for (int f = first; f < n_src; ++f) {
      const double flo = f * d_src;
      if (flo >= hi) break;
      const double len = std::min(hi, flo + d_src) - std::max(lo, flo);
      if (len > 1e-12 * d_dst) out[c].push_back({f, len});
    }
  }
  return out;
}

}  // namespace

CellField interpolate_to_grid(const CellField& field, const Grid2D& target) {
  const Grid2D& src = field.grid();
  if (!same_extent(src, target)) {
    throw DimensionMismatch("interpolate_to_grid: target grid covers a different domain");
  }
  if (src == target) return field;
  const auto ox = axis_overlaps(src.nx, src.dx, target.nx, target.dx);
  const auto oy = axis_overlaps(src.ny, src.dy, target.ny, target.dy);
  CellField out(target);
  for (int J = 0; J < target.ny; ++J) {
    for (int I = 0; I < target.nx; ++I) {
      double sum = 0.0;
      double area = 0.0;
      for (const Overlap& y : oy[J]) {
        for (const Overlap& x : ox[I]) {
          const double a = x.length * y.length;
          sum += a * std::log(field(x.fine, y.fine));
          area += a;
        }
      }
      out(I, J) = std::exp(sum / area);
    }
  }
  return out;
}

double max_min_ratio(const CellField& field) {
  const auto [lo, hi] = std::minmax_element(field.values().begin(), field.values().end());
  if (!(*lo > 0.0)) throw std::invalid_argument("max_min_ratio: field must be positive");
  return *hi / *lo;
}

}  // namespace mscg

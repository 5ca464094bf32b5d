#include "deepcal/cts.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <limits>
#include <numbers>
#include <sstream>

#include "deepcal/error.h"
#include "deepcal/rng.h"

namespace deepcal::cts {
namespace {

using Complex = std::complex<double>;

// log(1 + z) without cancellation for small |z|.
Complex Log1p(Complex z) {
  if (std::abs(z) >= 0.5) return std::log(1.0 + z);
  const double re = 0.5 * std::log1p(2.0 * z.real() + std::norm(z));
  return {re, std::atan2(z.imag(), 1.0 + z.real())};
}

// exp(w) - 1 without cancellation for small |w|.
Complex Expm1(Complex w) {
  const double half_sin = std::sin(0.5 * w.imag());
  const double re =
      std::expm1(w.real()) * std::cos(w.imag()) - 2.0 * half_sin * half_sin;
  return {re, std::exp(w.real()) * std::sin(w.imag())};
}

struct Coefficients {
  double alpha;
  double lp_pow_alpha;  // lambda_plus^alpha
  double lm_pow_alpha;  // lambda_minus^alpha
  double drift;         // coefficient of i*u
  double jump_scale;    // 1 / (alpha (alpha - 1) D)
};

Coefficients MakeCoefficients(const CtsParams& p) {
  const double a = p.alpha;
  const double denom = std::pow(p.lambda_plus, a - 2.0) +
                       std::pow(p.lambda_minus, a - 2.0);
  return {a, std::pow(p.lambda_plus, a), std::pow(p.lambda_minus, a),
          (std::pow(p.lambda_plus, a - 1.0) -
           std::pow(p.lambda_minus, a - 1.0)) /
              ((a - 1.0) * denom),
          1.0 / (a * (a - 1.0) * denom)};
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// FFTW's planner is not reentrant.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

// Forward DFT (sign -1) in place.
void ForwardDft(FftwBuffer& buf, std::size_t n) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data,
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(plan);
}

// Chernoff bound: P(Z > x) <= exp(l(s) - s x) for 0 < s < lambda_plus. Returns
// the smallest x (over a scan of s) for which the bound drops to exp(-log_eps).
double ChernoffTail(const CtsParams& p, double log_eps, bool right) {
  const double limit = right ? p.lambda_plus : p.lambda_minus;
  double best = std::numeric_limits<double>::infinity();
  const double s_min = std::min(1e-2, 0.5 * limit);
  const double s_max = 0.999 * limit;
  for (int k = 0; k <= 256; ++k) {
    const double s = s_min * std::pow(s_max / s_min, k / 256.0);
    const double l = LogLaplace(right ? s : -s, p);
    best = std::min(best, (l + log_eps) / s);
  }
  return best;
}

}  // namespace

void CtsParams::Validate() const {
  std::ostringstream msg;
  if (!(alpha > 0.0 && alpha < 2.0)) {
    msg << "alpha must lie in (0, 2), got " << alpha;
  } else if (std::abs(alpha - 1.0) < kMinAlphaDistanceFromOne) {
    msg << "alpha within " << kMinAlphaDistanceFromOne
        << " of 1 is not supported, got " << alpha;
  } else if (!(lambda_plus > 0.0 && lambda_plus <= kMaxLambda)) {
    msg << "lambda_plus must lie in (0, 1e6], got " << lambda_plus;
  } else if (!(lambda_minus > 0.0 && lambda_minus <= kMaxLambda)) {
    msg << "lambda_minus must lie in (0, 1e6], got " << lambda_minus;
  } else {
    return;
  }
  throw InvalidParams(msg.str());
}

Complex CharacteristicExponent(Complex u, const CtsParams& p) {
  p.Validate();
  const Coefficients c = MakeCoefficients(p);
  const Complex iu = Complex(0.0, 1.0) * u;
  // (lambda -/+ i u)^alpha - lambda^alpha = lambda^alpha expm1(alpha log1p(.))
  const Complex right =
      c.lp_pow_alpha * Expm1(c.alpha * Log1p(-iu / p.lambda_plus));
  const Complex left =
      c.lm_pow_alpha * Expm1(c.alpha * Log1p(iu / p.lambda_minus));
  return c.drift * iu + c.jump_scale * (right + left);
}

Complex CfStdCts(double u, const CtsParams& p) {
  return std::exp(CharacteristicExponent(Complex(u, 0.0), p));
}

double LogLaplace(double x, const CtsParams& p) {
  p.Validate();
  if (!(x < p.lambda_plus && x > -p.lambda_minus)) {
    std::ostringstream msg;
    msg << "log-Laplace argument " << x << " outside (" << -p.lambda_minus
        << ", " << p.lambda_plus << ")";
    throw DomainError(msg.str());
  }
  return LogLaplaceFunction(p)(x);
}

LogLaplaceFunction::LogLaplaceFunction(const CtsParams& p) {
  p.Validate();
  const Coefficients c = MakeCoefficients(p);
  alpha_ = c.alpha;
  lambda_plus_ = p.lambda_plus;
  lambda_minus_ = p.lambda_minus;
  lp_pow_alpha_ = c.lp_pow_alpha;
  lm_pow_alpha_ = c.lm_pow_alpha;
  drift_ = c.drift;
  jump_scale_ = c.jump_scale;
}

double LogLaplaceFunction::operator()(double x) const {
  const double right =
      lp_pow_alpha_ * std::expm1(alpha_ * std::log1p(-x / lambda_plus_));
  const double left =
      lm_pow_alpha_ * std::expm1(alpha_ * std::log1p(x / lambda_minus_));
  return drift_ * x + jump_scale_ * (right + left);
}

double ThirdCumulant(const CtsParams& p) {
  p.Validate();
  const double a = p.alpha;
  const double denom = std::pow(p.lambda_plus, a - 2.0) +
                       std::pow(p.lambda_minus, a - 2.0);
  return (2.0 - a) *
         (std::pow(p.lambda_plus, a - 3.0) - std::pow(p.lambda_minus, a - 3.0)) /
         denom;
}

InverseCdfTable InverseCdfTable::Build(const CtsParams& p,
                                       std::size_t resolution,
                                       double tail_cutoff) {
  p.Validate();
  if (resolution < 64 || (resolution & (resolution - 1)) != 0) {
    throw InvalidParams("inverse CDF resolution must be a power of two >= 64");
  }
  if (!(tail_cutoff > 0.0 && tail_cutoff < 0.01)) {
    throw InvalidParams("tail cutoff must lie in (0, 0.01)");
  }
  const std::size_t n = resolution;

  // The grid must hold the tails; the step follows from the resolution. For
  // near-singular laws (small alpha with small lambdas) the CF has not decayed
  // by pi / dx, and the moment checks at the end reject the table.
  const double log_eps = -std::log(tail_cutoff * 1e-4);
  const double half_width = std::max(
      {8.0, ChernoffTail(p, log_eps, true), ChernoffTail(p, log_eps, false)});
  const double dx = 2.0 * half_width / static_cast<double>(n);
  const double grid_half = 0.5 * dx * static_cast<double>(n);
  const double du = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);

  // f(x_k) = du/(2 pi) (-1)^k DFT_k[(-1)^j phi(u_j)] with x_k = -L + k dx and
  // u_j = (j - n/2) du, since du * L = pi.
  FftwBuffer buf(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) - static_cast<double>(n / 2)) * du;
    Complex phi = CfStdCts(u, p);
    if (j % 2 == 1) phi = -phi;
    buf.data[j][0] = phi.real();
    buf.data[j][1] = phi.imag();
  }
  ForwardDft(buf, n);

  std::vector<double> density(n);
  const double scale = du / (2.0 * std::numbers::pi);
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double f = scale * buf.data[k][0];
    if (k % 2 == 1) f = -f;
    density[k] = std::max(f, 0.0);
    mass += density[k] * dx;
  }
  if (!(std::abs(mass - 1.0) <= 1e-3)) {
    std::ostringstream msg;
    msg << "stdCTS(" << p.alpha << ", " << p.lambda_plus << ", "
        << p.lambda_minus << ") density integrates to " << mass;
    throw InversionFailure(msg.str());
  }

  std::vector<double> cdf(n);
  cdf[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    cdf[k] = cdf[k - 1] + 0.5 * (density[k - 1] + density[k]) * dx;
  }
  const double total = cdf.back();

  InverseCdfTable table;
  table.params_ = p;
  table.tail_cutoff_ = tail_cutoff;
  table.recovered_mass_ = mass;
  auto x_at = [&](std::size_t k) {
    return -grid_half + static_cast<double>(k) * dx;
  };
  const double lo = tail_cutoff;
  const double hi = 1.0 - tail_cutoff;
  double prev_p = 0.0;
  double prev_x = x_at(0);
  for (std::size_t k = 1; k < n; ++k) {
    const double pk = cdf[k] / total;
    if (pk <= prev_p) continue;
    const double xk = x_at(k);
    // Emit the interpolated endpoint where the CDF crosses each cutoff.
    for (double cut : {lo, hi}) {
      if (prev_p < cut && pk >= cut) {
        const double w = (cut - prev_p) / (pk - prev_p);
        table.probs_.push_back(cut);
        table.quants_.push_back(prev_x + w * (xk - prev_x));
      }
    }
    if (pk > lo && pk < hi) {
      table.probs_.push_back(pk);
      table.quants_.push_back(xk);
    }
    prev_p = pk;
    prev_x = xk;
  }
  if (table.probs_.size() < 3 || table.probs_.front() != lo ||
      table.probs_.back() != hi) {
    throw InversionFailure("inverse CDF table does not span the cutoffs");
  }
  table.BuildGuide();
  const double mean = table.Mean();
  const double variance = table.Variance();
  if (!(std::abs(mean) <= 0.01 && std::abs(variance - 1.0) <= 0.02)) {
    std::ostringstream msg;
    msg << "stdCTS(" << p.alpha << ", " << p.lambda_plus << ", "
        << p.lambda_minus << ") table has mean " << mean << " and variance "
        << variance;
    throw InversionFailure(msg.str());
  }
  return table;
}

void InverseCdfTable::BuildGuide() {
  const std::size_t segments = probs_.size() - 1;
  guide_.resize(segments);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < segments; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(segments);
    while (seg + 1 < segments && probs_[seg + 1] <= u) ++seg;
    guide_[k] = static_cast<std::uint32_t>(seg);
  }
}

double InverseCdfTable::Quantile(double u) const {
  const std::size_t last = probs_.size() - 1;
  if (u < probs_[0]) {
    const double slope = (quants_[1] - quants_[0]) / (probs_[1] - probs_[0]);
    return quants_[0] + (u - probs_[0]) * slope;
  }
  if (u >= probs_[last]) {
    const double slope = (quants_[last] - quants_[last - 1]) /
                         (probs_[last] - probs_[last - 1]);
    return quants_[last] + (u - probs_[last]) * slope;
  }
  const std::size_t segments = last;
  std::size_t k = static_cast<std::size_t>(u * static_cast<double>(segments));
  std::size_t seg = guide_[std::min(k, segments - 1)];
  while (probs_[seg + 1] < u) ++seg;
  const double w = (u - probs_[seg]) / (probs_[seg + 1] - probs_[seg]);
  return quants_[seg] + w * (quants_[seg + 1] - quants_[seg]);
}

namespace {

// Raw moments of a quantile function that is linear on [p0, p1].
struct SegmentMoments {
  double first = 0.0;
  double second = 0.0;
  void Add(double p0, double q0, double p1, double q1) {
    const double dp = p1 - p0;
    first += dp * 0.5 * (q0 + q1);
    second += dp * (q0 * q0 + q0 * q1 + q1 * q1) / 3.0;
  }
};

SegmentMoments TableMoments(std::span<const double> probs,
                            std::span<const double> quants) {
  SegmentMoments m;
  const std::size_t last = probs.size() - 1;
  const double left_slope = (quants[1] - quants[0]) / (probs[1] - probs[0]);
  m.Add(0.0, quants[0] - probs[0] * left_slope, probs[0], quants[0]);
  for (std::size_t k = 0; k < last; ++k) {
    m.Add(probs[k], quants[k], probs[k + 1], quants[k + 1]);
  }
  const double right_slope =
      (quants[last] - quants[last - 1]) / (probs[last] - probs[last - 1]);
  m.Add(probs[last], quants[last], 1.0,
        quants[last] + (1.0 - probs[last]) * right_slope);
  return m;
}

}  // namespace

double InverseCdfTable::Mean() const {
  return TableMoments(probs_, quants_).first;
}

double InverseCdfTable::Variance() const {
  const SegmentMoments m = TableMoments(probs_, quants_);
  return m.second - m.first * m.first;
}

std::vector<double> SampleStdCts(const InverseCdfTable& table, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<double> out(n);
  UniformStream stream(seed, 0);
  for (double& x : out) x = table.Quantile(stream.Next());
  return out;
}

std::vector<double> SampleStdCts(const CtsParams& p, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) {
    p.Validate();
    return {};
  }
  return SampleStdCts(InverseCdfTable::Build(p), n, seed);
}

}  // namespace deepcal::cts

#include "deepcal/garch_mcs.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "deepcal/error.h"
#include "deepcal/numerics.h"
#include "deepcal/rng.h"

namespace deepcal::garch {
namespace {

using NoPromotion =
    boost::math::policies::policy<boost::math::policies::promote_double<false>>;

double StandardNormalQuantile(double u) {
  static const boost::math::normal_distribution<double, NoPromotion> kStandard;
  return boost::math::quantile(kStandard, u);
}

}  // namespace

int StepsForTau(double tau) {
  return static_cast<int>(std::lround(tau * kBusinessDaysPerYear));
}

void PricingRequest::Validate() const {
  std::ostringstream msg;
  if (!(m > 0.0 && std::isfinite(m))) {
    msg << "moneyness must be positive, got " << m;
  } else if (!(tau > 0.0) || StepsForTau(tau) < 1) {
    msg << "tau must cover at least one business day, got " << tau;
  } else if (n_paths == 0) {
    msg << "path count must be >= 1";
  } else {
    return;
  }
  throw InvalidParams(msg.str());
}

PathSimulator::PathSimulator(const RiskNeutralParams& params,
                             SimulationOptions options)
    : params_(params), options_(options) {
  params_.Validate();
  if (params_.model == Model::kCts) {
    table_ = std::make_unique<cts::InverseCdfTable>(
        cts::InverseCdfTable::Build(params_.cts));
  }
}

PathSimulator::~PathSimulator() = default;
PathSimulator::PathSimulator(PathSimulator&&) noexcept = default;
PathSimulator& PathSimulator::operator=(PathSimulator&&) noexcept = default;

std::vector<double> PathSimulator::Simulate(int steps, std::size_t n,
                                            std::uint64_t seed) const {
  const int horizon[] = {steps};
  return std::move(SimulateHorizons(horizon, n, seed).front());
}

std::vector<std::vector<double>> PathSimulator::SimulateHorizons(
    std::span<const int> horizons, std::size_t n, std::uint64_t seed) const {
  if (horizons.empty() || horizons.front() < 1 ||
      !std::is_sorted(horizons.begin(), horizons.end(),
                      [](int a, int b) { return a <= b; })) {
    throw InvalidParams("horizons must be strictly increasing and >= 1");
  }
  const std::size_t n_h = horizons.size();
  std::vector<std::vector<double>> out(n_h, std::vector<double>(n));
  std::vector<unsigned char> failed(n, 0);

  const RiskNeutralParams& p = params_;
  const bool is_cts = p.model == Model::kCts;
  const double persistence = p.gamma / (p.psi + 1.0);
  const double sigma0_sq = p.sigma0 * p.sigma0;
  const bool constant = options_.constant_variance;
  const int last = horizons.back();
  const cts::InverseCdfTable* table = table_.get();
  const std::optional<cts::LogLaplaceFunction> laplace =
      is_cts ? std::optional<cts::LogLaplaceFunction>(p.cts) : std::nullopt;
  const double lambda_plus = is_cts ? p.cts.lambda_plus : 0.0;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto path = static_cast<std::size_t>(i);
    UniformStream stream(seed, path);
    double var = sigma0_sq;
    double eta_prev = 0.0;
    double acc = 0.0;
    std::size_t h = 0;
    for (int t = 1; t <= last; ++t) {
      if (constant) {
        var = sigma0_sq;
      } else {
        const double shock = eta_prev - p.theta;
        var = p.kappa + persistence * (p.psi * var * shock * shock + var);
      }
      const double sigma = std::sqrt(var);
      const double u = stream.Next();
      double eta;
      double w;
      if (is_cts) {
        if (!(sigma < lambda_plus)) {
          failed[path] = 1;
          break;
        }
        eta = table->Quantile(u);
        w = (*laplace)(sigma);
      } else {
        eta = StandardNormalQuantile(u);
        w = 0.5 * var;
      }
      acc += -w + sigma * eta;
      eta_prev = eta;
      if (t == horizons[h]) out[h++][path] = acc;
    }
  }

  const auto bad = std::find(failed.begin(), failed.end(), 1);
  if (bad != failed.end()) {
    const auto index = static_cast<std::size_t>(bad - failed.begin());
    std::ostringstream msg;
    msg << "sigma_t reached lambda_plus = " << lambda_plus << " on path "
        << index;
    throw DomainError(msg.str(), index);
  }
  return out;
}

std::vector<double> SimulatePaths(const RiskNeutralParams& params, int steps,
                                  std::size_t n, std::uint64_t seed,
                                  SimulationOptions options) {
  if (steps < 1) throw InvalidParams("step count must be >= 1");
  return PathSimulator(params, options).Simulate(steps, n, seed);
}

namespace {

// Mean and standard error of values[i] computed in a fixed order.
McsEstimate MeanAndError(std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  const double mean = PairwiseSum(values) / n;
  for (double& v : values) v = (v - mean) * (v - mean);
  const double var =
      values.size() > 1 ? PairwiseSum(values) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

McsEstimate EstimateFromGrowth(std::span<const double> growth, double m,
                               OptionKind kind) {
  std::vector<double> payoff(growth.size());
  for (std::size_t i = 0; i < growth.size(); ++i) {
    payoff[i] = kind == OptionKind::kCall ? std::max(growth[i] - m, 0.0)
                                          : std::max(m - growth[i], 0.0);
  }
  return MeanAndError(payoff);
}

}  // namespace

McsEstimate EstimateFromExponents(std::span<const double> exponents, double m,
                                  OptionKind kind) {
  if (exponents.empty()) throw InvalidParams("no paths to average");
  std::vector<double> growth(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    growth[i] = std::exp(exponents[i]);
  }
  return EstimateFromGrowth(growth, m, kind);
}

McsEstimate MeanGrowth(std::span<const double> exponents) {
  if (exponents.empty()) throw InvalidParams("no paths to average");
  std::vector<double> growth(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    growth[i] = std::exp(exponents[i]);
  }
  return MeanAndError(growth);
}

McsEstimate PriceMcs(const RiskNeutralParams& params,
                     const PricingRequest& request, SimulationOptions options) {
  request.Validate();
  const auto exponents = SimulatePaths(params, StepsForTau(request.tau),
                                       request.n_paths, request.seed, options);
  return EstimateFromExponents(exponents, request.m, request.kind);
}

std::vector<McsEstimate> PriceMcsBatch(const PathSimulator& simulator,
                                       std::span<const PricingPoint> points,
                                       std::size_t n_paths,
                                       std::uint64_t seed) {
  if (points.empty()) return {};
  std::map<int, std::size_t> horizon_index;
  for (const auto& pt : points) {
    PricingRequest{pt.m, pt.tau, n_paths, seed, pt.kind}.Validate();
    horizon_index.emplace(StepsForTau(pt.tau), 0);
  }
  std::vector<int> horizons;
  for (auto& [steps, idx] : horizon_index) {
    idx = horizons.size();
    horizons.push_back(steps);
  }
  auto growth = simulator.SimulateHorizons(horizons, n_paths, seed);
  for (auto& row : growth) {
    for (double& x : row) x = std::exp(x);
  }
  std::vector<McsEstimate> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    out[i] = EstimateFromGrowth(growth[horizon_index.at(StepsForTau(pt.tau))],
                                pt.m, pt.kind);
  }
  return out;
}

}  // namespace deepcal::garch

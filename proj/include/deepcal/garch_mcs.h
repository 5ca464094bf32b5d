#ifndef DEEPCAL_GARCH_MCS_H_
#define DEEPCAL_GARCH_MCS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "deepcal/cts.h"
#include "deepcal/model.h"

namespace deepcal::garch {

inline constexpr std::size_t kDefaultPaths = 20000;
inline constexpr double kBusinessDaysPerYear = 250.0;

// Number of daily steps for a year fraction: round(250 tau).
int StepsForTau(double tau);

struct PricingRequest {
  double m = 1.0;    // K exp(-r tau) / S0
  double tau = 0.1;  // year fraction, 250 business days per year
  std::size_t n_paths = kDefaultPaths;
  std::uint64_t seed = 0;
  OptionKind kind = OptionKind::kCall;

  // m > 0, 250 tau rounds to an integer >= 1, n_paths >= 1.
  void Validate() const;
};

struct SimulationOptions {
  // Test hook: hold sigma_t at sigma0 on every step instead of running the
  // GARCH recursion. Turns Duan's model into Black-Scholes.
  bool constant_variance = false;
};

// Monte Carlo price in units of S0, with its standard error.
struct McsEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Simulates risk-neutral paths of one parameter set. Path n draws its
// innovations from the uniform stream keyed (seed, n), so the exponent of a
// path does not depend on the path count, the horizon, or the worker count.
class PathSimulator {
 public:
  // Builds the stdCTS inverse-CDF table for the CTS model (may throw
  // InversionFailure).
  explicit PathSimulator(const RiskNeutralParams& params,
                         SimulationOptions options = {});
  ~PathSimulator();
  PathSimulator(PathSimulator&&) noexcept;
  PathSimulator& operator=(PathSimulator&&) noexcept;

  // Sum over t = 1..steps of (-w_t + sigma_t eta_t) for each of n paths.
  // Throws DomainError (smallest failing path index) if a CTS path reaches
  // sigma_t >= lambda_plus.
  std::vector<double> Simulate(int steps, std::size_t n,
                               std::uint64_t seed) const;

  // Same sweep, recording the running exponent at each horizon. `horizons`
  // must be strictly increasing and >= 1. Result[h][n].
  std::vector<std::vector<double>> SimulateHorizons(
      std::span<const int> horizons, std::size_t n, std::uint64_t seed) const;

  const RiskNeutralParams& params() const { return params_; }

 private:
  RiskNeutralParams params_;
  SimulationOptions options_;
  std::unique_ptr<cts::InverseCdfTable> table_;
};

std::vector<double> SimulatePaths(const RiskNeutralParams& params, int steps,
                                  std::size_t n, std::uint64_t seed,
                                  SimulationOptions options = {});

// mean(max(e^x - m, 0)) for calls, mean(max(m - e^x, 0)) for puts.
McsEstimate EstimateFromExponents(std::span<const double> exponents, double m,
                                  OptionKind kind);
// mean(e^x) with its standard error.
McsEstimate MeanGrowth(std::span<const double> exponents);

McsEstimate PriceMcs(const RiskNeutralParams& params,
                     const PricingRequest& request,
                     SimulationOptions options = {});

// One (m, tau, kind) of a batch priced on common random numbers.
struct PricingPoint {
  double m = 1.0;
  double tau = 0.1;
  OptionKind kind = OptionKind::kCall;
};

// Prices every point from a single sweep of n paths up to the longest
// maturity. Equivalent to calling PriceMcs per point with the same seed.
std::vector<McsEstimate> PriceMcsBatch(const PathSimulator& simulator,
                                       std::span<const PricingPoint> points,
                                       std::size_t n_paths,
                                       std::uint64_t seed);

}  // namespace deepcal::garch

#endif  // DEEPCAL_GARCH_MCS_H_

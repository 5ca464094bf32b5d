#ifndef DEEPCAL_QUASIRANDOM_H_
#define DEEPCAL_QUASIRANDOM_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "deepcal/model.h"

namespace deepcal::quasirandom {

// Radical inverse of `index` (>= 1) in `base` (>= 2).
double Halton(std::uint64_t index, unsigned base);

// The first ten primes; coordinate j of a Halton point uses kPrimes[j].
inline constexpr std::array<unsigned, 10> kPrimes = {2,  3,  5,  7,  11,
                                                     13, 17, 19, 23, 29};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Sampling box over the model inputs, in input order (m, tau, kappa, psi,
// gamma, theta, sigma0, alpha). lambda_plus and lambda_minus are drawn as
// tan(u pi / 2) + 0.1 with u ranging over u_lambda_plus / u_lambda_minus.
struct ParameterRanges {
  Interval m{0.5, 1.5};
  Interval tau{0.4, 1.0};
  Interval kappa{0.0, 1e-5};
  Interval psi{0.1, 0.4};
  Interval gamma{0.5, 0.9999};
  Interval theta{0.0, 0.8};
  Interval sigma0{1e-6, 0.04};
  Interval alpha{0.01, 1.999};
  Interval u_lambda_plus{0.0, 1.0};
  Interval u_lambda_minus{0.0, 1.0};

  // The literal input box of the original study.
  static ParameterRanges Table1();
  // Same box with tau widened to [0.02, 1] so that 5..90 business-day
  // maturities fall inside it. This is the default profile.
  static ParameterRanges Calibration();
  // Profile by name: "table1" or "calibration". Throws InvalidParams.
  static ParameterRanges Profile(std::string_view name);

  // Box coordinates in input order; index 8 and 9 are the lambda seeds.
  std::array<Interval, 10> Coordinates() const;
  static ParameterRanges FromCoordinates(const std::array<Interval, 10>& c);

  friend bool operator==(const ParameterRanges&,
                         const ParameterRanges&) = default;
};

inline constexpr double kLambdaOffset = 0.1;

// lambda = tan(u pi / 2) + 0.1.
double LambdaFromUniform(double u);
// Inverse of LambdaFromUniform.
double UniformFromLambda(double lambda);

// n Halton points starting at sequence position start_index (1-based), mapped
// into the box. Dimension 7 for Duan, 10 for CTS.
std::vector<ModelInput> SampleParameterSpace(Model model, std::size_t n,
                                             const ParameterRanges& ranges,
                                             std::uint64_t start_index = 1);

// Reads `key = lower, upper` lines (keys as in Coordinates order: m, tau,
// kappa, psi, gamma, theta, sigma0, alpha, u_lambda_plus, u_lambda_minus).
// An optional `profile = name` line selects the base profile; it must come
// first. '#' starts a comment. Throws ParseError.
ParameterRanges ReadRanges(std::istream& in);
ParameterRanges LoadRanges(const std::string& path);
void WriteRanges(std::ostream& out, const ParameterRanges& ranges);

inline constexpr std::array<std::string_view, 10> kRangeKeys = {
    "m",     "tau",    "kappa", "psi",           "gamma",
    "theta", "sigma0", "alpha", "u_lambda_plus", "u_lambda_minus"};

}  // namespace deepcal::quasirandom

#endif  // DEEPCAL_QUASIRANDOM_H_

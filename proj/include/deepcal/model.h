#ifndef DEEPCAL_MODEL_H_
#define DEEPCAL_MODEL_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "deepcal/cts.h"

namespace deepcal {

enum class Model { kDuan, kCts };
enum class OptionKind { kCall, kPut };

std::string_view ToString(Model model);
std::string_view ToString(OptionKind kind);
// Accept "duan"/"cts" and "call"/"put" (also "C"/"P"), case-insensitive.
Model ParseModel(std::string_view text);
OptionKind ParseOptionKind(std::string_view text);

// Number of network inputs: (m, tau) plus the model parameters.
std::size_t InputDimension(Model model);

// Risk-neutral GARCH parameters in the (psi, gamma) parameterization:
// psi = xi / zeta and gamma = xi + zeta.
struct RiskNeutralParams {
  Model model = Model::kDuan;
  double kappa = 0.0;   // variance intercept, daily variance units
  double psi = 0.2;     // xi / zeta
  double gamma = 0.9;   // xi + zeta (persistence)
  double theta = 0.0;   // market price of risk
  double sigma0 = 0.01; // initial daily volatility
  cts::CtsParams cts;   // innovation law, CTS model only

  double xi() const { return gamma * psi / (psi + 1.0); }
  double zeta() const { return gamma / (psi + 1.0); }
  static RiskNeutralParams FromXiZeta(Model model, double kappa, double xi,
                                      double zeta, double theta, double sigma0,
                                      cts::CtsParams cts = {});

  // kappa >= 0, psi > 0, 0 <= gamma < 1, theta >= 0, sigma0 > 0, plus
  // CtsParams::Validate for the CTS model. gamma == 0 is admitted (the
  // recursion then collapses to sqrt(kappa)). Throws InvalidParams.
  void Validate() const;

  friend bool operator==(const RiskNeutralParams&,
                         const RiskNeutralParams&) = default;
};

// One surrogate input: moneyness, year fraction and the model parameters.
struct ModelInput {
  double m = 1.0;
  double tau = 0.1;
  RiskNeutralParams params;

  // (m, tau, kappa, psi, gamma, theta, sigma0 [, alpha, lambda+, lambda-]).
  std::vector<double> ToVector() const;
  static ModelInput FromVector(Model model, std::span<const double> values);
};

// Names of the input columns, in order.
std::vector<std::string_view> InputNames(Model model);

}  // namespace deepcal

#endif  // DEEPCAL_MODEL_H_

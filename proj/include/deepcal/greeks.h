#ifndef DEEPCAL_GREEKS_H_
#define DEEPCAL_GREEKS_H_

#include <iosfwd>

#include "deepcal/calibration.h"
#include "deepcal/model.h"

namespace deepcal::greeks {

struct GreeksInput {
  double spot = 100.0;
  double strike = 100.0;
  double tau = 0.1;   // years
  double rate = 0.0;  // continuous, per year
  OptionKind kind = OptionKind::kCall;
  RiskNeutralParams params;
};

// Theta is dV/dtau per year: the change in value for a longer maturity, not
// the market's time-decay sign.
struct GreeksReport {
  double price = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  double rho = 0.0;
  double h_spot = 0.0;
  double h_tau = 0.0;
  double h_rate = 0.0;
};

struct BumpSizes {
  double spot_relative = 1e-4;  // h_S = spot_relative * S0
  double tau = 1.0 / 250.0;
  double rate = 1e-4;
};

// V = S0 exp(F_kind(K exp(-r tau) / S0, tau, params)).
double DollarPrice(const GreeksInput& in, const calib::Pricer& pricer);

// Central differences of V; Gamma is the second central difference in S0.
GreeksReport ComputeGreeks(const GreeksInput& in, const calib::Pricer& pricer,
                           const BumpSizes& bumps = {});

void WriteGreeksHeader(std::ostream& out);
void WriteGreeksRow(std::ostream& out, const GreeksInput& in,
                    const GreeksReport& report, std::string_view model);

}  // namespace deepcal::greeks

#endif  // DEEPCAL_GREEKS_H_

#ifndef DEEPCAL_BLACK_SCHOLES_H_
#define DEEPCAL_BLACK_SCHOLES_H_

#include "deepcal/model.h"

namespace deepcal::bs {

// Black-Scholes price of a European option. `vol` is annualized and `tau`
// in years; r is the continuous annual rate.
double Price(OptionKind kind, double spot, double strike, double tau, double r,
             double vol);

// Same in units of S0 with m = K exp(-r tau) / S0 and total volatility
// s = vol sqrt(tau).
double RelativePrice(OptionKind kind, double m, double total_vol);

inline constexpr double kMinImpliedVol = 1e-4;
inline constexpr double kMaxImpliedVol = 5.0;

// Bisection on vol in [kMinImpliedVol, kMaxImpliedVol] to |price gap| or
// bracket width below 1e-12. Throws InvalidParams when the price is outside
// the range spanned by the bracket.
double ImpliedVol(OptionKind kind, double price, double spot, double strike,
                  double tau, double r);

}  // namespace deepcal::bs

#endif  // DEEPCAL_BLACK_SCHOLES_H_

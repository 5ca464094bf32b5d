#include "deepcal/black_scholes.h"

#include <cmath>
#include <sstream>

#include "deepcal/error.h"

namespace deepcal::bs {
namespace {

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double RelativePrice(OptionKind kind, double m, double total_vol) {
  if (!(m > 0.0) || !(total_vol >= 0.0)) {
    throw InvalidParams("Black-Scholes needs m > 0 and volatility >= 0");
  }
  if (total_vol == 0.0) {
    return kind == OptionKind::kCall ? std::max(1.0 - m, 0.0)
                                     : std::max(m - 1.0, 0.0);
  }
  const double d1 = -std::log(m) / total_vol + 0.5 * total_vol;
  const double d2 = d1 - total_vol;
  if (kind == OptionKind::kCall) return NormalCdf(d1) - m * NormalCdf(d2);
  return m * NormalCdf(-d2) - NormalCdf(-d1);
}

double Price(OptionKind kind, double spot, double strike, double tau, double r,
             double vol) {
  if (!(spot > 0.0) || !(strike > 0.0) || !(tau > 0.0)) {
    throw InvalidParams("Black-Scholes needs positive spot, strike and tau");
  }
  const double m = strike * std::exp(-r * tau) / spot;
  return spot * RelativePrice(kind, m, vol * std::sqrt(tau));
}

double ImpliedVol(OptionKind kind, double price, double spot, double strike,
                  double tau, double r) {
  double lo = kMinImpliedVol;
  double hi = kMaxImpliedVol;
  const double p_lo = Price(kind, spot, strike, tau, r, lo);
  const double p_hi = Price(kind, spot, strike, tau, r, hi);
  if (!(price >= p_lo && price <= p_hi)) {
    std::ostringstream msg;
    msg << "price " << price << " is outside the Black-Scholes range ["
        << p_lo << ", " << p_hi << "] for vol in [" << lo << ", " << hi << "]";
    throw InvalidParams(msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double p = Price(kind, spot, strike, tau, r, mid);
    if (p == price) return mid;
    if (p < price) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace deepcal::bs

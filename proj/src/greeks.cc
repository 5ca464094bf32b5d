#include "deepcal/greeks.h"

#include <array>
#include <cmath>
#include <ostream>

#include "deepcal/error.h"
#include "deepcal/text.h"

namespace deepcal::greeks {
namespace {

garch::PricingPoint Point(double spot, double strike, double tau, double rate,
                          OptionKind kind) {
  return {strike * std::exp(-rate * tau) / spot, tau, kind};
}

void Check(const GreeksInput& in) {
  if (!(in.spot > 0.0) || !(in.strike > 0.0) || !(in.tau > 0.0)) {
    throw InvalidParams("Greeks need positive spot, strike and tau");
  }
}

}  // namespace

double DollarPrice(const GreeksInput& in, const calib::Pricer& pricer) {
  Check(in);
  const auto pt = Point(in.spot, in.strike, in.tau, in.rate, in.kind);
  return in.spot * std::exp(pricer.LogPrices(in.params, std::span(&pt, 1))[0]);
}

GreeksReport ComputeGreeks(const GreeksInput& in, const calib::Pricer& pricer,
                           const BumpSizes& bumps) {
  Check(in);
  const double hs = bumps.spot_relative * in.spot;
  const double ht = bumps.tau;
  const double hr = bumps.rate;
  if (!(hs > 0.0) || !(ht > 0.0) || !(hr > 0.0) || !(in.tau - ht > 0.0)) {
    throw InvalidParams("bump sizes must be positive and tau must exceed the "
                        "maturity bump");
  }
  const std::array<double, 7> spots = {in.spot,      in.spot + hs, in.spot - hs,
                                       in.spot,      in.spot,      in.spot,
                                       in.spot};
  const std::array<double, 7> taus = {in.tau, in.tau,      in.tau,     in.tau + ht,
                                      in.tau - ht, in.tau, in.tau};
  const std::array<double, 7> rates = {in.rate, in.rate, in.rate,     in.rate,
                                       in.rate, in.rate + hr, in.rate - hr};
  std::array<garch::PricingPoint, 7> points;
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i] = Point(spots[i], in.strike, taus[i], rates[i], in.kind);
  }
  const auto log_prices = pricer.LogPrices(in.params, points);
  std::array<double, 7> v;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = spots[i] * std::exp(log_prices[i]);
  }
  GreeksReport g;
  g.price = v[0];
  g.delta = (v[1] - v[2]) / (2.0 * hs);
  g.gamma = (v[1] - 2.0 * v[0] + v[2]) / (hs * hs);
  g.theta = (v[3] - v[4]) / (2.0 * ht);
  g.rho = (v[5] - v[6]) / (2.0 * hr);
  g.h_spot = hs;
  g.h_tau = ht;
  g.h_rate = hr;
  return g;
}

void WriteGreeksHeader(std::ostream& out) {
  out << "kind,S0,r,K,tau,model,price,delta,gamma,theta,rho\n";
}

void WriteGreeksRow(std::ostream& out, const GreeksInput& in,
                    const GreeksReport& g, std::string_view model) {
  out << ToString(in.kind) << ',' << FormatDouble(in.spot) << ','
      << FormatDouble(in.rate) << ',' << FormatDouble(in.strike) << ','
      << FormatDouble(in.tau) << ',' << model << ',' << FormatDouble(g.price)
      << ',' << FormatDouble(g.delta) << ',' << FormatDouble(g.gamma) << ','
      << FormatDouble(g.theta) << ',' << FormatDouble(g.rho) << '\n';
}

}  // namespace deepcal::greeks

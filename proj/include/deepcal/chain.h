#ifndef DEEPCAL_CHAIN_H_
#define DEEPCAL_CHAIN_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepcal/model.h"

namespace deepcal::calib {

inline constexpr int kMinMaturityDays = 7;
inline constexpr int kMaxMaturityDays = 90;

struct OptionQuote {
  double strike = 0.0;
  int maturity_days = 0;  // business days
  OptionKind kind = OptionKind::kCall;
  double bid = 0.0;
  double ask = 0.0;
  std::size_t line = 0;  // source line, 0 when built in memory

  double mid() const { return 0.5 * (bid + ask); }
  double tau() const;  // maturity_days / 250

  friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

struct OptionChain {
  std::string date;
  double spot = 0.0;
  double rate = 0.0;  // continuous, per year
  std::vector<OptionQuote> quotes;

  // K exp(-r tau) / S0.
  double Moneyness(const OptionQuote& q) const;
  // log(mid / S0).
  double MarketLogPrice(const OptionQuote& q) const;

  friend bool operator==(const OptionChain&, const OptionChain&) = default;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t zero_bid_or_ask = 0;
  std::size_t crossed = 0;  // ask < bid
  std::size_t maturity = 0;
  std::size_t in_the_money = 0;
  std::size_t mid_at_or_above_spot = 0;

  std::size_t dropped() const {
    return zero_bid_or_ask + crossed + maturity + in_the_money +
           mid_at_or_above_spot;
  }
};

// Rows of `date,spot,rate,strike,maturity_days,kind,bid,ask` grouped by date
// in order of first appearance, unfiltered. Throws ParseError (with line).
std::vector<OptionChain> ParseChains(std::istream& in);

// Keeps quotes with bid > 0, ask >= bid, 7 <= T <= 90 and out of the money:
// calls with m >= 1, puts with m < 1. Quotes with mid >= S0 are dropped too.
OptionChain FilterChain(const OptionChain& chain, IngestStats* stats = nullptr);

// Parse and filter; chains left without quotes are dropped. Throws
// EmptyChain if nothing survives.
std::vector<OptionChain> IngestChains(std::istream& in,
                                      IngestStats* stats = nullptr);
std::vector<OptionChain> LoadChains(const std::string& path,
                                    IngestStats* stats = nullptr);

void WriteChains(std::ostream& out, const std::vector<OptionChain>& chains);
void SaveChains(const std::string& path, const std::vector<OptionChain>& chains);

}  // namespace deepcal::calib

#endif  // DEEPCAL_CHAIN_H_

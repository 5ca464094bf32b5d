#include "deepcal/chain.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "deepcal/error.h"
#include "deepcal/garch_mcs.h"
#include "deepcal/text.h"

namespace deepcal::calib {
namespace {

constexpr std::string_view kHeader =
    "date,spot,rate,strike,maturity_days,kind,bid,ask";

double Number(std::string_view field, std::string_view name, std::size_t line) {
  const auto v = ParseDouble(field);
  if (!v || !std::isfinite(*v)) {
    throw ParseError("bad " + std::string(name) + " '" + std::string(field) + "'",
                     line);
  }
  return *v;
}

}  // namespace

double OptionQuote::tau() const {
  return maturity_days / garch::kBusinessDaysPerYear;
}

double OptionChain::Moneyness(const OptionQuote& q) const {
  return q.strike * std::exp(-rate * q.tau()) / spot;
}

double OptionChain::MarketLogPrice(const OptionQuote& q) const {
  return std::log(q.mid() / spot);
}

std::vector<OptionChain> ParseChains(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<OptionChain> chains;
  std::map<std::string, std::size_t> by_date;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = Trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      std::string normalized;
      for (auto f : SplitCsv(text)) {
        if (!normalized.empty()) normalized += ',';
        normalized += f;
      }
      if (normalized != kHeader) {
        throw ParseError("expected header '" + std::string(kHeader) + "'",
                         line_no);
      }
      header_seen = true;
      continue;
    }
    const auto f = SplitCsv(text);
    if (f.size() != 8) {
      throw ParseError("expected 8 fields, got " + std::to_string(f.size()),
                       line_no);
    }
    const std::string date(f[0]);
    const double spot = Number(f[1], "spot", line_no);
    const double rate = Number(f[2], "rate", line_no);
    OptionQuote q;
    q.line = line_no;
    q.strike = Number(f[3], "strike", line_no);
    const double days = Number(f[4], "maturity_days", line_no);
    if (days != std::floor(days) || std::abs(days) > 1e6) {
      throw ParseError("maturity_days must be an integer", line_no);
    }
    q.maturity_days = static_cast<int>(days);
    try {
      q.kind = ParseOptionKind(f[5]);
    } catch (const InvalidParams& e) {
      throw ParseError(e.what(), line_no);
    }
    q.bid = Number(f[6], "bid", line_no);
    q.ask = Number(f[7], "ask", line_no);
    if (!(spot > 0.0)) throw ParseError("spot must be positive", line_no);
    if (!(q.strike > 0.0)) throw ParseError("strike must be positive", line_no);

    auto [it, inserted] = by_date.emplace(date, chains.size());
    if (inserted) {
      chains.push_back({date, spot, rate, {}});
    } else {
      const OptionChain& c = chains[it->second];
      if (c.spot != spot || c.rate != rate) {
        throw ParseError("spot or rate differs from earlier rows of " + date,
                         line_no);
      }
    }
    chains[it->second].quotes.push_back(q);
  }
  if (!header_seen) throw ParseError("missing header", line_no);
  return chains;
}

OptionChain FilterChain(const OptionChain& chain, IngestStats* stats) {
  IngestStats local;
  IngestStats& s = stats ? *stats : local;
  OptionChain out{chain.date, chain.spot, chain.rate, {}};
  for (const auto& q : chain.quotes) {
    ++s.rows;
    if (!(q.bid > 0.0) || !(q.ask > 0.0)) {
      ++s.zero_bid_or_ask;
    } else if (q.ask < q.bid) {
      ++s.crossed;
    } else if (q.maturity_days < kMinMaturityDays ||
               q.maturity_days > kMaxMaturityDays) {
      ++s.maturity;
    } else if ((chain.Moneyness(q) >= 1.0) != (q.kind == OptionKind::kCall)) {
      ++s.in_the_money;
    } else if (!(q.mid() < chain.spot)) {
      ++s.mid_at_or_above_spot;
    } else {
      out.quotes.push_back(q);
    }
  }
  return out;
}

std::vector<OptionChain> IngestChains(std::istream& in, IngestStats* stats) {
  std::vector<OptionChain> out;
  for (const auto& raw : ParseChains(in)) {
    auto filtered = FilterChain(raw, stats);
    if (!filtered.quotes.empty()) out.push_back(std::move(filtered));
  }
  if (out.empty()) throw EmptyChain("no quotes left after filtering");
  return out;
}

std::vector<OptionChain> LoadChains(const std::string& path,
                                    IngestStats* stats) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open '" + path + "'");
  return IngestChains(in, stats);
}

void WriteChains(std::ostream& out, const std::vector<OptionChain>& chains) {
  out << kHeader << '\n';
  for (const auto& c : chains) {
    for (const auto& q : c.quotes) {
      out << c.date << ',' << FormatDouble(c.spot) << ','
          << FormatDouble(c.rate) << ',' << FormatDouble(q.strike) << ','
          << q.maturity_days << ',' << ToString(q.kind) << ','
          << FormatDouble(q.bid) << ',' << FormatDouble(q.ask) << '\n';
    }
  }
}

void SaveChains(const std::string& path,
                const std::vector<OptionChain>& chains) {
  std::ofstream out(path);
  if (!out) throw MalformedFile("cannot write '" + path + "'");
  WriteChains(out, chains);
}

}  // namespace deepcal::calib

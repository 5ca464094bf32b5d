#include "deepcal/dataset.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "deepcal/error.h"
#include "deepcal/garch_mcs.h"
#include "deepcal/rng.h"
#include "deepcal/text.h"

namespace deepcal::data {
namespace {

using nlohmann::json;
using quasirandom::Interval;
using quasirandom::ParameterRanges;

constexpr std::string_view kFormat = "deepcal-training-set";
constexpr int kVersion = 1;

enum class Outcome : unsigned char { kOk, kDomain, kInversion, kZeroPrice };

json RangesToJson(const ParameterRanges& r) {
  json j = json::object();
  const auto coords = r.Coordinates();
  for (std::size_t k = 0; k < coords.size(); ++k) {
    j[std::string(quasirandom::kRangeKeys[k])] = {coords[k].lower,
                                                   coords[k].upper};
  }
  return j;
}

ParameterRanges RangesFromJson(const json& j) {
  std::array<Interval, 10> coords;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const auto& pair = j.at(std::string(quasirandom::kRangeKeys[k]));
    coords[k] = {pair.at(0).get<double>(), pair.at(1).get<double>()};
  }
  return ParameterRanges::FromCoordinates(coords);
}

}  // namespace

std::uint64_t GenerationConfig::McSeed() const {
  return DeriveSeed(seed, SeedPurpose::kMonteCarloPaths);
}

double TrainingSet::skip_rate() const {
  if (config.n_samples == 0) return 0.0;
  return static_cast<double>(skipped.total()) /
         static_cast<double>(config.n_samples);
}

TrainingSet GenerateTrainingSet(const GenerationConfig& config) {
  if (config.n_samples == 0) throw InvalidParams("n_samples must be >= 1");
  if (config.paths_per_price == 0) {
    throw InvalidParams("paths_per_price must be >= 1");
  }
  const auto inputs = quasirandom::SampleParameterSpace(
      config.model, config.n_samples, config.ranges, config.start_index);
  const std::size_t n = inputs.size();
  const std::uint64_t mc_seed = config.McSeed();

  std::vector<double> targets(n, 0.0);
  std::vector<Outcome> outcome(n, Outcome::kOk);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const ModelInput& in = inputs[k];
    try {
      const garch::PricingRequest request{in.m, in.tau, config.paths_per_price,
                                          mc_seed, config.kind};
      const double price = garch::PriceMcs(in.params, request).value;
      if (price > 0.0 && std::isfinite(std::log(price))) {
        targets[k] = std::log(price);
      } else {
        outcome[k] = Outcome::kZeroPrice;
      }
    } catch (const DomainError&) {
      outcome[k] = Outcome::kDomain;
    } catch (const InversionFailure&) {
      outcome[k] = Outcome::kInversion;
    }
  }

  TrainingSet set;
  set.config = config;
  const std::size_t dim = InputDimension(config.model);
  std::vector<double> position_sum(dim, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    switch (outcome[k]) {
      case Outcome::kOk:
        set.samples.push_back({inputs[k].ToVector(), targets[k]});
        continue;
      case Outcome::kDomain:
        ++set.skipped.domain;
        break;
      case Outcome::kInversion:
        ++set.skipped.inversion;
        break;
      case Outcome::kZeroPrice:
        ++set.skipped.zero_price;
        break;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      position_sum[j] +=
          quasirandom::Halton(config.start_index + k, quasirandom::kPrimes[j]);
    }
  }
  if (set.skipped.total() > 0) {
    set.skipped.mean_position.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      set.skipped.mean_position[j] =
          position_sum[j] / static_cast<double>(set.skipped.total());
    }
  }
  return set;
}

std::optional<std::string> SkipWarning(const TrainingSet& set) {
  if (set.skip_rate() <= kSkipWarningRate) return std::nullopt;
  std::ostringstream msg;
  msg << "skipped " << set.skipped.total() << " of " << set.config.n_samples
      << " parameter vectors (" << set.skipped.domain << " domain, "
      << set.skipped.inversion << " inversion, " << set.skipped.zero_price
      << " zero price)";
  const auto names = InputNames(set.config.model);
  std::string corner;
  for (std::size_t j = 0; j < set.skipped.mean_position.size(); ++j) {
    const double pos = set.skipped.mean_position[j];
    // A uniform spread would average 0.5.
    if (std::abs(pos - 0.5) < 0.15) continue;
    if (!corner.empty()) corner += ", ";
    corner += std::string(names[j]) + (pos > 0.5 ? " high" : " low");
  }
  if (!corner.empty()) msg << "; concentrated at " << corner;
  return msg.str();
}

void WriteTrainingSet(std::ostream& out, const TrainingSet& set) {
  const GenerationConfig& c = set.config;
  json meta = {
      {"format", kFormat},
      {"version", kVersion},
      {"model", ToString(c.model)},
      {"kind", ToString(c.kind)},
      {"profile", c.profile},
      {"ranges", RangesToJson(c.ranges)},
      {"n_requested", c.n_samples},
      {"paths_per_price", c.paths_per_price},
      {"seed", c.seed},
      {"mc_seed", c.McSeed()},
      {"start_index", c.start_index},
      {"skipped",
       {{"domain", set.skipped.domain},
        {"inversion", set.skipped.inversion},
        {"zero_price", set.skipped.zero_price},
        {"mean_position", set.skipped.mean_position}}},
  };
  out << "# " << meta.dump() << '\n';
  for (auto name : InputNames(c.model)) out << name << ',';
  out << "v\n";
  for (const auto& s : set.samples) {
    for (double x : s.input) out << FormatDouble(x) << ',';
    out << FormatDouble(s.target) << '\n';
  }
}

TrainingSet ReadTrainingSet(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw MalformedFile("training set must start with a '# {metadata}' line");
  }
  json meta;
  try {
    meta = json::parse(line.substr(2));
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("bad training-set metadata: ") + e.what());
  }
  TrainingSet set;
  try {
    if (meta.at("format").get<std::string>() != kFormat) {
      throw MalformedFile("not a training-set file");
    }
    if (meta.at("version").get<int>() != kVersion) {
      throw UnsupportedVersion("training-set version " +
                               meta.at("version").dump() + " not supported");
    }
    GenerationConfig& c = set.config;
    c.model = ParseModel(meta.at("model").get<std::string>());
    c.kind = ParseOptionKind(meta.at("kind").get<std::string>());
    c.profile = meta.at("profile").get<std::string>();
    c.ranges = RangesFromJson(meta.at("ranges"));
    c.n_samples = meta.at("n_requested").get<std::size_t>();
    c.paths_per_price = meta.at("paths_per_price").get<std::size_t>();
    c.seed = meta.at("seed").get<std::uint64_t>();
    c.start_index = meta.at("start_index").get<std::uint64_t>();
    const auto& sk = meta.at("skipped");
    set.skipped.domain = sk.at("domain").get<std::size_t>();
    set.skipped.inversion = sk.at("inversion").get<std::size_t>();
    set.skipped.zero_price = sk.at("zero_price").get<std::size_t>();
    set.skipped.mean_position =
        sk.at("mean_position").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("bad training-set metadata: ") + e.what());
  } catch (const InvalidParams& e) {
    throw MalformedFile(std::string("bad training-set metadata: ") + e.what());
  }

  const std::size_t dim = set.dimension();
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw MalformedFile("missing column header");
  ++line_no;
  if (SplitCsv(line).size() != dim + 1) {
    throw ParseError("column header does not match the model dimension",
                     line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " fields",
                       line_no);
    }
    TrainingSample s;
    s.input.resize(dim);
    for (std::size_t j = 0; j <= dim; ++j) {
      const auto v = ParseDouble(fields[j]);
      if (!v) throw ParseError("bad number '" + std::string(fields[j]) + "'", line_no);
      if (j < dim) {
        s.input[j] = *v;
      } else {
        s.target = *v;
      }
    }
    set.samples.push_back(std::move(s));
  }
  return set;
}

void SaveTrainingSet(const std::string& path, const TrainingSet& set) {
  std::ofstream out(path);
  if (!out) throw MalformedFile("cannot write '" + path + "'");
  WriteTrainingSet(out, set);
  if (!out) throw MalformedFile("write to '" + path + "' failed");
}

TrainingSet LoadTrainingSet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open '" + path + "'");
  return ReadTrainingSet(in);
}

}  // namespace deepcal::data

#include "deepcal/quasirandom.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "deepcal/error.h"

namespace deepcal::quasirandom {

double Halton(std::uint64_t index, unsigned base) {
  if (index == 0 || base < 2) {
    throw InvalidParams("Halton needs index >= 1 and base >= 2");
  }
  // Reverse the digits into an integer numerator so that the result carries
  // a single rounding.
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  std::uint64_t i = index;
  while (i > 0) {
    if (denominator > std::numeric_limits<std::uint64_t>::max() / base) break;
    numerator = numerator * base + i % base;
    denominator *= base;
    i /= base;
  }
  if (i == 0) {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  double result = 0.0;
  double f = 1.0 / base;
  for (i = index; i > 0; i /= base) {
    result += f * static_cast<double>(i % base);
    f /= base;
  }
  return result;
}

ParameterRanges ParameterRanges::Table1() { return ParameterRanges{}; }

ParameterRanges ParameterRanges::Calibration() {
  ParameterRanges r;
  r.tau = {0.02, 1.0};
  return r;
}

ParameterRanges ParameterRanges::Profile(std::string_view name) {
  if (name == "table1") return Table1();
  if (name == "calibration") return Calibration();
  throw InvalidParams("unknown ranges profile '" + std::string(name) + "'");
}

std::array<Interval, 10> ParameterRanges::Coordinates() const {
  return {m,     tau,    kappa, psi,           gamma,
          theta, sigma0, alpha, u_lambda_plus, u_lambda_minus};
}

ParameterRanges ParameterRanges::FromCoordinates(
    const std::array<Interval, 10>& c) {
  ParameterRanges r;
  r.m = c[0];
  r.tau = c[1];
  r.kappa = c[2];
  r.psi = c[3];
  r.gamma = c[4];
  r.theta = c[5];
  r.sigma0 = c[6];
  r.alpha = c[7];
  r.u_lambda_plus = c[8];
  r.u_lambda_minus = c[9];
  return r;
}

double LambdaFromUniform(double u) {
  return std::tan(u * std::numbers::pi / 2.0) + kLambdaOffset;
}

double UniformFromLambda(double lambda) {
  return 2.0 / std::numbers::pi * std::atan(lambda - kLambdaOffset);
}

std::vector<ModelInput> SampleParameterSpace(Model model, std::size_t n,
                                             const ParameterRanges& ranges,
                                             std::uint64_t start_index) {
  if (n == 0) throw InvalidParams("sample count must be >= 1");
  if (start_index == 0) throw InvalidParams("Halton start index is 1-based");
  const std::size_t dim = InputDimension(model);
  const auto box = ranges.Coordinates();
  std::vector<ModelInput> out;
  out.reserve(n);
  std::vector<double> point(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t index = start_index + i;
    for (std::size_t j = 0; j < dim; ++j) {
      const double u = Halton(index, kPrimes[j]);
      point[j] = box[j].lower + u * (box[j].upper - box[j].lower);
    }
    if (model == Model::kCts) {
      point[8] = LambdaFromUniform(point[8]);
      point[9] = LambdaFromUniform(point[9]);
    }
    out.push_back(ModelInput::FromVector(model, point));
  }
  return out;
}

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double ParseNumber(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + text + "'", line);
  }
  if (used != text.size()) throw ParseError("not a number: '" + text + "'", line);
  return v;
}

}  // namespace

ParameterRanges ReadRanges(std::istream& in) {
  ParameterRanges ranges = ParameterRanges::Calibration();
  auto coords = ranges.Coordinates();
  bool seen_key = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key == "profile") {
      if (seen_key) throw ParseError("profile must precede range keys", line_no);
      try {
        coords = ParameterRanges::Profile(value).Coordinates();
      } catch (const InvalidParams& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    std::size_t idx = kRangeKeys.size();
    for (std::size_t k = 0; k < kRangeKeys.size(); ++k) {
      if (kRangeKeys[k] == key) idx = k;
    }
    if (idx == kRangeKeys.size()) throw ParseError("unknown key '" + key + "'", line_no);
    const auto comma = value.find(',');
    if (comma == std::string::npos) {
      throw ParseError("expected 'lower, upper'", line_no);
    }
    const Interval iv{ParseNumber(Trim(value.substr(0, comma)), line_no),
                      ParseNumber(Trim(value.substr(comma + 1)), line_no)};
    if (!(iv.lower <= iv.upper)) throw ParseError("lower exceeds upper", line_no);
    coords[idx] = iv;
    seen_key = true;
  }
  return ParameterRanges::FromCoordinates(coords);
}

ParameterRanges LoadRanges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open ranges file '" + path + "'");
  return ReadRanges(in);
}

void WriteRanges(std::ostream& out, const ParameterRanges& ranges) {
  const auto coords = ranges.Coordinates();
  out << std::setprecision(17);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    out << kRangeKeys[k] << " = " << coords[k].lower << ", " << coords[k].upper
        << '\n';
  }
}

}  // namespace deepcal::quasirandom

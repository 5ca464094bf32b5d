#include "deepcal/calibration.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "deepcal/error.h"
#include "deepcal/rng.h"
#include "deepcal/text.h"

namespace deepcal::calib {
namespace {

using quasirandom::Interval;

double FromUnitInterval(const Interval& iv, double z) {
  return iv.lower + z * (iv.upper - iv.lower);
}

double ToUnitInterval(const Interval& iv, double v) {
  const double width = iv.upper - iv.lower;
  return width > 0.0 ? std::clamp((v - iv.lower) / width, 0.0, 1.0) : 0.0;
}

Interval CappedSeed(const Interval& iv) {
  const double cap = quasirandom::UniformFromLambda(kMaxCalibrationLambda);
  return {std::min(iv.lower, cap), std::min(iv.upper, cap)};
}

bool Inside(const Interval& iv, double v) {
  const double slack = 1e-12 * std::max(1.0, std::abs(iv.upper - iv.lower));
  return v >= iv.lower - slack && v <= iv.upper + slack;
}

std::vector<double> Residuals(const OptionChain& chain,
                              std::span<const garch::PricingPoint> points,
                              const CalibrationBounds& bounds, Model model,
                              const Pricer& pricer, double penalty,
                              std::span<const double> z,
                              std::size_t* flagged = nullptr) {
  std::vector<double> r;
  std::vector<unsigned char> flags;
  try {
    const auto params = bounds.FromUnit(model, z);
    const auto log_prices = pricer.LogPrices(params, points, &flags);
    r = RelativeResiduals(chain, log_prices);
    for (double& v : r) {
      if (!std::isfinite(v)) v = penalty;
    }
  } catch (const DomainError&) {
    r.assign(points.size(), penalty);
  } catch (const InversionFailure&) {
    r.assign(points.size(), penalty);
  } catch (const InvalidParams&) {
    r.assign(points.size(), penalty);
  }
  if (flagged) {
    *flagged = static_cast<std::size_t>(
        std::count(flags.begin(), flags.end(), static_cast<unsigned char>(1)));
  }
  return r;
}

double SumOfSquares(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

struct RunResult {
  std::vector<double> z;
  std::vector<double> r;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

RunResult RunLm(const OptionChain& chain,
                std::span<const garch::PricingPoint> points, Model model,
                const Pricer& pricer, const CalibrationOptions& opt,
                double fd_step, std::vector<double> z) {
  const auto eval = [&](std::span<const double> at) {
    return Residuals(chain, points, opt.bounds, model, pricer, opt.penalty, at);
  };
  const auto k = static_cast<Eigen::Index>(z.size());
  const auto n = static_cast<Eigen::Index>(points.size());
  RunResult run;
  run.r = eval(z);
  run.cost = SumOfSquares(run.r);
  double mu = 1e-3;

  for (int it = 0; it < opt.max_iterations; ++it) {
    ++run.iterations;
    Eigen::MatrixXd jac(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      std::vector<double> zj = z;
      const double h = z[j] + fd_step <= 1.0 ? fd_step : -fd_step;
      zj[j] += h;
      const auto rj = eval(zj);
      for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = (rj[i] - run.r[i]) / h;
    }
    const Eigen::Map<const Eigen::VectorXd> r(run.r.data(), n);
    const Eigen::VectorXd g = jac.transpose() * r;
    double projected = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      projected = std::max(
          projected, std::abs(z[j] - std::clamp(z[j] - g[j], 0.0, 1.0)));
    }
    if (projected < 1e-14) {
      run.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double scale_floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());

    bool improved = false;
    double decrease = 0.0;
    while (mu <= 1e12) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index j = 0; j < k; ++j) {
        a(j, j) += mu * std::max(jtj(j, j), scale_floor);
      }
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      std::vector<double> trial(z.size());
      bool moved = false;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double v = std::isfinite(delta[j])
                             ? std::clamp(z[j] + delta[j], 0.0, 1.0)
                             : z[j];
        moved = moved || v != z[j];
        trial[j] = v;
      }
      if (moved) {
        auto rt = eval(trial);
        const double cost = SumOfSquares(rt);
        if (cost < run.cost) {
          decrease = (run.cost - cost) / run.cost;
          z = std::move(trial);
          run.r = std::move(rt);
          run.cost = cost;
          mu = std::max(mu / 10.0, 1e-12);
          improved = true;
          break;
        }
      }
      mu *= 10.0;
    }
    if (!improved || decrease < 1e-12 || run.cost < 1e-20) {
      run.converged = true;
      break;
    }
  }
  run.z = std::move(z);
  return run;
}

}  // namespace

OptionKind OtmKind(double m) {
  return m >= 1.0 ? OptionKind::kCall : OptionKind::kPut;
}

AnnPricer::AnnPricer(std::optional<fnn::Network> call,
                     std::optional<fnn::Network> put)
    : call_(std::move(call)), put_(std::move(put)) {
  if (!call_ && !put_) throw InvalidParams("ANN pricer needs a network");
  const std::size_t d =
      call_ ? call_->input_dimension() : put_->input_dimension();
  if (call_ && put_ && put_->input_dimension() != d) {
    throw DimensionMismatch("call and put networks differ in input size");
  }
  if (d == InputDimension(Model::kDuan)) {
    model_ = Model::kDuan;
  } else if (d == InputDimension(Model::kCts)) {
    model_ = Model::kCts;
  } else {
    throw DimensionMismatch("network input size " + std::to_string(d) +
                            " matches no model");
  }
}

std::vector<double> AnnPricer::LogPrices(
    const RiskNeutralParams& params,
    std::span<const garch::PricingPoint> points,
    std::vector<unsigned char>* flags) const {
  if (params.model != model_) {
    throw InvalidParams("parameters are for a different model than the networks");
  }
  std::vector<double> out(points.size());
  if (flags) flags->assign(points.size(), 0);
  for (const OptionKind kind : {OptionKind::kCall, OptionKind::kPut}) {
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].kind == kind) index.push_back(i);
    }
    if (index.empty()) continue;
    const auto& net = kind == OptionKind::kCall ? call_ : put_;
    if (!net) {
      throw InvalidParams(std::string("no ") + std::string(ToString(kind)) +
                          " network loaded");
    }
    const auto d = static_cast<Eigen::Index>(net->input_dimension());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(index.size()), d);
    for (std::size_t row = 0; row < index.size(); ++row) {
      const auto& pt = points[index[row]];
      auto v = ModelInput{pt.m, pt.tau, params}.ToVector();
      if (!net->InBox(v)) {
        v = net->Clamp(v);
        if (flags) (*flags)[index[row]] = 1;
      }
      for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(row), j) = v[j];
    }
    const Eigen::VectorXd y = net->ForwardBatch(x);
    for (std::size_t row = 0; row < index.size(); ++row) out[index[row]] = y[row];
  }
  return out;
}

McsPricer::McsPricer(Model model, std::size_t n_paths, std::uint64_t seed)
    : model_(model), n_paths_(n_paths), seed_(seed) {
  if (n_paths == 0) throw InvalidParams("MCS pricer needs at least one path");
}

std::vector<double> McsPricer::LogPrices(
    const RiskNeutralParams& params,
    std::span<const garch::PricingPoint> points,
    std::vector<unsigned char>* flags) const {
  if (params.model != model_) {
    throw InvalidParams("parameters are for a different model than the pricer");
  }
  if (flags) flags->assign(points.size(), 0);
  const garch::PathSimulator simulator(params);
  const auto estimates =
      garch::PriceMcsBatch(simulator, points, n_paths_, seed_);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = std::log(estimates[i].value);
  }
  return out;
}

double OtmValue(double m, double tau, const RiskNeutralParams& params,
                const Pricer& pricer) {
  const garch::PricingPoint pt{m, tau, OtmKind(m)};
  return pricer.LogPrices(params, std::span(&pt, 1)).front();
}

std::vector<garch::PricingPoint> OtmPoints(const OptionChain& chain) {
  std::vector<garch::PricingPoint> points;
  points.reserve(chain.quotes.size());
  for (const auto& q : chain.quotes) {
    const double m = chain.Moneyness(q);
    points.push_back({m, q.tau(), OtmKind(m)});
  }
  return points;
}

std::vector<double> RelativeResiduals(const OptionChain& chain,
                                      std::span<const double> model) {
  if (model.size() != chain.quotes.size()) {
    throw DimensionMismatch("one model price per quote expected");
  }
  std::vector<double> r(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double market = chain.MarketLogPrice(chain.quotes[i]);
    r[i] = (model[i] - market) / market;
  }
  return r;
}

double RelRmse(const OptionChain& chain, const RiskNeutralParams& params,
               const Pricer& pricer) {
  if (chain.quotes.empty()) throw EmptyChain("chain has no quotes");
  const auto points = OtmPoints(chain);
  return std::sqrt(
      SumOfSquares(RelativeResiduals(chain, pricer.LogPrices(params, points))));
}

CalibrationBounds CalibrationBounds::Table1() { return {}; }

CalibrationBounds CalibrationBounds::PaperEmpirical() {
  CalibrationBounds b;
  b.theta.upper = 3.0;
  return b;
}

CalibrationBounds CalibrationBounds::Profile(std::string_view name) {
  if (name == "table1") return Table1();
  if (name == "paper-empirical") return PaperEmpirical();
  throw InvalidParams("unknown bounds profile '" + std::string(name) +
                      "' (expected table1 or paper-empirical)");
}

std::size_t CalibrationBounds::Dimension(Model model) {
  return model == Model::kCts ? 8 : 5;
}

RiskNeutralParams CalibrationBounds::FromUnit(Model model,
                                              std::span<const double> z) const {
  if (z.size() != Dimension(model)) {
    throw DimensionMismatch("unit point has the wrong dimension");
  }
  RiskNeutralParams p;
  p.model = model;
  p.kappa = FromUnitInterval(kappa, z[0]);
  p.psi = FromUnitInterval(psi, z[1]);
  p.gamma = FromUnitInterval(gamma, z[2]);
  p.theta = FromUnitInterval(theta, z[3]);
  p.sigma0 = FromUnitInterval(sigma0, z[4]);
  if (model == Model::kCts) {
    double a = FromUnitInterval(alpha, z[5]);
    if (std::abs(a - 1.0) < cts::kMinAlphaDistanceFromOne) {
      const double away = a < 1.0 ? 0.0 : 2.0;
      a = a < 1.0 ? 1.0 - cts::kMinAlphaDistanceFromOne
                  : 1.0 + cts::kMinAlphaDistanceFromOne;
      while (std::abs(a - 1.0) < cts::kMinAlphaDistanceFromOne) {
        a = std::nextafter(a, away);
      }
    }
    p.cts.alpha = a;
    p.cts.lambda_plus = quasirandom::LambdaFromUniform(
        FromUnitInterval(CappedSeed(u_lambda_plus), z[6]));
    p.cts.lambda_minus = quasirandom::LambdaFromUniform(
        FromUnitInterval(CappedSeed(u_lambda_minus), z[7]));
  }
  return p;
}

std::vector<double> CalibrationBounds::ToUnit(const RiskNeutralParams& p) const {
  std::vector<double> z = {
      ToUnitInterval(kappa, p.kappa), ToUnitInterval(psi, p.psi),
      ToUnitInterval(gamma, p.gamma), ToUnitInterval(theta, p.theta),
      ToUnitInterval(sigma0, p.sigma0)};
  if (p.model == Model::kCts) {
    z.push_back(ToUnitInterval(alpha, p.cts.alpha));
    z.push_back(ToUnitInterval(CappedSeed(u_lambda_plus),
                               quasirandom::UniformFromLambda(p.cts.lambda_plus)));
    z.push_back(ToUnitInterval(CappedSeed(u_lambda_minus),
                               quasirandom::UniformFromLambda(p.cts.lambda_minus)));
  }
  return z;
}

bool CalibrationBounds::Contains(const RiskNeutralParams& p) const {
  bool ok = Inside(kappa, p.kappa) && Inside(psi, p.psi) &&
            Inside(gamma, p.gamma) && Inside(theta, p.theta) &&
            Inside(sigma0, p.sigma0);
  if (p.model == Model::kCts) {
    ok = ok && Inside(alpha, p.cts.alpha) &&
         Inside(CappedSeed(u_lambda_plus),
                quasirandom::UniformFromLambda(p.cts.lambda_plus)) &&
         Inside(CappedSeed(u_lambda_minus),
                quasirandom::UniformFromLambda(p.cts.lambda_minus));
  }
  return ok;
}

CalibrationResult Calibrate(const OptionChain& chain, const Pricer& pricer,
                            const CalibrationOptions& options) {
  if (chain.quotes.empty()) throw EmptyChain("chain has no quotes");
  if (options.max_iterations < 1) {
    throw InvalidParams("max_iterations must be >= 1");
  }
  const Model model = pricer.model();
  const std::size_t k = CalibrationBounds::Dimension(model);
  const double fd_step = options.fd_step > 0.0 ? options.fd_step
                         : pricer.tag() == "mcs" ? 1e-4
                                                 : 1e-6;
  const auto points = OtmPoints(chain);

  std::vector<std::vector<double>> starts;
  if (options.initial) {
    if (options.initial->model != model) {
      throw InvalidParams("initial parameters are for a different model");
    }
    if (!options.bounds.Contains(*options.initial)) {
      throw InvalidParams("initial parameters lie outside the bounds");
    }
    starts.push_back(options.bounds.ToUnit(*options.initial));
  }
  const std::uint64_t window =
      1 + DeriveSeed(options.seed, SeedPurpose::kCalibrationStarts) % 1024;
  for (std::size_t s = 0; s < options.starts; ++s) {
    std::vector<double> z(k);
    for (std::size_t j = 0; j < k; ++j) {
      z[j] = quasirandom::Halton(window + s, quasirandom::kPrimes[j]);
    }
    starts.push_back(std::move(z));
  }
  if (starts.empty()) throw InvalidParams("no starting points");

  RunResult best;
  std::size_t best_start = 0;
  int iterations = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto run = RunLm(chain, points, model, pricer, options, fd_step, starts[s]);
    iterations += run.iterations;
    if (s == 0 || run.cost < best.cost) {
      best = std::move(run);
      best_start = s;
    }
  }

  CalibrationResult result;
  result.date = chain.date;
  result.params = options.bounds.FromUnit(model, best.z);
  Residuals(chain, points, options.bounds, model, pricer, options.penalty,
            best.z, &result.flagged_quotes);
  result.rel_rmse = std::sqrt(best.cost);
  result.iterations = iterations;
  result.converged = best.converged;
  result.pricer = std::string(pricer.tag());
  result.n_quotes = chain.quotes.size();
  result.residuals = std::move(best.r);
  result.best_start = best_start;
  return result;
}

void WriteResultHeader(std::ostream& out, Model model) {
  out << "date,theta,kappa,xi,zeta,sigma0";
  if (model == Model::kCts) out << ",alpha,lambda_plus,lambda_minus";
  out << ",rel_rmse,iterations,converged,flagged_quotes,pricer,n_quotes\n";
}

void WriteResultRow(std::ostream& out, const CalibrationResult& r) {
  const auto& p = r.params;
  out << r.date << ',' << FormatDouble(p.theta) << ',' << FormatDouble(p.kappa)
      << ',' << FormatDouble(p.xi()) << ',' << FormatDouble(p.zeta()) << ','
      << FormatDouble(p.sigma0);
  if (p.model == Model::kCts) {
    out << ',' << FormatDouble(p.cts.alpha) << ','
        << FormatDouble(p.cts.lambda_plus) << ','
        << FormatDouble(p.cts.lambda_minus);
  }
  out << ',' << FormatDouble(r.rel_rmse) << ',' << r.iterations << ','
      << (r.converged ? "true" : "false") << ',' << r.flagged_quotes << ','
      << r.pricer << ',' << r.n_quotes << '\n';
}

std::vector<CalibrationResult> ReadResults(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> column;
  std::vector<CalibrationResult> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitCsv(line);
    if (column.empty()) {
      for (std::size_t i = 0; i < f.size(); ++i) column[std::string(f[i])] = i;
      for (const char* key : {"date", "theta", "kappa", "xi", "zeta", "sigma0",
                              "rel_rmse", "pricer"}) {
        if (!column.contains(key)) {
          throw ParseError(std::string("missing column '") + key + "'", line_no);
        }
      }
      continue;
    }
    if (f.size() != column.size()) {
      throw ParseError("expected " + std::to_string(column.size()) + " fields",
                       line_no);
    }
    const auto num = [&](const std::string& key) {
      const auto v = ParseDouble(f[column.at(key)]);
      if (!v) throw ParseError("bad " + key + " value", line_no);
      return *v;
    };
    const bool cts_row = column.contains("alpha");
    cts::CtsParams c;
    if (cts_row) {
      c = {num("alpha"), num("lambda_plus"), num("lambda_minus")};
    }
    CalibrationResult r;
    r.date = std::string(f[column.at("date")]);
    r.params = RiskNeutralParams::FromXiZeta(
        cts_row ? Model::kCts : Model::kDuan, num("kappa"), num("xi"),
        num("zeta"), num("theta"), num("sigma0"), c);
    r.rel_rmse = num("rel_rmse");
    if (column.contains("iterations")) r.iterations = static_cast<int>(num("iterations"));
    if (column.contains("converged")) {
      r.converged = f[column.at("converged")] == "true";
    }
    if (column.contains("flagged_quotes")) {
      r.flagged_quotes = static_cast<std::size_t>(num("flagged_quotes"));
    }
    if (column.contains("n_quotes")) {
      r.n_quotes = static_cast<std::size_t>(num("n_quotes"));
    }
    r.pricer = std::string(f[column.at("pricer")]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace deepcal::calib

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance [work-dir] [criterion...]

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "deepcal/black_scholes.h"
#include "deepcal/calibration.h"
#include "deepcal/cts.h"
#include "deepcal/dataset.h"
#include "deepcal/error.h"
#include "deepcal/fnn.h"
#include "deepcal/garch_mcs.h"
#include "deepcal/greeks.h"
#include "deepcal/numerics.h"
#include "deepcal/quasirandom.h"
#include "deepcal/rng.h"

namespace fs = std::filesystem;
using namespace deepcal;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

fs::path g_work;

// ---------------------------------------------------------------------- 1

std::complex<long double> DirectExponent(std::complex<long double> u,
                                         const cts::CtsParams& p) {
  const long double a = p.alpha, lp = p.lambda_plus, lm = p.lambda_minus;
  const long double d = std::pow(lp, a - 2) + std::pow(lm, a - 2);
  const long double drift = (std::pow(lp, a - 1) - std::pow(lm, a - 1)) / ((a - 1) * d);
  const std::complex<long double> iu = std::complex<long double>(0, 1) * u;
  return drift * iu + (std::pow(lp - iu, a) - std::pow(lp, a) +
                       std::pow(lm + iu, a) - std::pow(lm, a)) /
                          (a * (a - 1) * d);
}

cts::CtsParams RandomCts(UniformStream& s) {
  cts::CtsParams p;
  do {
    p.alpha = 0.05 + 1.9 * s.Next();
  } while (std::abs(p.alpha - 1.0) < 0.01);
  p.lambda_plus = quasirandom::LambdaFromUniform(0.9 * s.Next());
  p.lambda_minus = quasirandom::LambdaFromUniform(0.9 * s.Next());
  return p;
}

Outcome CtsCorrectness() {
  UniformStream s(101, 0);
  const auto psi = [](double u, const cts::CtsParams& p) {
    return cts::CharacteristicExponent({u, 0.0}, p);
  };
  double mean_err = 0, var_err = 0, l_err = 0;
  for (int i = 0; i < 10; ++i) {
    const auto p = RandomCts(s);
    // Richardson-extrapolated central differences of log phi at 0.
    const auto d1 = [&](double h) { return ((psi(h, p) - psi(-h, p)) / (2 * h)).imag(); };
    const auto d2 = [&](double h) {
      return ((psi(h, p) - 2.0 * psi(0, p) + psi(-h, p)) / (h * h)).real();
    };
    const double mean = (4 * d1(5e-4) - d1(1e-3)) / 3;
    const double var = -(4 * d2(5e-4) - d2(1e-3)) / 3;
    mean_err = std::max(mean_err, std::abs(mean));
    var_err = std::max(var_err, std::abs(var - 1.0));
  }
  for (int i = 0; i < 20; ++i) {
    const auto p = RandomCts(s);
    const double f = 1.9 * s.Next() - 0.95;
    const double x = f > 0 ? f * p.lambda_plus : f * p.lambda_minus;
    const double ref = static_cast<double>(
        DirectExponent({0.0L, -static_cast<long double>(x)}, p).real());
    l_err = std::max(l_err, std::abs(cts::LogLaplace(x, p) - ref));
  }
  return {mean_err < 1e-4 && var_err < 1e-4 && l_err < 1e-10,
          "max |mean| " + Fmt(mean_err) + ", max |var-1| " + Fmt(var_err) +
              " (tol 1e-4); max |l(x) - log phi(-ix)| " + Fmt(l_err) + " (tol 1e-10)"};
}

// ---------------------------------------------------------------------- 2

Outcome SamplerFidelity() {
  const cts::CtsParams p{1.5, 2.0, 2.0};
  const auto x = cts::SampleStdCts(p, 1000000, 202);
  const double n = static_cast<double>(x.size());
  const double mean = PairwiseSum(x) / n;
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
  const double var = PairwiseSum(sq) / (n - 1);
  double cf_err = 0;
  for (double u : {0.5, 1.0, 2.0}) {
    std::vector<double> re(x.size()), im(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      re[i] = std::cos(u * x[i]);
      im[i] = std::sin(u * x[i]);
    }
    const std::complex<double> ecf(PairwiseSum(re) / n, PairwiseSum(im) / n);
    cf_err = std::max(cf_err, std::abs(ecf - cts::CfStdCts(u, p)));
  }
  return {std::abs(mean) < 0.004 && std::abs(var - 1) < 0.01 && cf_err < 0.01,
          "|mean| " + Fmt(std::abs(mean)) + " (tol 0.004), |var-1| " + Fmt(std::abs(var - 1)) +
              " (tol 0.01), max empirical CF error " + Fmt(cf_err) + " (tol 0.01)"};
}

// ---------------------------------------------------------------------- 3

Outcome MartingaleParity() {
  double parity_err = 0, worst_z = 0;
  int checked = 0, skipped = 0;
  for (Model model : {Model::kDuan, Model::kCts}) {
    int done = 0;
    std::uint64_t index = 1;
    while (done < 10) {
      const auto in = quasirandom::SampleParameterSpace(
          model, 1, quasirandom::ParameterRanges::Table1(), 7 + 13 * index++)[0];
      try {
        const int steps = garch::StepsForTau(in.tau);
        const auto x = garch::SimulatePaths(in.params, steps, 20000, 303 + index);
        const auto g = garch::MeanGrowth(x);
        const auto c = garch::EstimateFromExponents(x, in.m, OptionKind::kCall);
        const auto q = garch::EstimateFromExponents(x, in.m, OptionKind::kPut);
        parity_err = std::max(parity_err, std::abs((c.value - q.value) - (g.value - in.m)));
        worst_z = std::max(worst_z, std::abs(g.value - 1.0) / g.std_error);
        ++done;
        ++checked;
      } catch (const DomainError&) {
        ++skipped;
      } catch (const InversionFailure&) {
        ++skipped;
      }
    }
  }
  return {parity_err < 1e-12 && worst_z < 4.0,
          std::to_string(checked) + " parameter sets (" + std::to_string(skipped) +
              " box points outside the CTS domain passed over); max parity gap " +
              Fmt(parity_err) + " (rounding only), max |mean growth - 1| / SE " +
              Fmt(worst_z) + " (tol 4)"};
}

// ---------------------------------------------------------------------- 4

Outcome BlackScholesOracle() {
  const auto p = RiskNeutralParams::FromXiZeta(Model::kDuan, 1e-6, 0.05, 0.9, 0.3, 0.012);
  garch::SimulationOptions opts;
  opts.constant_variance = true;
  double worst = 0;
  for (double m : {0.9, 1.0, 1.1}) {
    for (double tau : {0.1, 0.3}) {
      for (OptionKind kind : {OptionKind::kCall, OptionKind::kPut}) {
        const auto est = garch::PriceMcs(p, {m, tau, 20000, 404, kind}, opts);
        const double total = p.sigma0 * std::sqrt(garch::StepsForTau(tau));
        const double ref = bs::RelativePrice(kind, m, total);
        worst = std::max(worst, std::abs(est.value - ref) / est.std_error);
      }
    }
  }
  return {worst < 3.0, "12 (m, tau, kind) points, max |MCS - BS| / SE " + Fmt(worst) + " (tol 3)"};
}

// ---------------------------------------------------------------------- 5

struct Nets {
  std::optional<fnn::Network> call;
  std::optional<fnn::Network> put;
};
Nets g_nets;

fnn::TrainResult TrainSurrogate(const data::TrainingSet& set, int epochs, std::uint64_t seed) {
  auto net = fnn::Network::Surrogate(set.config.model, set.config.ranges);
  net.Initialize(DeriveSeed(seed, SeedPurpose::kWeightInit));
  fnn::TrainOptions opts;
  opts.max_epochs = epochs;
  opts.on_epoch = [](int epoch, double mse, double) {
    if (epoch % 25 == 0) std::cerr << "  epoch " << epoch << " mse " << mse << std::endl;
  };
  return fnn::TrainLm(net, set, opts);
}

Outcome SurrogateTraining() {
  data::GenerationConfig c;
  c.model = Model::kDuan;
  c.kind = OptionKind::kCall;
  c.n_samples = 10000;
  c.paths_per_price = 5000;
  c.seed = 505;
  auto t0 = Clock::now();
  const auto set = data::GenerateTrainingSet(c);
  const double gen_s = Seconds(t0);
  std::cerr << "  call set: " << set.samples.size() << " samples in " << Fmt(gen_s) << " s\n";
  t0 = Clock::now();
  auto r = TrainSurrogate(set, 300, 505);
  const double train_s = Seconds(t0);
  r.network.metadata()["kind"] = "call";
  fnn::SaveNetwork((g_work / "duan_call.net").string(), r.network);
  g_nets.call = r.network;

  // 50-sample teacher-student problem on the same architecture.
  auto teacher = fnn::Network::Surrogate(Model::kDuan, c.ranges);
  teacher.Initialize(DeriveSeed(506, SeedPurpose::kWeightInit));
  const auto inputs = quasirandom::SampleParameterSpace(Model::kDuan, 50, c.ranges, 3);
  Eigen::MatrixXd x(50, 7);
  for (int i = 0; i < 50; ++i) {
    const auto v = inputs[i].ToVector();
    for (int j = 0; j < 7; ++j) x(i, j) = v[j];
  }
  const Eigen::VectorXd y = teacher.ForwardBatch(x);
  auto student = fnn::Network::Surrogate(Model::kDuan, c.ranges);
  student.Initialize(DeriveSeed(507, SeedPurpose::kWeightInit));
  fnn::TrainOptions topts;
  topts.max_epochs = 300;
  const auto ts = fnn::TrainLm(student, x, y, topts);

  const double total = gen_s + train_s;
  return {r.best_mse < 0.1 && ts.best_mse < 1e-4 && total < 1800,
          "Duan call set " + std::to_string(set.samples.size()) + " of 10000 samples (" +
              std::to_string(set.skipped.total()) + " zero-price skips): best MSE " +
              Fmt(r.best_mse) + " at epoch " + std::to_string(r.best_epoch) +
              " (tol 0.1); teacher-student MSE " + Fmt(ts.best_mse) + " (tol 1e-4); " +
              "generation " + Fmt(gen_s) + " s + training " + Fmt(train_s) + " s (limit 1800 s)"};
}

// ---------------------------------------------------------------------- 6

Outcome JacobianCheck() {
  auto net = fnn::Network::Surrogate(Model::kCts, quasirandom::ParameterRanges::Calibration());
  net.Initialize(DeriveSeed(606, SeedPurpose::kWeightInit));
  const auto inputs =
      quasirandom::SampleParameterSpace(Model::kCts, 100, quasirandom::ParameterRanges::Calibration(), 11);
  UniformStream pick(606, 1);
  const Eigen::VectorXd p0 = net.Parameters();
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto v = inputs[i].ToVector();
    Eigen::MatrixXd x(1, 10);
    for (int j = 0; j < 10; ++j) x(0, j) = v[j];
    const auto jac = net.Jacobian(x);
    const auto k = static_cast<Eigen::Index>(pick.Next() * static_cast<double>(p0.size()));
    const double h = 1e-6;
    Eigen::VectorXd p = p0;
    p(k) += h;
    net.SetParameters(p);
    const double up = net.ForwardBatch(x)(0);
    p(k) -= 2 * h;
    net.SetParameters(p);
    const double down = net.ForwardBatch(x)(0);
    net.SetParameters(p0);
    const double fd = (up - down) / (2 * h);
    const double rel = std::abs(jac(0, k) - fd) / std::max(std::abs(fd), 1e-3);
    worst = std::max(worst, rel);
  }
  return {worst < 1e-4, "100 (weight, sample) pairs, max relative gap " + Fmt(worst) +
                            " (tol 1e-4; denominators floored at 1e-3)"};
}

// ---------------------------------------------------------------------- 7

void EnsurePutNet() {
  if (g_nets.put) return;
  data::GenerationConfig c;
  c.model = Model::kDuan;
  c.kind = OptionKind::kPut;
  c.n_samples = 3000;
  c.paths_per_price = 2000;
  c.seed = 707;
  const auto set = data::GenerateTrainingSet(c);
  auto r = TrainSurrogate(set, 100, 707);
  r.network.metadata()["kind"] = "put";
  std::cerr << "  put net: " << set.samples.size() << " samples, MSE " << r.best_mse << "\n";
  fnn::SaveNetwork((g_work / "duan_put.net").string(), r.network);
  g_nets.put = r.network;
}

RiskNeutralParams ThetaStar() {
  return RiskNeutralParams::FromXiZeta(Model::kDuan, 3e-6, 0.12, 0.8, 0.35, 0.011);
}

calib::OptionChain SyntheticChain(const calib::Pricer& pricer, const RiskNeutralParams& truth) {
  calib::OptionChain chain{"2021-06-09", 4200.0, 0.01, {}};
  for (int days : {10, 20, 30, 45, 60, 75, 90}) {
    for (int j = -15; j <= 15; ++j) {
      calib::OptionQuote q;
      q.strike = chain.spot * (1.0 + 0.01 * j);
      q.maturity_days = days;
      const double m = chain.Moneyness(q);
      q.kind = calib::OtmKind(m);
      const double v = chain.spot * std::exp(calib::OtmValue(m, q.tau(), truth, pricer));
      q.bid = v;
      q.ask = v;
      chain.quotes.push_back(q);
    }
  }
  return calib::FilterChain(chain);
}

// Mean |ANN - MCS| of OTM log prices at 50 in-box points; points where the
// MCS price is zero are left out. Below log price -8 only a few of the 20000
// paths finish in the money, so those are also summarized separately.
std::string SurrogateFidelity(const calib::Pricer& ann) {
  const calib::McsPricer mcs(Model::kDuan, 20000, 711);
  const auto inputs = quasirandom::SampleParameterSpace(
      Model::kDuan, 50, data::GenerationConfig{}.ranges, 70001);
  double sum = 0, sum_resolved = 0;
  int used = 0, resolved = 0;
  for (const auto& in : inputs) {
    const double a = calib::OtmValue(in.m, in.tau, in.params, ann);
    const double b = calib::OtmValue(in.m, in.tau, in.params, mcs);
    if (!std::isfinite(b)) continue;
    sum += std::abs(a - b);
    ++used;
    if (b >= -8.0) {
      sum_resolved += std::abs(a - b);
      ++resolved;
    }
  }
  const double mad = used ? sum / used : 0.0;
  const double mad_resolved = resolved ? sum_resolved / resolved : 0.0;
  return "; ANN vs MCS mean |log price gap| " + Fmt(mad) + " over " + std::to_string(used) +
         " of 50 in-box points, " + Fmt(mad_resolved) + " over the " +
         std::to_string(resolved) + " with MCS log price >= -8 (reference sqrt(0.1) = " +
         Fmt(std::sqrt(0.1)) + ", informational)";
}

Outcome CalibrationRoundTrip() {
  if (!g_nets.call) {
    const auto path = g_work / "duan_call.net";
    if (!fs::exists(path)) return {false, "needs the call network of criterion 5"};
    g_nets.call = fnn::LoadNetwork(path.string());
  }
  EnsurePutNet();
  const calib::AnnPricer ann(g_nets.call, g_nets.put);
  const auto truth = ThetaStar();
  const auto chain = SyntheticChain(ann, truth);
  const auto t0 = Clock::now();
  calib::CalibrationOptions opts;
  opts.starts = 5;
  const auto r = calib::Calibrate(chain, ann, opts);
  const double secs = Seconds(t0);
  return {chain.quotes.size() >= 200 && r.rel_rmse < 1e-3 && secs < 300,
          std::to_string(chain.quotes.size()) + " OTM quotes, rel-RMSE " + Fmt(r.rel_rmse) +
              " (tol 1e-3) from 5 Halton starts, " + std::to_string(r.iterations) +
              " LM iterations, " + Fmt(secs) + " s; recovered psi " + Fmt(r.params.psi) +
              " gamma " + Fmt(r.params.gamma) + " theta " + Fmt(r.params.theta) + " vs " +
              Fmt(truth.psi) + ", " + Fmt(truth.gamma) + ", " + Fmt(truth.theta) +
              SurrogateFidelity(ann)};
}

// ---------------------------------------------------------------------- 8

Outcome SpeedAnalogue() {
  std::string detail;
  bool pass = true;
  for (Model model : {Model::kDuan, Model::kCts}) {
    const auto ranges = quasirandom::ParameterRanges::Calibration();
    fnn::Network call, put;
    if (model == Model::kDuan && g_nets.call && g_nets.put) {
      call = *g_nets.call;
      put = *g_nets.put;
    } else {
      call = fnn::Network::Surrogate(model, ranges);
      call.Initialize(808);
      put = fnn::Network::Surrogate(model, ranges);
      put.Initialize(809);
    }
    const calib::AnnPricer ann(call, put);
    const calib::McsPricer mcs(model, 20000, 810);
    auto theta = ThetaStar();
    theta.model = model;
    theta.cts = {1.5, 15.0, 10.0};
    calib::OptionChain chain{"d", 100.0, 0.01, {}};
    for (int days : {10, 20, 30, 45, 60, 75, 90}) {
      for (int j = 0; j < 75; ++j) {
        calib::OptionQuote q;
        q.strike = 80.0 + 0.55 * j;
        q.maturity_days = days;
        q.kind = calib::OtmKind(chain.Moneyness(q));
        chain.quotes.push_back(q);
      }
    }
    const auto points = calib::OtmPoints(chain);
    auto t0 = Clock::now();
    const auto v_mcs = mcs.LogPrices(theta, points);
    const double s_mcs = Seconds(t0);
    t0 = Clock::now();
    const int reps = 20;
    for (int i = 0; i < reps; ++i) (void)ann.LogPrices(theta, points);
    const double s_ann = Seconds(t0) / reps;
    const double speedup = s_mcs / s_ann;
    const double need = model == Model::kDuan ? 3.0 : 5.0;
    pass = pass && speedup >= need;
    detail += std::string(ToString(model)) + ": " + std::to_string(points.size()) +
              " quotes, MCS " + Fmt(s_mcs) + " s vs ANN " + Fmt(s_ann) + " s, speedup " +
              Fmt(speedup) + "x (need " + Fmt(need) + "x); ";
    (void)v_mcs;
  }
  detail += "CTS networks are untrained (timing only)";
  return {pass, detail};
}

// ---------------------------------------------------------------------- 9

Outcome GreeksSanity() {
  RiskNeutralParams zero;
  zero.kappa = 0.0;
  zero.gamma = 0.0;
  zero.sigma0 = 1e-6;
  const calib::McsPricer flat(Model::kDuan, 2000, 909);
  const auto itm = greeks::ComputeGreeks({100, 50, 0.2, 0.01, OptionKind::kCall, zero}, flat);
  const auto otm = greeks::ComputeGreeks({100, 150, 0.2, 0.01, OptionKind::kCall, zero}, flat);
  const double closed_err =
      std::max({std::abs(itm.delta - 1.0), std::abs(itm.gamma), std::abs(otm.price),
                std::abs(otm.delta), std::abs(otm.gamma), std::abs(otm.theta), std::abs(otm.rho)});

  const calib::McsPricer mcs(Model::kDuan, 10000, 910);
  const auto theta = ThetaStar();
  int range_bad = 0, gamma_bad = 0, points = 0;
  double gamma_gap = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double k = 85.0 + 3.0 * i;
      const double tau = (10.0 + 9.0 * j) / 250.0;
      const greeks::GreeksInput in{100, k, tau, 0.01, OptionKind::kCall, theta};
      auto put_in = in;
      put_in.kind = OptionKind::kPut;
      const auto c = greeks::ComputeGreeks(in, mcs);
      const auto q = greeks::ComputeGreeks(put_in, mcs);
      const double slack = 1e-6;
      if (c.delta < -slack || c.delta > 1.0 + 0.05 || q.delta > slack || q.delta < -1.0 - 0.05) {
        ++range_bad;
      }
      // Common paths make C - P affine in S0, so both Gammas coincide.
      const double gap = std::abs(c.gamma - q.gamma);
      gamma_gap = std::max(gamma_gap, gap);
      if (c.gamma < -1e-6 || gap > 1e-4 * (1.0 + std::abs(c.gamma))) ++gamma_bad;
      ++points;
    }
  }
  return {closed_err < 1e-2 && range_bad == 0 && gamma_bad == 0,
          "zero-vol closed-form max error " + Fmt(closed_err) + " (tol 1e-2); " +
              std::to_string(points) + "-point grid: " + std::to_string(range_bad) +
              " Delta-range violations, " + std::to_string(gamma_bad) +
              " Gamma inconsistencies (max |Gamma_C - Gamma_P| " + Fmt(gamma_gap) + ")"};
}

// --------------------------------------------------------------------- 10

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int RunCli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome Determinism() {
  const fs::path dir = g_work / "determinism";
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::vector<std::string> failures;
  const auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
    if (Slurp(a).empty() || Slurp(a) != Slurp(b)) failures.push_back(what);
  };
  for (const std::string model : {"duan", "cts"}) {
    for (const std::string threads : {"1", "4"}) {
      if (RunCli({"gen-data", "--model", model, "--n", "60", "--paths", "500", "--seed", "10",
                  "--threads", threads, "-o", p(model + "_t" + threads + ".csv")}) != 0) {
        return {false, "gen-data failed"};
      }
    }
    same("gen-data " + model, p(model + "_t1.csv"), p(model + "_t4.csv"));
  }
  for (const std::string run : {"a", "b"}) {
    if (RunCli({"train", "--threads", "1", "--data", p("duan_t1.csv"), "--max-epochs", "15",
                "--seed", "10", "-o", p("net_" + run + ".net")}) != 0) {
      return {false, "train failed"};
    }
  }
  same("train", p("net_a.net"), p("net_b.net"));
  same("train trace", p("net_a.net.trace.csv"), p("net_b.net.trace.csv"));

  if (!g_nets.call || !g_nets.put) {
    auto call = fnn::Network::Surrogate(Model::kDuan, quasirandom::ParameterRanges::Calibration());
    call.Initialize(1010);
    auto put = call;
    put.Initialize(1011);
    g_nets.call = g_nets.call ? g_nets.call : call;
    g_nets.put = g_nets.put ? g_nets.put : put;
  }
  fnn::SaveNetwork(p("call.net"), *g_nets.call);
  fnn::SaveNetwork(p("put.net"), *g_nets.put);
  const calib::AnnPricer ann(g_nets.call, g_nets.put);
  auto chain = SyntheticChain(ann, ThetaStar());
  for (auto& q : chain.quotes) q.ask *= 1.02;
  calib::SaveChains(p("chain.csv"), {chain});
  for (const std::string threads : {"1", "4"}) {
    if (RunCli({"calibrate", "--threads", threads, "--chain", p("chain.csv"), "--pricer", "ann",
                "--call-net", p("call.net"), "--put-net", p("put.net"), "--max-iterations", "50",
                "-o", p("cal_t" + threads + ".csv")}) != 0) {
      return {false, "calibrate failed"};
    }
  }
  same("calibrate", p("cal_t1.csv"), p("cal_t4.csv"));
  std::string detail = "gen-data (duan, cts; 1 vs 4 threads), train (two single-threaded runs), "
                       "calibrate (ANN pricer; 1 vs 4 threads)";
  if (!failures.empty()) {
    detail += "; differing: ";
    for (const auto& f : failures) detail += f + " ";
  } else {
    detail += ": byte-identical";
  }
  return {failures.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_work";
  fs::create_directories(g_work);
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::stoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "CTS correctness", 10, CtsCorrectness},
      {2, "sampler fidelity", 60, SamplerFidelity},
      {3, "martingale and parity", 60, MartingaleParity},
      {4, "Black-Scholes degenerate oracle", 30, BlackScholesOracle},
      {5, "surrogate training", 1800, SurrogateTraining},
      {6, "Jacobian check", 10, JacobianCheck},
      {7, "calibration round-trip", 300, CalibrationRoundTrip},
      {8, "ANN vs MCS speed", 120, SpeedAnalogue},
      {9, "Greeks sanity", 60, GreeksSanity},
      {10, "determinism", 0, Determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = Seconds(t0);
    // Criterion 7 times the calibration alone; its network setup is excluded.
    const bool in_time = c.limit_s == 0 || c.id == 7 || c.id == 5 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << ": " << c.name
              << " | " << o.detail << " | " << Fmt(secs) << " s";
    if (c.limit_s > 0 && c.id != 7 && c.id != 5) std::cout << " (limit " << Fmt(c.limit_s) << " s)";
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}

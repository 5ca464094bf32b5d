#include "cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "deepcal/black_scholes.h"
#include "deepcal/calibration.h"
#include "deepcal/chain.h"
#include "deepcal/dataset.h"
#include "deepcal/error.h"
#include "deepcal/fnn.h"
#include "deepcal/greeks.h"
#include "deepcal/numerics.h"
#include "deepcal/rng.h"
#include "deepcal/text.h"

namespace deepcal::cli {
namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

// Writes to a file, or to the caller's stream when the path is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path) {
    if (path.empty()) {
      stream_ = &fallback;
    } else {
      file_.open(path);
      if (!file_) throw MalformedFile("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }
  void Close() {
    stream_->flush();
    if (!*stream_) throw MalformedFile("write to '" + path_ + "' failed");
    if (file_.is_open()) file_.close();
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

json ParamsJson(const RiskNeutralParams& p) {
  json j = {{"model", ToString(p.model)}, {"kappa", p.kappa},
            {"psi", p.psi},               {"gamma", p.gamma},
            {"xi", p.xi()},               {"zeta", p.zeta()},
            {"theta", p.theta},           {"sigma0", p.sigma0}};
  if (p.model == Model::kCts) {
    j["alpha"] = p.cts.alpha;
    j["lambda_plus"] = p.cts.lambda_plus;
    j["lambda_minus"] = p.cts.lambda_minus;
  }
  return j;
}

json RangesJson(const quasirandom::ParameterRanges& r) {
  json j = json::object();
  const auto c = r.Coordinates();
  for (std::size_t k = 0; k < c.size(); ++k) {
    j[std::string(quasirandom::kRangeKeys[k])] = {c[k].lower, c[k].upper};
  }
  return j;
}

struct ParamOptions {
  double kappa = 1e-6;
  double psi = 0.25;
  double gamma = 0.95;
  double theta = 0.1;
  double sigma0 = 0.01;
  std::optional<double> xi;
  std::optional<double> zeta;
  double alpha = 1.5;
  double lambda_plus = 5.0;
  double lambda_minus = 5.0;
  std::string params_file;

  void Add(CLI::App* app) {
    app->add_option("--kappa", kappa, "Variance intercept")->capture_default_str();
    app->add_option("--psi", psi, "xi / zeta")->capture_default_str();
    app->add_option("--gamma", gamma, "xi + zeta")->capture_default_str();
    app->add_option("--xi", xi, "Overrides psi and gamma together with --zeta");
    app->add_option("--zeta", zeta, "See --xi");
    app->add_option("--theta", theta, "Market price of risk")->capture_default_str();
    app->add_option("--sigma0", sigma0, "Initial daily volatility")->capture_default_str();
    app->add_option("--alpha", alpha, "CTS alpha")->capture_default_str();
    app->add_option("--lambda-plus", lambda_plus, "CTS lambda+")->capture_default_str();
    app->add_option("--lambda-minus", lambda_minus, "CTS lambda-")->capture_default_str();
    app->add_option("--params", params_file,
                    "Calibration result CSV to take the parameters from");
  }

  RiskNeutralParams FromFlags(Model model) const {
    RiskNeutralParams p;
    p.model = model;
    p.kappa = kappa;
    p.psi = psi;
    p.gamma = gamma;
    if (xi || zeta) {
      if (!xi || !zeta) throw InvalidParams("--xi and --zeta go together");
      p = RiskNeutralParams::FromXiZeta(model, kappa, *xi, *zeta, theta, sigma0);
    }
    p.theta = theta;
    p.sigma0 = sigma0;
    p.cts = {alpha, lambda_plus, lambda_minus};
    p.Validate();
    return p;
  }

  // Parameters for `date`: the matching row of --params, its only row, or
  // the flags when no file is given.
  RiskNeutralParams Resolve(Model model, const std::string& date) const {
    if (params_file.empty()) return FromFlags(model);
    std::ifstream in(params_file);
    if (!in) throw MalformedFile("cannot open '" + params_file + "'");
    const auto rows = calib::ReadResults(in);
    const calib::CalibrationResult* pick = nullptr;
    for (const auto& r : rows) {
      if (r.date == date) pick = &r;
    }
    if (!pick && rows.size() == 1) pick = &rows.front();
    if (!pick) {
      throw InvalidParams("no parameters for date '" + date + "' in " +
                          params_file);
    }
    if (pick->params.model != model) {
      throw InvalidParams("parameters in " + params_file +
                          " are for another model");
    }
    pick->params.Validate();
    return pick->params;
  }
};

struct PricerOptions {
  std::string pricer = "ann";
  std::string call_net;
  std::string put_net;
  std::size_t paths = garch::kDefaultPaths;
  std::uint64_t seed = 0;

  void Add(CLI::App* app, const std::string& default_pricer) {
    pricer = default_pricer;
    app->add_option("--pricer", pricer, "ann or mcs")
        ->check(CLI::IsMember({"ann", "mcs"}))
        ->capture_default_str();
    app->add_option("--call-net", call_net, "Call network file");
    app->add_option("--put-net", put_net, "Put network file");
    app->add_option("--paths", paths, "Monte Carlo paths (mcs pricer)")
        ->capture_default_str();
    app->add_option("--seed", seed, "Top-level seed")->capture_default_str();
  }

  std::unique_ptr<calib::Pricer> Make(Model model) const {
    if (pricer == "mcs") {
      return std::make_unique<calib::McsPricer>(
          model, paths, DeriveSeed(seed, SeedPurpose::kMonteCarloPaths));
    }
    std::optional<fnn::Network> call, put;
    if (!call_net.empty()) call = fnn::LoadNetwork(call_net);
    if (!put_net.empty()) put = fnn::LoadNetwork(put_net);
    if (!call && !put) {
      throw InvalidParams("the ann pricer needs --call-net and/or --put-net");
    }
    auto p = std::make_unique<calib::AnnPricer>(std::move(call), std::move(put));
    if (p->model() != model) {
      throw InvalidParams("networks are for the " +
                          std::string(ToString(p->model())) + " model, not " +
                          std::string(ToString(model)));
    }
    return p;
  }

  json Json() const {
    json j = {{"pricer", pricer}};
    if (pricer == "mcs") {
      j["paths"] = paths;
      j["seed"] = seed;
      j["mc_seed"] = DeriveSeed(seed, SeedPurpose::kMonteCarloPaths);
    } else {
      j["call_net"] = call_net;
      j["put_net"] = put_net;
    }
    return j;
  }
};

struct MaturityOptions {
  std::optional<double> tau;
  std::optional<int> days;

  void Add(CLI::App* app) {
    app->add_option("--tau", tau, "Maturity in years");
    app->add_option("--days", days, "Maturity in business days");
  }

  double Resolve() const {
    if (tau && days) throw InvalidParams("give --tau or --days, not both");
    if (days) return *days / garch::kBusinessDaysPerYear;
    if (tau) return *tau;
    throw InvalidParams("a maturity (--tau or --days) is required");
  }
};

std::vector<OptionKind> KindsFor(const std::string& text) {
  if (text == "both") return {OptionKind::kCall, OptionKind::kPut};
  return {ParseOptionKind(text)};
}

// ---------------------------------------------------------------- gen-data

struct GenDataCommand {
  std::string model = "duan";
  std::string kind = "call";
  std::size_t n = 10000;
  std::size_t paths = 5000;
  std::uint64_t seed = 0;
  std::string profile = "calibration";
  std::string ranges_file;
  std::uint64_t start_index = 1;
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--model", model, "duan or cts")->capture_default_str();
    app->add_option("--kind", kind, "call or put")->capture_default_str();
    app->add_option("--n", n, "Parameter vectors to sample")->capture_default_str();
    app->add_option("--paths", paths, "Monte Carlo paths per price")
        ->capture_default_str();
    app->add_option("--seed", seed, "Top-level seed")->capture_default_str();
    app->add_option("--profile", profile, "Sampling box: calibration or table1")
        ->capture_default_str();
    app->add_option("--ranges", ranges_file, "Sampling box file");
    app->add_option("--start-index", start_index, "First Halton position")
        ->capture_default_str();
    app->add_option("-o,--output", output, "Training-set file")->required();
  }

  json Execute(std::ostream& err) const {
    data::GenerationConfig config;
    config.model = ParseModel(model);
    config.kind = ParseOptionKind(kind);
    config.n_samples = n;
    config.paths_per_price = paths;
    config.seed = seed;
    config.start_index = start_index;
    if (ranges_file.empty()) {
      config.profile = profile;
      config.ranges = quasirandom::ParameterRanges::Profile(profile);
    } else {
      config.ranges = quasirandom::LoadRanges(ranges_file);
      config.profile = "file:" + ranges_file;
    }
    const auto set = data::GenerateTrainingSet(config);
    if (set.samples.empty()) {
      throw NumericFailure("every parameter vector was skipped");
    }
    data::SaveTrainingSet(output, set);
    err << "gen-data: " << set.samples.size() << " samples written to "
        << output << ", " << set.skipped.total() << " skipped ("
        << set.skipped.domain << " domain, " << set.skipped.inversion
        << " inversion, " << set.skipped.zero_price << " zero price)\n";
    if (const auto warning = data::SkipWarning(set)) {
      err << "gen-data: warning: " << *warning << '\n';
    }
    return {{"model", ToString(config.model)},
            {"kind", ToString(config.kind)},
            {"n", n},
            {"paths", paths},
            {"seed", seed},
            {"mc_seed", config.McSeed()},
            {"profile", config.profile},
            {"ranges", RangesJson(config.ranges)},
            {"start_index", start_index},
            {"output", output},
            {"samples", set.samples.size()},
            {"skipped", set.skipped.total()}};
  }
};

// ------------------------------------------------------------------- train

struct TrainCommand {
  std::string data_file;
  std::string output;
  std::string trace;
  std::string init;
  int max_epochs = 300;
  std::uint64_t seed = 0;
  double min_gradient = 1e-7;
  bool progress = false;

  void Add(CLI::App* app) {
    app->add_option("--data", data_file, "Training-set file")->required();
    app->add_option("-o,--output", output, "Network file")->required();
    app->add_option("--trace", trace, "MSE trace CSV (default <output>.trace.csv)");
    app->add_option("--init", init, "Start from this network instead of a fresh one");
    app->add_option("--max-epochs", max_epochs, "Epoch cap")->capture_default_str();
    app->add_option("--seed", seed, "Top-level seed")->capture_default_str();
    app->add_option("--min-gradient", min_gradient, "Gradient-norm stop")
        ->capture_default_str();
    app->add_flag("--progress", progress, "Print one line per epoch");
  }

  json Execute(std::ostream& err) const {
    const auto set = data::LoadTrainingSet(data_file);
    if (set.samples.empty()) throw EmptyChain("training set has no samples");
    const std::uint64_t init_seed = DeriveSeed(seed, SeedPurpose::kWeightInit);
    fnn::Network net;
    if (init.empty()) {
      net = fnn::Network::Surrogate(set.config.model, set.config.ranges);
      net.Initialize(init_seed);
    } else {
      net = fnn::LoadNetwork(init);
    }
    fnn::TrainOptions options;
    options.max_epochs = max_epochs;
    options.min_gradient = min_gradient;
    if (progress) {
      options.on_epoch = [&err](int epoch, double mse, double mu) {
        err << "epoch " << epoch << " mse " << mse << " mu " << mu << '\n';
      };
    }
    auto result = fnn::TrainLm(std::move(net), set, options);
    auto& meta = result.network.metadata();
    meta["model"] = std::string(ToString(set.config.model));
    meta["kind"] = std::string(ToString(set.config.kind));
    meta["profile"] = set.config.profile;
    meta["best_mse"] = FormatDouble(result.best_mse);
    meta["best_epoch"] = std::to_string(result.best_epoch);
    meta["epochs"] = std::to_string(result.trace.size() - 1);
    meta["stop"] = std::string(fnn::ToString(result.stop));
    fnn::SaveNetwork(output, result.network);

    const std::string trace_path = trace.empty() ? output + ".trace.csv" : trace;
    Output t(trace_path, err);
    t.stream() << "epoch,mse\n";
    for (std::size_t e = 0; e < result.trace.size(); ++e) {
      t.stream() << e << ',' << FormatDouble(result.trace[e]) << '\n';
    }
    t.Close();
    err << "train: best mse " << result.best_mse << " at epoch "
        << result.best_epoch << " of " << result.trace.size() - 1 << " ("
        << fnn::ToString(result.stop) << ")\n";
    return {{"data", data_file},
            {"output", output},
            {"trace", trace_path},
            {"init", init},
            {"max_epochs", max_epochs},
            {"seed", seed},
            {"init_seed", init.empty() ? json(init_seed) : json(nullptr)},
            {"min_gradient", min_gradient},
            {"mu_initial", options.mu_initial},
            {"best_mse", result.best_mse},
            {"best_epoch", result.best_epoch},
            {"stop", fnn::ToString(result.stop)}};
  }
};

// --------------------------------------------------------------- calibrate

struct CalibrateCommand {
  std::string chain_file;
  std::string model = "duan";
  PricerOptions pricer;
  std::size_t starts = 5;
  int max_iterations = 200;
  std::string bounds = "table1";
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--chain", chain_file, "Option chain CSV")->required();
    app->add_option("--model", model, "duan or cts")->capture_default_str();
    pricer.Add(app, "ann");
    app->add_option("--starts", starts, "Halton starting points")
        ->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "Iterations per start")
        ->capture_default_str();
    app->add_option("--bounds", bounds, "table1 or paper-empirical")
        ->capture_default_str();
    app->add_option("-o,--output", output, "Result CSV (default stdout)");
  }

  json Execute(std::ostream& out, std::ostream& err) const {
    const Model m = ParseModel(model);
    calib::CalibrationOptions options;
    options.bounds = calib::CalibrationBounds::Profile(bounds);
    options.starts = starts;
    options.max_iterations = max_iterations;
    options.seed = pricer.seed;
    const auto p = pricer.Make(m);
    calib::IngestStats stats;
    const auto chains = calib::LoadChains(chain_file, &stats);
    err << "calibrate: " << stats.rows << " quotes read, " << stats.dropped()
        << " filtered out\n";
    Output o(output, out);
    calib::WriteResultHeader(o.stream(), m);
    for (const auto& chain : chains) {
      const auto result = calib::Calibrate(chain, *p, options);
      calib::WriteResultRow(o.stream(), result);
      err << "calibrate: " << chain.date << " rel-RMSE " << result.rel_rmse
          << (result.converged ? "" : " (not converged)") << '\n';
    }
    o.Close();
    json j = pricer.Json();
    j.update({{"chain", chain_file},
              {"model", model},
              {"starts", starts},
              {"max_iterations", max_iterations},
              {"bounds", bounds},
              {"output", output}});
    return j;
  }
};

// ------------------------------------------------------------------- price

struct PriceCommand {
  std::string model = "duan";
  ParamOptions params;
  PricerOptions pricer;
  double spot = 100.0;
  std::vector<double> strikes;
  MaturityOptions maturity;
  double rate = 0.0;
  std::string kind = "otm";
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--model", model, "duan or cts")->capture_default_str();
    params.Add(app);
    pricer.Add(app, "mcs");
    app->add_option("--spot", spot, "S0")->capture_default_str();
    app->add_option("--strike", strikes, "Strike(s)")->required();
    maturity.Add(app);
    app->add_option("--rate", rate, "Continuous annual rate")->capture_default_str();
    app->add_option("--kind", kind, "call, put, both or otm")->capture_default_str();
    app->add_option("-o,--output", output, "Price CSV (default stdout)");
  }

  json Execute(std::ostream& out) const {
    const Model m = ParseModel(model);
    const auto theta = params.Resolve(m, "");
    const double tau = maturity.Resolve();
    std::vector<garch::PricingPoint> points;
    std::vector<double> strike_of;
    for (double k : strikes) {
      if (!(k > 0.0) || !(spot > 0.0)) {
        throw InvalidParams("spot and strikes must be positive");
      }
      const double mny = k * std::exp(-rate * tau) / spot;
      const auto kinds = kind == "otm" ? std::vector{calib::OtmKind(mny)}
                                       : KindsFor(kind);
      for (auto kd : kinds) {
        points.push_back({mny, tau, kd});
        strike_of.push_back(k);
      }
    }
    std::vector<double> log_price(points.size());
    std::vector<double> std_error(points.size(), 0.0);
    if (pricer.pricer == "mcs") {
      const garch::PathSimulator sim(theta);
      const auto est = garch::PriceMcsBatch(
          sim, points, pricer.paths,
          DeriveSeed(pricer.seed, SeedPurpose::kMonteCarloPaths));
      for (std::size_t i = 0; i < points.size(); ++i) {
        log_price[i] = std::log(est[i].value);
        std_error[i] = spot * est[i].std_error;
      }
    } else {
      log_price = pricer.Make(m)->LogPrices(theta, points);
    }
    Output o(output, out);
    o.stream() << "kind,S0,K,tau,r,m,log_rel_price,price,std_error\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      o.stream() << ToString(points[i].kind) << ',' << FormatDouble(spot) << ','
                 << FormatDouble(strike_of[i]) << ',' << FormatDouble(tau)
                 << ',' << FormatDouble(rate) << ','
                 << FormatDouble(points[i].m) << ','
                 << FormatDouble(log_price[i]) << ','
                 << FormatDouble(spot * std::exp(log_price[i])) << ','
                 << FormatDouble(std_error[i]) << '\n';
    }
    o.Close();
    json j = pricer.Json();
    j.update({{"params", ParamsJson(theta)},
              {"spot", spot},
              {"strikes", strikes},
              {"tau", tau},
              {"rate", rate},
              {"kind", kind},
              {"output", output}});
    return j;
  }
};

// ------------------------------------------------------------------ greeks

struct GreeksCommand {
  std::string model = "duan";
  ParamOptions params;
  PricerOptions pricer;
  double spot = 100.0;
  std::vector<double> strikes;
  MaturityOptions maturity;
  double rate = 0.0;
  std::string kind = "both";
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--model", model, "duan or cts")->capture_default_str();
    params.Add(app);
    pricer.Add(app, "ann");
    app->add_option("--spot", spot, "S0")->capture_default_str();
    app->add_option("--strike", strikes, "Strike(s)")->required();
    maturity.Add(app);
    app->add_option("--rate", rate, "Continuous annual rate")->capture_default_str();
    app->add_option("--kind", kind, "call, put or both")->capture_default_str();
    app->add_option("-o,--output", output, "Greeks CSV (default stdout)");
  }

  json Execute(std::ostream& out, std::ostream& err) const {
    const Model m = ParseModel(model);
    const auto theta = params.Resolve(m, "");
    const double tau = maturity.Resolve();
    const auto p = pricer.Make(m);
    if (pricer.pricer == "mcs") {
      err << "greeks: finite differences of Monte Carlo prices are noisy\n";
    }
    Output o(output, out);
    greeks::WriteGreeksHeader(o.stream());
    for (double k : strikes) {
      for (auto kd : KindsFor(kind)) {
        const greeks::GreeksInput in{spot, k, tau, rate, kd, theta};
        greeks::WriteGreeksRow(o.stream(), in, greeks::ComputeGreeks(in, *p),
                               ToString(m));
      }
    }
    o.Close();
    json j = pricer.Json();
    j.update({{"params", ParamsJson(theta)},
              {"spot", spot},
              {"strikes", strikes},
              {"tau", tau},
              {"rate", rate},
              {"kind", kind},
              {"output", output}});
    return j;
  }
};

// --------------------------------------------------------------- benchmark

struct BenchmarkCommand {
  std::string chain_file;
  std::vector<std::string> models = {"duan", "cts"};
  std::string duan_call_net, duan_put_net, cts_call_net, cts_put_net;
  ParamOptions params;
  std::size_t paths = garch::kDefaultPaths;
  std::uint64_t seed = 0;
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--chain", chain_file, "Option chain CSV")->required();
    app->add_option("--models", models, "Models to time")->capture_default_str();
    app->add_option("--duan-call-net", duan_call_net, "Duan call network");
    app->add_option("--duan-put-net", duan_put_net, "Duan put network");
    app->add_option("--cts-call-net", cts_call_net, "CTS call network");
    app->add_option("--cts-put-net", cts_put_net, "CTS put network");
    params.Add(app);
    app->add_option("--paths", paths, "Monte Carlo paths")->capture_default_str();
    app->add_option("--seed", seed, "Top-level seed")->capture_default_str();
    app->add_option("-o,--output", output, "Timing CSV (default stdout)");
  }

  fnn::Network Net(Model model, OptionKind kind, const std::string& path) const {
    if (!path.empty()) return fnn::LoadNetwork(path);
    auto net = fnn::Network::Surrogate(
        model, quasirandom::ParameterRanges::Calibration());
    net.Initialize(DeriveSeed(seed, SeedPurpose::kWeightInit) +
                   (kind == OptionKind::kPut ? 1 : 0));
    return net;
  }

  json Execute(std::ostream& out, std::ostream& err) const {
    std::vector<calib::OptionChain> chains;
    try {
      chains = calib::LoadChains(chain_file);
    } catch (const EmptyChain&) {
      err << "benchmark: no quotes after filtering\n";
    }
    Output o(output, out);
    o.stream() << "date,model,observations,mcs_seconds,ann_seconds,speedup\n";
    json fresh = json::array();
    for (const auto& name : models) {
      const Model model = ParseModel(name);
      const bool is_duan = model == Model::kDuan;
      const auto& call_path = is_duan ? duan_call_net : cts_call_net;
      const auto& put_path = is_duan ? duan_put_net : cts_put_net;
      if (call_path.empty() || put_path.empty()) fresh.push_back(name);
      const calib::AnnPricer ann(Net(model, OptionKind::kCall, call_path),
                                 Net(model, OptionKind::kPut, put_path));
      const calib::McsPricer mcs(
          model, paths, DeriveSeed(seed, SeedPurpose::kMonteCarloPaths));
      const auto theta = params.Resolve(model, "");
      for (const auto& chain : chains) {
        const auto points = calib::OtmPoints(chain);
        using Clock = std::chrono::steady_clock;
        const auto t0 = Clock::now();
        const auto v_mcs = mcs.LogPrices(theta, points);
        const auto t1 = Clock::now();
        const auto v_ann = ann.LogPrices(theta, points);
        const auto t2 = Clock::now();
        const double s_mcs = std::chrono::duration<double>(t1 - t0).count();
        const double s_ann = std::chrono::duration<double>(t2 - t1).count();
        o.stream() << chain.date << ',' << name << ',' << points.size() << ','
                   << s_mcs << ',' << s_ann << ','
                   << (s_ann > 0.0 ? s_mcs / s_ann : 0.0) << '\n';
        (void)v_mcs;
        (void)v_ann;
      }
    }
    o.Close();
    return {{"chain", chain_file},       {"models", models},
            {"paths", paths},            {"seed", seed},
            {"untrained_networks", fresh}, {"output", output}};
  }
};

// --------------------------------------------------------------- plot-data

struct PlotDataCommand {
  std::string chain_file;
  std::string model = "duan";
  ParamOptions params;
  PricerOptions pricer;
  std::optional<int> days;
  std::string date;
  std::string output;

  void Add(CLI::App* app) {
    app->add_option("--chain", chain_file, "Option chain CSV")->required();
    app->add_option("--model", model, "duan or cts")->capture_default_str();
    params.Add(app);
    pricer.Add(app, "ann");
    app->add_option("--days", days, "Only this maturity (business days)");
    app->add_option("--date", date, "Only this quote date");
    app->add_option("-o,--output", output, "Plot CSV (default stdout)");
  }

  static std::string Vol(OptionKind kind, double price, double spot,
                         double strike, double tau, double r) {
    try {
      return FormatDouble(bs::ImpliedVol(kind, price, spot, strike, tau, r));
    } catch (const InvalidParams&) {
      return "nan";
    }
  }

  json Execute(std::ostream& out) const {
    const Model m = ParseModel(model);
    const auto p = pricer.Make(m);
    const auto chains = calib::LoadChains(chain_file);
    std::ostringstream rows;
    std::size_t count = 0;
    for (const auto& chain : chains) {
      if (!date.empty() && chain.date != date) continue;
      const auto theta = params.Resolve(m, chain.date);
      calib::OptionChain slice{chain.date, chain.spot, chain.rate, {}};
      for (const auto& q : chain.quotes) {
        if (!days || q.maturity_days == *days) slice.quotes.push_back(q);
      }
      if (slice.quotes.empty()) continue;
      const auto points = calib::OtmPoints(slice);
      const auto log_prices = p->LogPrices(theta, points);
      for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& q = slice.quotes[i];
        const double model_price = chain.spot * std::exp(log_prices[i]);
        const double tau = q.tau();
        rows << chain.date << ',' << q.maturity_days << ','
             << ToString(points[i].kind) << ',' << FormatDouble(q.strike) << ','
             << FormatDouble(q.mid()) << ',' << FormatDouble(model_price) << ','
             << Vol(points[i].kind, q.mid(), chain.spot, q.strike, tau, chain.rate)
             << ','
             << Vol(points[i].kind, model_price, chain.spot, q.strike, tau,
                    chain.rate)
             << '\n';
        ++count;
      }
    }
    if (count == 0) throw EmptyChain("no quotes at the requested maturity");
    Output o(output, out);
    o.stream() << "date,maturity_days,kind,strike,market_mid,model_price,"
                  "iv_market,iv_model\n"
               << rows.str();
    o.Close();
    json j = pricer.Json();
    j.update({{"chain", chain_file},
              {"model", model},
              {"days", days ? json(*days) : json(nullptr)},
              {"date", date},
              {"params_file", params.params_file},
              {"output", output}});
    return j;
  }
};

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const InvalidParams*>(&e) ||
      dynamic_cast<const DimensionMismatch*>(&e)) {
    return kConfigError;
  }
  if (dynamic_cast<const NumericFailure*>(&e) ||
      dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const InversionFailure*>(&e)) {
    return kNumericError;
  }
  if (dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const MalformedFile*>(&e) ||
      dynamic_cast<const UnsupportedVersion*>(&e) ||
      dynamic_cast<const EmptyChain*>(&e)) {
    return kDataError;
  }
  return kNumericError;
}

void WriteManifest(const std::string& path, const std::string& subcommand,
                   const std::vector<std::string>& args, int threads,
                   json config) {
  json manifest = {{"tool", "deepcal"},
                   {"manifest_version", kManifestVersion},
                   {"subcommand", subcommand},
                   {"argv", args},
                   {"threads", threads},
                   {"config", std::move(config)}};
  std::ofstream out(path);
  if (!out) throw MalformedFile("cannot write manifest '" + path + "'");
  out << manifest.dump(2) << '\n';
}

}  // namespace

std::string ManifestPath(const std::string& subcommand,
                         const std::string& output) {
  if (output.empty()) return "deepcal-" + subcommand + ".manifest.json";
  return output + ".manifest.json";
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app("GARCH / CTS-GARCH option pricing and deep calibration toolkit",
               "deepcal");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = DEEPCAL_THREADS or all cores)")
      ->envname("DEEPCAL_THREADS");

  GenDataCommand gen;
  TrainCommand train;
  CalibrateCommand calibrate;
  PriceCommand price;
  GreeksCommand greeks_cmd;
  BenchmarkCommand bench;
  PlotDataCommand plot;
  std::string manifest_file;

  auto* gen_app = app.add_subcommand("gen-data", "Generate a training set");
  gen.Add(gen_app);
  auto* train_app = app.add_subcommand("train", "Train a surrogate network");
  train.Add(train_app);
  auto* cal_app = app.add_subcommand("calibrate", "Calibrate to option chains");
  calibrate.Add(cal_app);
  auto* price_app = app.add_subcommand("price", "Price European options");
  price.Add(price_app);
  auto* greeks_app = app.add_subcommand("greeks", "Finite-difference Greeks");
  greeks_cmd.Add(greeks_app);
  auto* bench_app = app.add_subcommand("benchmark", "Time MCS against ANN pricing");
  bench.Add(bench_app);
  auto* plot_app = app.add_subcommand("plot-data", "Emit price and implied-vol data");
  plot.Add(plot_app);
  auto* rerun_app = app.add_subcommand("rerun", "Replay the run of a manifest");
  rerun_app->add_option("--manifest", manifest_file, "Manifest file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (rerun_app->parsed()) {
      std::ifstream in(manifest_file);
      if (!in) throw MalformedFile("cannot open '" + manifest_file + "'");
      json manifest;
      try {
        manifest = json::parse(in);
        if (manifest.at("manifest_version").get<int>() != kManifestVersion) {
          throw UnsupportedVersion("manifest version not supported");
        }
        const auto argv = manifest.at("argv").get<std::vector<std::string>>();
        return Run(argv, out, err);
      } catch (const json::exception& e) {
        throw MalformedFile(std::string("bad manifest: ") + e.what());
      }
    }

    SetThreadCount(threads);
    std::string name;
    std::string output;
    json config;
    if (gen_app->parsed()) {
      name = "gen-data";
      output = gen.output;
      config = gen.Execute(err);
    } else if (train_app->parsed()) {
      name = "train";
      output = train.output;
      config = train.Execute(err);
    } else if (cal_app->parsed()) {
      name = "calibrate";
      output = calibrate.output;
      config = calibrate.Execute(out, err);
    } else if (price_app->parsed()) {
      name = "price";
      output = price.output;
      config = price.Execute(out);
    } else if (greeks_app->parsed()) {
      name = "greeks";
      output = greeks_cmd.output;
      config = greeks_cmd.Execute(out, err);
    } else if (bench_app->parsed()) {
      name = "benchmark";
      output = bench.output;
      config = bench.Execute(out, err);
    } else {
      name = "plot-data";
      output = plot.output;
      config = plot.Execute(out);
    }
    WriteManifest(ManifestPath(name, output), name, args, ThreadCount(),
                  std::move(config));
    return kOk;
  } catch (const std::exception& e) {
    err << "deepcal: error: " << e.what() << '\n';
    return ExitCodeFor(e);
  }
}

}  // namespace deepcal::cli

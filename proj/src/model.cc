#include "deepcal/model.h"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <string>

#include "deepcal/error.h"

namespace deepcal {
namespace {

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view ToString(Model model) {
  return model == Model::kDuan ? "duan" : "cts";
}

std::string_view ToString(OptionKind kind) {
  return kind == OptionKind::kCall ? "call" : "put";
}

Model ParseModel(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "duan") return Model::kDuan;
  if (t == "cts") return Model::kCts;
  throw InvalidParams("unknown model '" + std::string(text) + "'");
}

OptionKind ParseOptionKind(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "call" || t == "c") return OptionKind::kCall;
  if (t == "put" || t == "p") return OptionKind::kPut;
  throw InvalidParams("unknown option kind '" + std::string(text) + "'");
}

std::size_t InputDimension(Model model) {
  return model == Model::kDuan ? 7 : 10;
}

RiskNeutralParams RiskNeutralParams::FromXiZeta(Model model, double kappa,
                                                double xi, double zeta,
                                                double theta, double sigma0,
                                                cts::CtsParams cts) {
  RiskNeutralParams p;
  p.model = model;
  p.kappa = kappa;
  p.psi = xi / zeta;
  p.gamma = xi + zeta;
  p.theta = theta;
  p.sigma0 = sigma0;
  p.cts = cts;
  return p;
}

void RiskNeutralParams::Validate() const {
  std::ostringstream msg;
  if (!(kappa >= 0.0)) {
    msg << "kappa must be >= 0, got " << kappa;
  } else if (!(psi > 0.0)) {
    msg << "psi must be > 0, got " << psi;
  } else if (!(gamma >= 0.0 && gamma < 1.0)) {
    msg << "gamma must lie in [0, 1), got " << gamma;
  } else if (!(theta >= 0.0)) {
    msg << "theta must be >= 0, got " << theta;
  } else if (!(sigma0 > 0.0)) {
    msg << "sigma0 must be > 0, got " << sigma0;
  } else {
    if (model == Model::kCts) cts.Validate();
    return;
  }
  throw InvalidParams(msg.str());
}

std::vector<double> ModelInput::ToVector() const {
  std::vector<double> v = {m,           tau,          params.kappa,
                           params.psi,  params.gamma, params.theta,
                           params.sigma0};
  if (params.model == Model::kCts) {
    v.push_back(params.cts.alpha);
    v.push_back(params.cts.lambda_plus);
    v.push_back(params.cts.lambda_minus);
  }
  return v;
}

ModelInput ModelInput::FromVector(Model model, std::span<const double> values) {
  if (values.size() != InputDimension(model)) {
    throw DimensionMismatch("expected " +
                            std::to_string(InputDimension(model)) +
                            " inputs, got " + std::to_string(values.size()));
  }
  ModelInput in;
  in.m = values[0];
  in.tau = values[1];
  in.params.model = model;
  in.params.kappa = values[2];
  in.params.psi = values[3];
  in.params.gamma = values[4];
  in.params.theta = values[5];
  in.params.sigma0 = values[6];
  if (model == Model::kCts) {
    in.params.cts = {values[7], values[8], values[9]};
  }
  return in;
}

std::vector<std::string_view> InputNames(Model model) {
  std::vector<std::string_view> names = {"m",     "tau",   "kappa", "psi",
                                         "gamma", "theta", "sigma0"};
  if (model == Model::kCts) {
    names.insert(names.end(), {"alpha", "lambda_plus", "lambda_minus"});
  }
  return names;
}

}  // namespace deepcal

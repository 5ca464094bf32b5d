#include "deepcal/fnn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "deepcal/error.h"
#include "deepcal/numerics.h"
#include "deepcal/rng.h"
#include "deepcal/text.h"

namespace deepcal::fnn {
namespace {

constexpr std::string_view kMagic = "deepcal-network";
constexpr int kVersion = 1;

// Partial normal-equation sums are kept per block and added in block order,
// so the result does not depend on how many threads share the blocks.
constexpr int kAccumulationBlocks = 8;
constexpr Eigen::Index kChunk = 128;

Eigen::MatrixXd Activate(Eigen::MatrixXd z, Activation a) {
  if (a == Activation::kSigmoid) {
    z = (1.0 + (-z.array()).exp()).inverse().matrix();
  }
  return z;
}

std::string_view ActivationName(Activation a) {
  return a == Activation::kSigmoid ? "sigmoid" : "linear";
}

std::string_view TransformName(InputTransform t) {
  return t == InputTransform::kIdentity ? "identity" : "lambda_seed";
}

struct NormalEquations {
  Eigen::MatrixXd jtj;
  Eigen::VectorXd jtr;
  double sse = 0.0;
};

// Buffers reused across epochs so the P x P matrices are allocated once.
struct Workspace {
  std::vector<Eigen::MatrixXd> jtj;
  std::vector<Eigen::VectorXd> jtr;
  Eigen::MatrixXd damped;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

void Accumulate(const Network& net, const Eigen::MatrixXd& xn,
                const Eigen::VectorXd& y, NormalEquations& eq, Workspace& ws) {
  const auto p = static_cast<Eigen::Index>(net.parameter_count());
  const Eigen::Index n = xn.cols();
  const int blocks = static_cast<int>(
      std::min<Eigen::Index>(kAccumulationBlocks, (n + kChunk - 1) / kChunk));
  ws.jtj.resize(blocks);
  ws.jtr.resize(blocks);
  std::vector<double> sse(blocks, 0.0);

#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    ws.jtj[b].setZero(p, p);
    ws.jtr[b].setZero(p);
    const Eigen::Index begin = n * b / blocks;
    const Eigen::Index end = n * (b + 1) / blocks;
    for (Eigen::Index s = begin; s < end; s += kChunk) {
      const Eigen::Index len = std::min(kChunk, end - s);
      Eigen::VectorXd out;
      const Eigen::MatrixXd j =
          net.JacobianNormalized(xn.middleCols(s, len), &out);
      const Eigen::VectorXd r = out - y.segment(s, len);
      ws.jtj[b].selfadjointView<Eigen::Lower>().rankUpdate(j);
      ws.jtr[b].noalias() += j * r;
      sse[b] += r.squaredNorm();
    }
  }
  eq.jtj = ws.jtj[0];
  eq.jtr = ws.jtr[0];
  eq.sse = sse[0];
  for (int b = 1; b < blocks; ++b) {
    eq.jtj += ws.jtj[b];
    eq.jtr += ws.jtr[b];
    eq.sse += sse[b];
  }
  eq.jtj.triangularView<Eigen::StrictlyUpper>() =
      eq.jtj.transpose().triangularView<Eigen::StrictlyUpper>();
}

double Mse(const Network& net, const Eigen::MatrixXd& xn,
           const Eigen::VectorXd& y) {
  const Eigen::VectorXd r = net.ForwardNormalized(xn) - y;
  std::vector<double> sq(static_cast<std::size_t>(r.size()));
  for (Eigen::Index i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
  return PairwiseSum(sq) / static_cast<double>(r.size());
}

void CheckTrainingShapes(const Network& net, const Eigen::MatrixXd& inputs,
                         const Eigen::VectorXd& targets) {
  if (inputs.rows() == 0) throw InvalidParams("training set is empty");
  if (static_cast<std::size_t>(inputs.cols()) != net.input_dimension()) {
    throw DimensionMismatch("training inputs have " +
                            std::to_string(inputs.cols()) +
                            " columns, network expects " +
                            std::to_string(net.input_dimension()));
  }
  if (inputs.rows() != targets.size()) {
    throw DimensionMismatch("input and target counts differ");
  }
}

Eigen::VectorXd SolveDamped(const NormalEquations& eq, double mu, bool* ok,
                            Workspace& ws) {
  ws.damped = eq.jtj;
  ws.damped.diagonal().array() += mu;
  ws.llt.compute(ws.damped);
  *ok = ws.llt.info() == Eigen::Success;
  if (!*ok) return {};
  Eigen::VectorXd delta = ws.llt.solve(-eq.jtr);
  *ok = delta.allFinite();
  return delta;
}

}  // namespace

Network::Network(std::vector<int> sizes, std::vector<double> lower,
                 std::vector<double> upper,
                 std::vector<InputTransform> transforms)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      transforms_(std::move(transforms)) {
  if (sizes.size() < 2 || sizes.back() != 1) {
    throw InvalidParams("network needs at least two layers and one output");
  }
  for (int s : sizes) {
    if (s < 1) throw InvalidParams("layer sizes must be positive");
  }
  const auto d = static_cast<std::size_t>(sizes.front());
  if (transforms_.empty()) transforms_.assign(d, InputTransform::kIdentity);
  if (lower_.size() != d || upper_.size() != d || transforms_.size() != d) {
    throw DimensionMismatch("input box does not match the input layer");
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (!(lower_[j] <= upper_[j])) {
      throw InvalidParams("input box has lower > upper");
    }
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    layer.weights = Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]);
    layer.bias = Eigen::VectorXd::Zero(sizes[l + 1]);
    layer.activation = l + 2 == sizes.size() ? Activation::kLinear
                                             : Activation::kSigmoid;
    layers_.push_back(std::move(layer));
  }
}

Network Network::Surrogate(Model model,
                           const quasirandom::ParameterRanges& ranges) {
  const std::size_t d = InputDimension(model);
  const auto coords = ranges.Coordinates();
  std::vector<double> lower(d), upper(d);
  std::vector<InputTransform> transforms(d, InputTransform::kIdentity);
  for (std::size_t j = 0; j < d; ++j) {
    lower[j] = coords[j].lower;
    upper[j] = coords[j].upper;
    if (j >= 8) transforms[j] = InputTransform::kLambdaSeed;
  }
  const int din = static_cast<int>(d);
  Network net({din, 20, 20, 20, 1}, lower, upper, transforms);
  net.metadata()["model"] = std::string(ToString(model));
  return net;
}

std::vector<int> Network::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(static_cast<int>(layers_.front().weights.cols()));
  for (const auto& l : layers_) s.push_back(static_cast<int>(l.weights.rows()));
  return s;
}

void Network::Initialize(std::uint64_t seed) {
  UniformStream stream(seed, 0);
  for (auto& layer : layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        layer.weights(i, j) = (2.0 * stream.Next() - 1.0) * scale;
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = (2.0 * stream.Next() - 1.0) * scale;
    }
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  }
  return n;
}

Eigen::VectorXd Network::Parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) p[k++] = l.weights(i, j);
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) p[k++] = l.bias[i];
  }
  return p;
}

void Network::SetParameters(const Eigen::VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) {
    throw DimensionMismatch("parameter vector has the wrong length");
  }
  Eigen::Index k = 0;
  for (auto& l : layers_) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = p[k++];
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = p[k++];
  }
}

void Network::CheckDimension(std::size_t n) const {
  if (n != input_dimension()) {
    throw DimensionMismatch("input has " + std::to_string(n) +
                            " features, network expects " +
                            std::to_string(input_dimension()));
  }
}

double Network::TransformInput(std::size_t j, double v) const {
  if (transforms_[j] == InputTransform::kLambdaSeed) {
    return quasirandom::UniformFromLambda(v);
  }
  return v;
}

Eigen::VectorXd Network::Normalize(std::span<const double> x) const {
  CheckDimension(x.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double width = upper_[j] - lower_[j];
    out[j] = width > 0.0
                 ? 2.0 * (TransformInput(j, x[j]) - lower_[j]) / width - 1.0
                 : 0.0;
  }
  return out;
}

Eigen::MatrixXd Network::NormalizeBatch(const Eigen::MatrixXd& inputs) const {
  CheckDimension(static_cast<std::size_t>(inputs.cols()));
  Eigen::MatrixXd out(inputs.cols(), inputs.rows());
  std::vector<double> row(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index s = 0; s < inputs.rows(); ++s) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) row[j] = inputs(s, j);
    out.col(s) = Normalize(row);
  }
  return out;
}

bool Network::InBox(std::span<const double> x) const {
  CheckDimension(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = TransformInput(j, x[j]);
    const double slack = 1e-12 * std::max(1.0, upper_[j] - lower_[j]);
    if (!(t >= lower_[j] - slack && t <= upper_[j] + slack)) return false;
  }
  return true;
}

std::vector<double> Network::Clamp(std::span<const double> x) const {
  CheckDimension(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = TransformInput(j, x[j]);
    if (t >= lower_[j] && t <= upper_[j]) continue;
    const double c = std::clamp(t, lower_[j], upper_[j]);
    out[j] = transforms_[j] == InputTransform::kLambdaSeed
                 ? quasirandom::LambdaFromUniform(c)
                 : c;
  }
  return out;
}

double Network::Forward(std::span<const double> x) const {
  const Eigen::MatrixXd xn = Normalize(x);
  return ForwardNormalized(xn)[0];
}

Eigen::VectorXd Network::ForwardBatch(const Eigen::MatrixXd& inputs) const {
  return ForwardNormalized(NormalizeBatch(inputs));
}

Eigen::VectorXd Network::ForwardNormalized(const Eigen::MatrixXd& xn) const {
  CheckDimension(static_cast<std::size_t>(xn.rows()));
  Eigen::MatrixXd a = xn;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weights * a;
    z.colwise() += l.bias;
    a = Activate(std::move(z), l.activation);
  }
  return a.row(0).transpose();
}

Eigen::MatrixXd Network::JacobianNormalized(const Eigen::MatrixXd& xn,
                                            Eigen::VectorXd* outputs) const {
  CheckDimension(static_cast<std::size_t>(xn.rows()));
  const Eigen::Index n = xn.cols();
  const std::size_t depth = layers_.size();
  std::vector<Eigen::MatrixXd> acts(depth + 1);
  acts[0] = xn;
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = layers_[l].weights * acts[l];
    z.colwise() += layers_[l].bias;
    acts[l + 1] = Activate(std::move(z), layers_[l].activation);
  }
  if (outputs) *outputs = acts[depth].row(0).transpose();

  std::vector<Eigen::Index> offset(depth);
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offset[l] = total;
    total += layers_[l].weights.size() + layers_[l].bias.size();
  }

  Eigen::MatrixXd jac(total, n);
  Eigen::MatrixXd delta = Eigen::MatrixXd::Ones(1, n);
  if (layers_.back().activation == Activation::kSigmoid) {
    delta.array() *= acts[depth].array() * (1.0 - acts[depth].array());
  }
  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = layers_[l];
    const Eigen::Index out = layer.weights.rows();
    const Eigen::Index in = layer.weights.cols();
    for (Eigen::Index s = 0; s < n; ++s) {
      for (Eigen::Index i = 0; i < out; ++i) {
        jac.block(offset[l] + i * in, s, in, 1) = delta(i, s) * acts[l].col(s);
      }
      jac.block(offset[l] + out * in, s, out, 1) = delta.col(s);
    }
    if (l > 0) {
      Eigen::MatrixXd back = layer.weights.transpose() * delta;
      if (layers_[l - 1].activation == Activation::kSigmoid) {
        back.array() *= acts[l].array() * (1.0 - acts[l].array());
      }
      delta = std::move(back);
    }
  }
  return jac;
}

Eigen::MatrixXd Network::Jacobian(const Eigen::MatrixXd& inputs) const {
  return JacobianNormalized(NormalizeBatch(inputs)).transpose();
}

std::string_view ToString(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxEpochs:
      return "max_epochs";
    case StopReason::kSmallGradient:
      return "small_gradient";
    case StopReason::kDampingCap:
      return "damping_cap";
  }
  return "unknown";
}

double MeanSquaredError(const Network& net, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets) {
  CheckTrainingShapes(net, inputs, targets);
  return Mse(net, net.NormalizeBatch(inputs), targets);
}

Eigen::VectorXd MseGradient(const Network& net, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& targets) {
  CheckTrainingShapes(net, inputs, targets);
  NormalEquations eq;
  Workspace ws;
  Accumulate(net, net.NormalizeBatch(inputs), targets, eq, ws);
  return 2.0 * eq.jtr / static_cast<double>(inputs.rows());
}

Eigen::VectorXd LmStep(const Network& net, const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXd& targets, double mu) {
  CheckTrainingShapes(net, inputs, targets);
  NormalEquations eq;
  Workspace ws;
  Accumulate(net, net.NormalizeBatch(inputs), targets, eq, ws);
  bool ok = false;
  Eigen::VectorXd delta = SolveDamped(eq, mu, &ok, ws);
  if (!ok) throw NumericFailure("damped normal equations are not solvable");
  return delta;
}

TrainResult TrainLm(Network net, const Eigen::MatrixXd& inputs,
                    const Eigen::VectorXd& targets,
                    const TrainOptions& options) {
  CheckTrainingShapes(net, inputs, targets);
  if (options.max_epochs < 0) throw InvalidParams("max_epochs must be >= 0");
  const Eigen::MatrixXd xn = net.NormalizeBatch(inputs);
  const double n = static_cast<double>(inputs.rows());

  Eigen::VectorXd params = net.Parameters();
  double mse = Mse(net, xn, targets);
  if (!std::isfinite(mse)) {
    throw NumericFailure("initial training loss is not finite");
  }
  TrainResult result;
  result.trace.push_back(mse);
  result.best_mse = mse;
  Eigen::VectorXd best = params;
  double mu = options.mu_initial;
  NormalEquations eq;
  Workspace ws;

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    Accumulate(net, xn, targets, eq, ws);
    const Eigen::VectorXd grad = 2.0 * eq.jtr / n;
    if (!grad.allFinite()) {
      throw NumericFailure("training gradient is not finite at epoch " +
                           std::to_string(epoch) + " (mse " +
                           FormatDouble(mse) + ")");
    }
    if (grad.norm() < options.min_gradient) {
      result.stop = StopReason::kSmallGradient;
      break;
    }
    bool accepted = false;
    while (mu <= options.mu_max) {
      bool ok = false;
      const Eigen::VectorXd delta = SolveDamped(eq, mu, &ok, ws);
      if (ok) {
        net.SetParameters(params + delta);
        const double trial = Mse(net, xn, targets);
        if (std::isfinite(trial) && trial < mse) {
          params += delta;
          mse = trial;
          mu = std::max(mu / options.mu_decrease, options.mu_min);
          accepted = true;
          break;
        }
      }
      mu *= options.mu_increase;
    }
    if (!accepted) {
      net.SetParameters(params);
      result.stop = StopReason::kDampingCap;
      break;
    }
    result.trace.push_back(mse);
    if (mse < result.best_mse) {
      result.best_mse = mse;
      result.best_epoch = epoch;
      best = params;
    }
    if (options.on_epoch) options.on_epoch(epoch, mse, mu);
  }
  net.SetParameters(best);
  result.network = std::move(net);
  return result;
}

Eigen::MatrixXd InputMatrix(const data::TrainingSet& set) {
  const auto d = static_cast<Eigen::Index>(set.dimension());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(set.samples.size()), d);
  for (std::size_t s = 0; s < set.samples.size(); ++s) {
    const auto& in = set.samples[s].input;
    if (static_cast<Eigen::Index>(in.size()) != d) {
      throw DimensionMismatch("training sample has the wrong dimension");
    }
    for (Eigen::Index j = 0; j < d; ++j) x(static_cast<Eigen::Index>(s), j) = in[j];
  }
  return x;
}

Eigen::VectorXd TargetVector(const data::TrainingSet& set) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(set.samples.size()));
  for (std::size_t s = 0; s < set.samples.size(); ++s) y[s] = set.samples[s].target;
  return y;
}

TrainResult TrainLm(Network net, const data::TrainingSet& set,
                    const TrainOptions& options) {
  return TrainLm(std::move(net), InputMatrix(set), TargetVector(set), options);
}

void WriteNetwork(std::ostream& out, const Network& net) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "sizes";
  for (int s : net.sizes()) out << ' ' << s;
  out << "\nactivations";
  for (const auto& l : net.layers()) out << ' ' << ActivationName(l.activation);
  out << '\n';
  for (std::size_t j = 0; j < net.input_dimension(); ++j) {
    out << "input " << TransformName(net.transforms()[j]) << ' '
        << FormatDouble(net.lower()[j]) << ' ' << FormatDouble(net.upper()[j])
        << '\n';
  }
  for (const auto& [key, value] : net.metadata()) {
    out << "meta " << key << ' ' << value << '\n';
  }
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const Layer& layer = net.layers()[l];
    out << "layer " << l << '\n';
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      out << 'w';
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        out << ' ' << FormatDouble(layer.weights(i, j));
      }
      out << '\n';
    }
    out << 'b';
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      out << ' ' << FormatDouble(layer.bias[i]);
    }
    out << '\n';
  }
  out << "end\n";
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Tokens of the next line; the first must equal `tag`.
  std::vector<std::string> Expect(std::string_view tag) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw MalformedFile("network file ends before '" + std::string(tag) +
                          "' (line " + std::to_string(line_no_ + 1) + ")");
    }
    ++line_no_;
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);
    if (tokens.empty() || tokens[0] != tag) Fail("expected '" + std::string(tag) + "'");
    return tokens;
  }

  std::string Peek() {
    const auto pos = in_.tellg();
    std::string word;
    in_ >> word;
    in_.clear();
    in_.seekg(pos);
    return word;
  }

  double Number(const std::string& token) {
    const auto v = ParseDouble(token);
    if (!v) Fail("bad number '" + token + "'");
    return *v;
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw MalformedFile("network file line " + std::to_string(line_no_) +
                        ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

Network ReadNetwork(std::istream& in) {
  LineReader r(in);
  const auto header = r.Expect(kMagic);
  if (header.size() != 2) r.Fail("bad header");
  if (header[1] != std::to_string(kVersion)) {
    throw UnsupportedVersion("network file version " + header[1] +
                             " is not supported (expected " +
                             std::to_string(kVersion) + ")");
  }
  const auto size_tokens = r.Expect("sizes");
  std::vector<int> sizes;
  for (std::size_t k = 1; k < size_tokens.size(); ++k) {
    const double v = r.Number(size_tokens[k]);
    if (v < 1 || v != std::floor(v) || v > 1e6) r.Fail("bad layer size");
    sizes.push_back(static_cast<int>(v));
  }
  if (sizes.size() < 2 || sizes.back() != 1) r.Fail("bad topology");
  const auto act_tokens = r.Expect("activations");
  if (act_tokens.size() != sizes.size()) r.Fail("activation count mismatch");

  const auto d = static_cast<std::size_t>(sizes.front());
  std::vector<double> lower(d), upper(d);
  std::vector<InputTransform> transforms(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto t = r.Expect("input");
    if (t.size() != 4) r.Fail("bad input line");
    if (t[1] == "identity") {
      transforms[j] = InputTransform::kIdentity;
    } else if (t[1] == "lambda_seed") {
      transforms[j] = InputTransform::kLambdaSeed;
    } else {
      r.Fail("unknown input transform '" + t[1] + "'");
    }
    lower[j] = r.Number(t[2]);
    upper[j] = r.Number(t[3]);
  }

  Network net;
  try {
    net = Network(sizes, lower, upper, transforms);
  } catch (const Error& e) {
    r.Fail(e.what());
  }
  while (r.Peek() == "meta") {
    const auto t = r.Expect("meta");
    if (t.size() < 2) r.Fail("bad meta line");
    std::string value;
    for (std::size_t k = 2; k < t.size(); ++k) {
      if (k > 2) value += ' ';
      value += t[k];
    }
    net.metadata()[t[1]] = value;
  }

  std::vector<Layer>& layers = net.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto name = act_tokens[l + 1];
    if (name == "sigmoid") {
      layers[l].activation = Activation::kSigmoid;
    } else if (name == "linear") {
      layers[l].activation = Activation::kLinear;
    } else {
      r.Fail("unknown activation '" + name + "'");
    }
    r.Expect("layer");
    auto& w = layers[l].weights;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const auto t = r.Expect("w");
      if (static_cast<Eigen::Index>(t.size()) != w.cols() + 1) {
        r.Fail("weight row has the wrong length");
      }
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = r.Number(t[j + 1]);
    }
    const auto t = r.Expect("b");
    auto& b = layers[l].bias;
    if (static_cast<Eigen::Index>(t.size()) != b.size() + 1) {
      r.Fail("bias row has the wrong length");
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = r.Number(t[i + 1]);
  }
  r.Expect("end");

  return net;
}

void SaveNetwork(const std::string& path, const Network& net) {
  std::ofstream out(path);
  if (!out) throw MalformedFile("cannot write '" + path + "'");
  WriteNetwork(out, net);
  if (!out) throw MalformedFile("write to '" + path + "' failed");
}

Network LoadNetwork(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open '" + path + "'");
  return ReadNetwork(in);
}

}  // namespace deepcal::fnn

#ifndef DEEPCAL_FNN_H_
#define DEEPCAL_FNN_H_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "deepcal/dataset.h"
#include "deepcal/model.h"
#include "deepcal/quasirandom.h"

namespace deepcal::fnn {

enum class Activation { kSigmoid, kLinear };

// How a raw input is mapped before the min-max scaling to [-1, 1].
enum class InputTransform {
  kIdentity,
  // lambda -> 2/pi atan(lambda - 0.1), the seed u the box is drawn in.
  kLambdaSeed,
};

struct Layer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::kSigmoid;
};

// Fully connected network with sigmoid hidden layers, a linear scalar
// output and a fixed per-feature input normalization.
class Network {
 public:
  Network() = default;
  // sizes = {d_in, hidden..., 1}; all weights zero. `lower`/`upper` give the
  // input box in transformed units; transforms default to identity.
  Network(std::vector<int> sizes, std::vector<double> lower,
          std::vector<double> upper,
          std::vector<InputTransform> transforms = {});

  // d_in -> 20 -> 20 -> 20 -> 1 over the box of `ranges` (lambdas in seed
  // space).
  static Network Surrogate(Model model,
                           const quasirandom::ParameterRanges& ranges);

  std::size_t input_dimension() const { return lower_.size(); }
  std::vector<int> sizes() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<InputTransform>& transforms() const { return transforms_; }
  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const {
    return metadata_;
  }

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from UniformStream(seed, 0).
  void Initialize(std::uint64_t seed);

  // Weights row-major then bias, layer by layer.
  std::size_t parameter_count() const;
  Eigen::VectorXd Parameters() const;
  void SetParameters(const Eigen::VectorXd& params);

  // Throws DimensionMismatch.
  double Forward(std::span<const double> x) const;
  // One row per sample.
  Eigen::VectorXd ForwardBatch(const Eigen::MatrixXd& inputs) const;
  // Same on inputs already normalized, one column per sample.
  Eigen::VectorXd ForwardNormalized(const Eigen::MatrixXd& normalized) const;

  // Transformed and min-max scaled input; a degenerate box maps to 0.
  Eigen::VectorXd Normalize(std::span<const double> x) const;
  Eigen::MatrixXd NormalizeBatch(const Eigen::MatrixXd& inputs) const;
  bool InBox(std::span<const double> x) const;
  // Copy of x with every coordinate moved into the box.
  std::vector<double> Clamp(std::span<const double> x) const;

  // Column s holds d output / d parameters for normalized sample s; also
  // returns the outputs.
  Eigen::MatrixXd JacobianNormalized(const Eigen::MatrixXd& normalized,
                                     Eigen::VectorXd* outputs = nullptr) const;
  // Row per sample (inputs one row per sample).
  Eigen::MatrixXd Jacobian(const Eigen::MatrixXd& inputs) const;

 private:
  void CheckDimension(std::size_t n) const;
  double TransformInput(std::size_t j, double v) const;

  std::vector<Layer> layers_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<InputTransform> transforms_;
  std::map<std::string, std::string> metadata_;
};

struct TrainOptions {
  int max_epochs = 300;
  double mu_initial = 1e-3;
  double mu_increase = 10.0;
  double mu_decrease = 10.0;
  double mu_min = 1e-12;
  double mu_max = 1e10;
  double min_gradient = 1e-7;  // on the MSE gradient norm
  // Called after each epoch with (epoch, mse, mu).
  std::function<void(int, double, double)> on_epoch;
};

enum class StopReason { kMaxEpochs, kSmallGradient, kDampingCap };
std::string_view ToString(StopReason reason);

struct TrainResult {
  Network network;             // best-MSE snapshot
  std::vector<double> trace;   // MSE after epoch 0 (initial), 1, ...
  int best_epoch = 0;
  double best_mse = 0.0;
  StopReason stop = StopReason::kMaxEpochs;
};

// Levenberg-Marquardt on the mean squared error over the full batch.
// Throws NumericFailure on a non-finite loss or gradient and
// DimensionMismatch on shape errors.
TrainResult TrainLm(Network net, const Eigen::MatrixXd& inputs,
                    const Eigen::VectorXd& targets,
                    const TrainOptions& options = {});
TrainResult TrainLm(Network net, const data::TrainingSet& set,
                    const TrainOptions& options = {});

// Inputs (one row per sample) and targets of a training set.
Eigen::MatrixXd InputMatrix(const data::TrainingSet& set);
Eigen::VectorXd TargetVector(const data::TrainingSet& set);

double MeanSquaredError(const Network& net, const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets);

// Gradient of the MSE with respect to the parameters.
Eigen::VectorXd MseGradient(const Network& net, const Eigen::MatrixXd& inputs,
                            const Eigen::VectorXd& targets);
// Parameter step solving (J^T J + mu I) delta = -J^T r.
Eigen::VectorXd LmStep(const Network& net, const Eigen::MatrixXd& inputs,
                       const Eigen::VectorXd& targets, double mu);

// Text format: "deepcal-network 1" header, topology, activations, input
// transforms and box, metadata, weight rows and biases, "end".
void WriteNetwork(std::ostream& out, const Network& net);
// Throws MalformedFile or UnsupportedVersion.
Network ReadNetwork(std::istream& in);
void SaveNetwork(const std::string& path, const Network& net);
Network LoadNetwork(const std::string& path);

}  // namespace deepcal::fnn

#endif  // DEEPCAL_FNN_H_

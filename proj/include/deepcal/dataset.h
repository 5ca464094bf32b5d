#ifndef DEEPCAL_DATASET_H_
#define DEEPCAL_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deepcal/model.h"
#include "deepcal/quasirandom.h"

namespace deepcal::data {

// Everything needed to regenerate a training set bit for bit.
struct GenerationConfig {
  Model model = Model::kDuan;
  OptionKind kind = OptionKind::kCall;
  std::size_t n_samples = 10000;
  std::string profile = "calibration";
  quasirandom::ParameterRanges ranges = quasirandom::ParameterRanges::Calibration();
  std::size_t paths_per_price = 5000;
  std::uint64_t seed = 0;          // top-level seed
  std::uint64_t start_index = 1;   // first Halton position

  // Seed of the Monte Carlo paths; every sample is priced with it.
  std::uint64_t McSeed() const;

  friend bool operator==(const GenerationConfig&,
                         const GenerationConfig&) = default;
};

struct TrainingSample {
  std::vector<double> input;  // (m, tau, kappa, psi, gamma, theta, sigma0 [, alpha, lambda+, lambda-])
  double target = 0.0;        // log of the Monte Carlo relative price

  friend bool operator==(const TrainingSample&,
                         const TrainingSample&) = default;
};

// Parameter vectors that produced no sample.
struct SkipSummary {
  std::size_t domain = 0;      // sigma_t reached lambda_plus
  std::size_t inversion = 0;   // stdCTS table could not be built
  std::size_t zero_price = 0;  // every payoff was zero
  // Mean Halton coordinate of the skipped vectors, per input dimension.
  std::vector<double> mean_position;

  std::size_t total() const { return domain + inversion + zero_price; }
  friend bool operator==(const SkipSummary&, const SkipSummary&) = default;
};

struct TrainingSet {
  GenerationConfig config;
  SkipSummary skipped;
  std::vector<TrainingSample> samples;

  std::size_t dimension() const { return InputDimension(config.model); }
  double skip_rate() const;

  friend bool operator==(const TrainingSet&, const TrainingSet&) = default;
};

// Halton-sample the box, price each vector by Monte Carlo and keep log(V).
// Output order follows the sequence index regardless of scheduling.
TrainingSet GenerateTrainingSet(const GenerationConfig& config);

// Skip rates above this trigger a warning.
inline constexpr double kSkipWarningRate = 0.05;
// Message naming the dominant corner of the skipped vectors, when the skip
// rate exceeds kSkipWarningRate.
std::optional<std::string> SkipWarning(const TrainingSet& set);

// `# {json metadata}` line, a column header line, then one row per sample
// with the inputs and the target at full precision.
void WriteTrainingSet(std::ostream& out, const TrainingSet& set);
TrainingSet ReadTrainingSet(std::istream& in);
void SaveTrainingSet(const std::string& path, const TrainingSet& set);
TrainingSet LoadTrainingSet(const std::string& path);

}  // namespace deepcal::data

#endif  // DEEPCAL_DATASET_H_

#ifndef DEEPCAL_CALIBRATION_H_
#define DEEPCAL_CALIBRATION_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepcal/chain.h"
#include "deepcal/fnn.h"
#include "deepcal/garch_mcs.h"
#include "deepcal/model.h"
#include "deepcal/quasirandom.h"

namespace deepcal::calib {

// Call branch for m >= 1, put branch below.
OptionKind OtmKind(double m);

// Log relative prices log(V / S0) of a batch of (m, tau, kind) points.
class Pricer {
 public:
  virtual ~Pricer() = default;
  virtual Model model() const = 0;
  virtual std::string_view tag() const = 0;
  // `flags`, when given, is resized to points.size() and set to 1 where the
  // inputs had to be moved into the pricer's support. An MCS price of zero
  // yields -inf.
  virtual std::vector<double> LogPrices(
      const RiskNeutralParams& params,
      std::span<const garch::PricingPoint> points,
      std::vector<unsigned char>* flags = nullptr) const = 0;
};

// Evaluates the trained surrogates; calls use the call network and puts the
// put network. Inputs outside a network's box are clamped and flagged.
class AnnPricer : public Pricer {
 public:
  AnnPricer(std::optional<fnn::Network> call, std::optional<fnn::Network> put);

  Model model() const override { return model_; }
  std::string_view tag() const override { return "ann"; }
  std::vector<double> LogPrices(
      const RiskNeutralParams& params,
      std::span<const garch::PricingPoint> points,
      std::vector<unsigned char>* flags = nullptr) const override;

 private:
  Model model_ = Model::kDuan;
  std::optional<fnn::Network> call_;
  std::optional<fnn::Network> put_;
};

// Monte Carlo pricer with one fixed seed, so repeated evaluations share their
// random numbers.
class McsPricer : public Pricer {
 public:
  McsPricer(Model model, std::size_t n_paths, std::uint64_t seed);

  Model model() const override { return model_; }
  std::string_view tag() const override { return "mcs"; }
  std::vector<double> LogPrices(
      const RiskNeutralParams& params,
      std::span<const garch::PricingPoint> points,
      std::vector<unsigned char>* flags = nullptr) const override;

  std::size_t n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Model model_;
  std::size_t n_paths_;
  std::uint64_t seed_;
};

// Predicted log relative price of the OTM option at (m, tau).
double OtmValue(double m, double tau, const RiskNeutralParams& params,
                const Pricer& pricer);

// (m, tau, OTM kind) of every quote.
std::vector<garch::PricingPoint> OtmPoints(const OptionChain& chain);

// Relative errors (model - market) / market of the log relative prices.
std::vector<double> RelativeResiduals(const OptionChain& chain,
                                      std::span<const double> model_log_prices);

// sqrt of the summed squared relative residuals. Throws EmptyChain.
double RelRmse(const OptionChain& chain, const RiskNeutralParams& params,
               const Pricer& pricer);

inline constexpr double kMaxCalibrationLambda = 1e4;

// Box over the calibrated parameters. Lambdas are searched in seed space
// u with lambda = tan(u pi / 2) + 0.1, u capped so that lambda <= 1e4.
struct CalibrationBounds {
  quasirandom::Interval kappa{0.0, 1e-5};
  quasirandom::Interval psi{0.1, 0.4};
  quasirandom::Interval gamma{0.5, 0.9999};
  quasirandom::Interval theta{0.0, 0.8};
  quasirandom::Interval sigma0{1e-6, 0.04};
  quasirandom::Interval alpha{0.01, 1.999};
  quasirandom::Interval u_lambda_plus{0.0, 1.0};
  quasirandom::Interval u_lambda_minus{0.0, 1.0};

  // The sampling box of the original study.
  static CalibrationBounds Table1();
  // Table1 with theta up to 3.0.
  static CalibrationBounds PaperEmpirical();
  // "table1" or "paper-empirical". Throws InvalidParams.
  static CalibrationBounds Profile(std::string_view name);

  // Number of free coordinates: 5 for Duan, 8 for CTS.
  static std::size_t Dimension(Model model);
  // Unit-cube point to parameters; alpha within 1e-3 of 1 is moved to
  // 1 +- 1e-3.
  RiskNeutralParams FromUnit(Model model, std::span<const double> z) const;
  std::vector<double> ToUnit(const RiskNeutralParams& params) const;
  bool Contains(const RiskNeutralParams& params) const;
};

struct CalibrationOptions {
  CalibrationBounds bounds = CalibrationBounds::Table1();
  std::size_t starts = 5;     // Halton-placed starting points
  int max_iterations = 200;   // per start
  std::uint64_t seed = 0;     // selects the Halton window of the starts
  std::optional<RiskNeutralParams> initial;  // tried before the Halton starts
  // Forward-difference step in unit coordinates; 0 picks 1e-6 for the ANN
  // pricer and 1e-4 for the MCS pricer.
  double fd_step = 0.0;
  // Relative residual assigned to every quote when the pricer fails or
  // returns a non-finite log price.
  double penalty = 10.0;
};

struct CalibrationResult {
  std::string date;
  RiskNeutralParams params;
  double rel_rmse = 0.0;
  int iterations = 0;  // summed over starts
  bool converged = false;
  std::size_t flagged_quotes = 0;
  std::string pricer;
  std::size_t n_quotes = 0;
  std::vector<double> residuals;  // relative, per quote
  std::size_t best_start = 0;
};

// Projected Levenberg-Marquardt on the relative residuals in unit-box
// coordinates, from `options.initial` (if any) and the Halton starts. The best
// result is returned; `converged` is false if its run hit the iteration cap.
CalibrationResult Calibrate(const OptionChain& chain, const Pricer& pricer,
                            const CalibrationOptions& options = {});

// Result CSV: date, theta, kappa, xi, zeta, sigma0 [, alpha, lambda_plus,
// lambda_minus], rel_rmse, iterations, converged, flagged_quotes, pricer,
// n_quotes.
void WriteResultHeader(std::ostream& out, Model model);
void WriteResultRow(std::ostream& out, const CalibrationResult& result);
// Reads rows written by WriteResultHeader/WriteResultRow; residuals are not
// stored and come back empty. Throws ParseError.
std::vector<CalibrationResult> ReadResults(std::istream& in);

}  // namespace deepcal::calib

#endif  // DEEPCAL_CALIBRATION_H_

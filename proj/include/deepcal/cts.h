#ifndef DEEPCAL_CTS_H_
#define DEEPCAL_CTS_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace deepcal::cts {

// Parameters of the standard classical tempered stable law stdCTS(alpha,
// lambda_plus, lambda_minus): zero mean, unit variance.
struct CtsParams {
  double alpha = 1.5;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;

  // Throws InvalidParams unless 0 < alpha < 2, |alpha - 1| >= 1e-3 and
  // 0 < lambda <= 1e6 on both sides.
  void Validate() const;

  friend bool operator==(const CtsParams&, const CtsParams&) = default;
};

inline constexpr double kMinAlphaDistanceFromOne = 1e-3;
inline constexpr double kMaxLambda = 1e6;

// log E[exp(i u Z)] for complex u. On the real line this is the log of the
// characteristic function; at u = -i x it is the log-Laplace transform.
// Principal branch for the complex powers.
std::complex<double> CharacteristicExponent(std::complex<double> u,
                                            const CtsParams& p);

// E[exp(i u Z)] for Z ~ stdCTS(p).
std::complex<double> CfStdCts(double u, const CtsParams& p);

// l(x) = log E[exp(x Z)], defined for -lambda_minus < x < lambda_plus.
// Throws DomainError outside that interval.
double LogLaplace(double x, const CtsParams& p);

// l(x) with the parameter-only terms precomputed, for use in inner loops.
// Performs no domain check; callers must keep -lambda_minus < x < lambda_plus.
class LogLaplaceFunction {
 public:
  explicit LogLaplaceFunction(const CtsParams& p);
  double operator()(double x) const;
  double lambda_plus() const { return lambda_plus_; }
  double lambda_minus() const { return lambda_minus_; }

 private:
  double alpha_, lambda_plus_, lambda_minus_;
  double lp_pow_alpha_, lm_pow_alpha_, drift_, jump_scale_;
};

// Third cumulant E[(Z - EZ)^3] in closed form.
double ThirdCumulant(const CtsParams& p);

// Piecewise-linear inverse CDF of stdCTS tabulated from a Fourier-inverted
// density. Immutable once built; safe to share between threads.
class InverseCdfTable {
 public:
  static constexpr std::size_t kDefaultResolution = std::size_t{1} << 16;
  static constexpr double kDefaultTailCutoff = 1e-7;

  // Deterministic for identical inputs. Throws InversionFailure when the
  // recovered density does not integrate to 1 within 1e-3.
  static InverseCdfTable Build(const CtsParams& p,
                               std::size_t resolution = kDefaultResolution,
                               double tail_cutoff = kDefaultTailCutoff);

  // Quantile at probability u in (0, 1); linear extrapolation past the
  // truncated tails.
  double Quantile(double u) const;

  // Moments of the piecewise-linear quantile function over (0, 1).
  double Mean() const;
  double Variance() const;

  const CtsParams& params() const { return params_; }
  double tail_cutoff() const { return tail_cutoff_; }
  std::span<const double> probabilities() const { return probs_; }
  std::span<const double> quantiles() const { return quants_; }
  // Integral of the clamped density before renormalization.
  double recovered_mass() const { return recovered_mass_; }

 private:
  InverseCdfTable() = default;
  void BuildGuide();

  CtsParams params_;
  double tail_cutoff_ = kDefaultTailCutoff;
  double recovered_mass_ = 1.0;
  std::vector<double> probs_;
  std::vector<double> quants_;
  // guide_[k] = first segment whose upper probability exceeds k / guide size.
  std::vector<std::uint32_t> guide_;
};

// n stdCTS draws by inverse transform of the uniform stream keyed by seed.
std::vector<double> SampleStdCts(const CtsParams& p, std::size_t n,
                                 std::uint64_t seed);
std::vector<double> SampleStdCts(const InverseCdfTable& table, std::size_t n,
                                 std::uint64_t seed);

}  // namespace deepcal::cts

#endif  // DEEPCAL_CTS_H_

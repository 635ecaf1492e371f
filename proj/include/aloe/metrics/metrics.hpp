#pragma once

#include <span>
#include <string>
#include <vector>

namespace aloe::metrics {

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

// Judge ratings of one evaluation case; ratings[k-1] is the turn-k score.
struct CaseScores {
  std::string case_id;
  std::vector<int> ratings;
};

// AL(k) for k = 1..K, each in [1, 5].
struct AlignmentCurve {
  std::vector<double> values;
  std::size_t case_count = 0;

  std::size_t turns() const noexcept { return values.size(); }
  // Throws InvalidRating if any value lies outside [1, 5].
  void validate() const;
};

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;

  double predict(double x) const noexcept { return intercept + slope * x; }
};

// Mean turn-k rating over all cases. Throws MissingScore(case_id, k) when a
// case has no turn-k rating and InvalidRating for values outside 1..5.
double alignment_level(std::span<const CaseScores> cases, int k);

AlignmentCurve alignment_curve(std::span<const CaseScores> cases, int max_turns);

double mean(std::span<const double> values);

// Ordinary least squares y = intercept + slope * x. R^2 = 1 - SS_res/SS_tot,
// defined as 0 when SS_tot = 0, clamped to [0, 1]. Throws LengthMismatch or
// DegenerateAbscissa (fewer than two points, or all x equal).
RegressionFit fit_least_squares(std::span<const double> xs, std::span<const double> ys);

// Regression of AL(k) on k = 1..K: slope is the improvement rate.
RegressionFit fit_ir(std::span<const double> al);
RegressionFit fit_ir(const AlignmentCurve& curve);

enum class Normalization {
  // (AL(k) - min) / (max - min) over the whole series.
  Global,
  // min/max taken over the prefix 1..k only; N-AL(1) := 0.
  Prefix,
};

// Min-max scaled series. A zero range maps to 0.
std::vector<double> normalize_al(std::span<const double> al, Normalization mode = Normalization::Global);

// Chance-corrected agreement over categories 1..5. Returns 1.0 when chance
// agreement is total and observed agreement is perfect. Throws
// LengthMismatch for unequal or empty inputs and InvalidRating for values
// outside 1..5.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

namespace kernels {

// Fits every row of a row-major matrix of curves (n x turns) against
// k = 1..turns. `out` must hold n fits.
void fit_ir_batch_serial(std::span<const double> curves, std::size_t turns, std::span<RegressionFit> out);
void fit_ir_batch_parallel(std::span<const double> curves, std::size_t turns, std::span<RegressionFit> out);

}  // namespace kernels

}  // namespace aloe::metrics

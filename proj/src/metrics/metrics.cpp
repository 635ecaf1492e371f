#include "aloe/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "aloe/common/error.hpp"

namespace aloe::metrics {

namespace {

void check_rating(int r, const std::string& where) {
  if (r < kMinRating || r > kMaxRating)
    throw Error(ErrorCode::InvalidRating, "rating " + std::to_string(r) + " outside 1..5 at " + where);
}

// Fit against x = 1..n without materializing the abscissae.
RegressionFit fit_turn_series(const double* y, std::size_t n) {
  if (n < 2) throw Error(ErrorCode::DegenerateAbscissa, "need at least two turns to fit, got " + std::to_string(n));
  const double nd = static_cast<double>(n);
  const double x_mean = (nd + 1.0) / 2.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) y_mean += y[i];
  y_mean /= nd;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - x_mean;
    const double dy = y[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.predict(static_cast<double>(i + 1));
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 0.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

}  // namespace

void AlignmentCurve::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= kMinRating && values[i] <= kMaxRating))
      throw Error(ErrorCode::InvalidRating, "AL(" + std::to_string(i + 1) + ") = " + std::to_string(values[i]) +
                                                " outside [1, 5]");
  }
}

double alignment_level(std::span<const CaseScores> cases, int k) {
  if (cases.empty()) throw Error(ErrorCode::InvalidArgument, "alignment level over zero cases");
  if (k < 1) throw Error(ErrorCode::IndexOutOfRange, "turn index must be >= 1");
  const auto idx = static_cast<std::size_t>(k - 1);
  long long sum = 0;
  for (const auto& c : cases) {
    if (idx >= c.ratings.size())
      throw Error(ErrorCode::MissingScore, "case " + c.case_id + " has no score at turn " + std::to_string(k));
    check_rating(c.ratings[idx], "case " + c.case_id + " turn " + std::to_string(k));
    sum += c.ratings[idx];
  }
  return static_cast<double>(sum) / static_cast<double>(cases.size());
}

AlignmentCurve alignment_curve(std::span<const CaseScores> cases, int max_turns) {
  AlignmentCurve curve;
  curve.case_count = cases.size();
  curve.values.reserve(static_cast<std::size_t>(std::max(max_turns, 0)));
  for (int k = 1; k <= max_turns; ++k) curve.values.push_back(alignment_level(cases, k));
  return curve;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "mean of an empty series");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

RegressionFit fit_least_squares(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(xs.size()) + " abscissae vs " + std::to_string(ys.size()) + " ordinates");
  if (xs.size() < 2) throw Error(ErrorCode::DegenerateAbscissa, "need at least two points to fit");
  const double n = static_cast<double>(xs.size());
  const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double y_mean = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x_mean;
    const double dy = ys[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorCode::DegenerateAbscissa, "all abscissae are identical");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.predict(xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 0.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return fit;
}

RegressionFit fit_ir(std::span<const double> al) { return fit_turn_series(al.data(), al.size()); }

RegressionFit fit_ir(const AlignmentCurve& curve) { return fit_ir(std::span<const double>(curve.values)); }

std::vector<double> normalize_al(std::span<const double> al, Normalization mode) {
  std::vector<double> out(al.size(), 0.0);
  if (al.empty()) return out;
  if (mode == Normalization::Global) {
    const auto [lo, hi] = std::minmax_element(al.begin(), al.end());
    const double range = *hi - *lo;
    if (range == 0.0) return out;
    for (std::size_t i = 0; i < al.size(); ++i) out[i] = (al[i] - *lo) / range;
    return out;
  }
  double lo = al[0];
  double hi = al[0];
  for (std::size_t i = 0; i < al.size(); ++i) {
    lo = std::min(lo, al[i]);
    hi = std::max(hi, al[i]);
    out[i] = hi == lo ? 0.0 : (al[i] - lo) / (hi - lo);
  }
  return out;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty())
    throw Error(ErrorCode::LengthMismatch, "kappa needs two equal-length, non-empty rating lists (got " +
                                               std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  constexpr std::size_t kCats = kMaxRating - kMinRating + 1;
  std::array<double, kCats> count_a{};
  std::array<double, kCats> count_b{};
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check_rating(a[i], "rater A item " + std::to_string(i));
    check_rating(b[i], "rater B item " + std::to_string(i));
    count_a[static_cast<std::size_t>(a[i] - kMinRating)] += 1.0;
    count_b[static_cast<std::size_t>(b[i] - kMinRating)] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = agree / n;
  double p_e = 0.0;
  for (std::size_t c = 0; c < kCats; ++c) p_e += (count_a[c] / n) * (count_b[c] / n);
  if (p_e == 1.0) return 1.0;  // both raters used one identical category throughout
  return (p_o - p_e) / (1.0 - p_e);
}

namespace kernels {

namespace {
void check_batch(std::span<const double> curves, std::size_t turns, std::span<RegressionFit> out) {
  if (turns == 0 || curves.size() % turns != 0 || curves.size() / turns != out.size())
    throw Error(ErrorCode::LengthMismatch, "curve matrix shape does not match output size");
}
}  // namespace

void fit_ir_batch_serial(std::span<const double> curves, std::size_t turns, std::span<RegressionFit> out) {
  check_batch(curves, turns, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fit_turn_series(curves.data() + i * turns, turns);
}

void fit_ir_batch_parallel(std::span<const double> curves, std::size_t turns, std::span<RegressionFit> out) {
  check_batch(curves, turns, out);
  if (turns < 2) throw Error(ErrorCode::DegenerateAbscissa, "need at least two turns to fit");
  const long long n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    out[row] = fit_turn_series(curves.data() + row * turns, turns);
  }
}

}  // namespace kernels

}  // namespace aloe::metrics

#include "aloe/training/losses.hpp"

#include <cmath>
#include <string>

#include "aloe/common/error.hpp"

namespace aloe::training {

namespace {

void check_logprobs(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw Error(ErrorCode::InvalidArgument, std::string(what) + "[" + std::to_string(i) + "] is not finite");
    if (values[i] > 0.0)
      throw Error(ErrorCode::PositiveLogProb,
                  std::string(what) + "[" + std::to_string(i) + "] = " + std::to_string(values[i]) + " > 0");
  }
}

}  // namespace

void LogProbSequence::validate() const {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "log-prob sequence is empty");
  check_logprobs(values, "logprobs");
}

double sft_loss(const LogProbSequence& target_logprobs) {
  if (target_logprobs.owner != ModelOwner::Policy)
    throw Error(ErrorCode::InvalidArgument, "SFT loss is computed on the policy model's log-probs");
  target_logprobs.validate();
  double sum = 0.0;
  for (double v : target_logprobs.values) sum += v;
  return -sum;
}

double neg_log_sigmoid(double x) {
  // softplus(-x) = max(-x, 0) + log1p(exp(-|x|))
  return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

DpoLoss dpo_loss(std::span<const double> policy_chosen, std::span<const double> ref_chosen,
                 std::span<const double> policy_rejected, std::span<const double> ref_rejected,
                 const DpoConfig& config) {
  const std::size_t k = policy_chosen.size();
  if (ref_chosen.size() != k || policy_rejected.size() != k || ref_rejected.size() != k)
    throw Error(ErrorCode::LengthMismatch, "DPO inputs must have equal per-turn lengths");
  if (!(config.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  check_logprobs(policy_chosen, "policy_chosen");
  check_logprobs(ref_chosen, "ref_chosen");
  check_logprobs(policy_rejected, "policy_rejected");
  check_logprobs(ref_rejected, "ref_rejected");

  DpoLoss out;
  out.per_turn.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double margin = (policy_chosen[i] - ref_chosen[i]) - (policy_rejected[i] - ref_rejected[i]);
    const double term = neg_log_sigmoid(config.beta * margin);
    out.per_turn.push_back(term);
    out.loss += term;
  }
  out.signed_sum = -out.loss;
  return out;
}

}  // namespace aloe::training

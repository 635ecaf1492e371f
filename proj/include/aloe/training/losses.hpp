#pragma once

#include <span>
#include <vector>

namespace aloe::training {

enum class ModelOwner { Policy, Reference };

// Per-token log probabilities of one target sequence.
struct LogProbSequence {
  std::vector<double> values;
  ModelOwner owner = ModelOwner::Policy;

  // Throws PositiveLogProb for any value > 0 and InvalidArgument if empty.
  void validate() const;
};

struct DpoConfig {
  double beta = 0.9;
};

// -sum(log p). Requires a policy-owned sequence.
double sft_loss(const LogProbSequence& target_logprobs);

// -log(sigmoid(x)) without overflow for large |x|.
double neg_log_sigmoid(double x);

struct DpoLoss {
  // sum_i -log sigmoid(beta * margin_i): the quantity to minimize.
  double loss = 0.0;
  // sum_i log sigmoid(beta * margin_i) as literally written (to maximize).
  double signed_sum = 0.0;
  std::vector<double> per_turn;
};

// Inputs are per-turn summed log-probs of the chosen (p_i) and rejected
// (r_i) responses under the policy and reference models; the turn margin is
// (policy_chosen - ref_chosen) - (policy_rejected - ref_rejected).
// Throws LengthMismatch, PositiveLogProb, or InvalidArgument (beta <= 0).
DpoLoss dpo_loss(std::span<const double> policy_chosen, std::span<const double> ref_chosen,
                 std::span<const double> policy_rejected, std::span<const double> ref_rejected,
                 const DpoConfig& config = {});

}  // namespace aloe::training

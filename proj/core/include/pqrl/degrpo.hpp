#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pqrl/policy.hpp"
#include "pqrl/reward.hpp"

namespace pqrl {

enum class KlSign : std::uint8_t {
  kPenalize,  // maximize surrogate - beta*KL (standard practice; default)
  kLiteral,   // maximize surrogate + beta*KL (the objective as printed)
};

enum class RemovalBoundary : std::uint8_t {
  kStrict,     // remove when s <  tau_remove (the algorithm listing; default)
  kInclusive,  // remove when s <= tau_remove (the threshold equation)
};

struct DEGRPOConfig {
  double lambda = 0.8;       // recurrent smoothing
  double tau_remove = 0.20;  // lower lifecycle threshold
  double tau_keep = 0.80;    // upper lifecycle threshold
  double delta = 0.50;       // reward decay factor
  double epsilon = 0.20;     // clip radius
  double beta = 0.01;        // KL coefficient
  int k = 6;                 // candidates per sample (>= 4)
  double gm_floor = 1e-8;    // per-factor floor for geometric means
  KlSign kl_sign = KlSign::kPenalize;
  RemovalBoundary removal = RemovalBoundary::kStrict;
  double initial_state = 0.5;

  // Empty means all policy parameters feed the gradient-sensitivity vectors.
  std::vector<std::size_t> tracked_params;

  void validate() const;  // throws ConfigError naming the offending field
};

// Ordered (winner, loser) candidate pair with cached rewards and sampling-time
// log-prob gradients over the tracked parameter subset.
struct PreferencePair {
  std::size_t winner;  // candidate indices
  std::size_t loser;
  double reward_winner;
  double reward_loser;
  std::vector<double> grad_winner;
  std::vector<double> grad_loser;
};

enum class DeltaMode : std::uint8_t { kRemoved, kDecay, kKeep };
const char* delta_mode_name(DeltaMode m);

enum class LifecycleStatus : std::uint8_t { kActive, kRemoved };

// One training sample plus its recurrent lifecycle state.
struct SampleRecord {
  int id = 0;
  Mat features;  // 1 x F
  StructuredResponse truth;
  bool informative = false;
  double state = 0.5;  // s, exponentially smoothed indicator
  LifecycleStatus status = LifecycleStatus::kActive;

  struct HistoryEntry {
    int iteration;
    double utility;
    double state;
    DeltaMode mode;
  };
  std::vector<HistoryEntry> history;
};

// --- per-sample quantities --------------------------------------------------

// All unordered candidate pairs with distinct rewards, winner = higher reward.
// Fewer than two distinct rewards yields an empty list (degenerate sample).
std::vector<PreferencePair> build_pairs(const std::vector<StructuredResponse>& candidates,
                                        const StructuredResponse& truth,
                                        const ChannelWeights& weights);

// Fills grad_winner/grad_loser from the policy's sampling-time gradients.
void attach_gradients(std::vector<PreferencePair>& pairs,
                      const std::vector<StructuredResponse>& candidates, const ToyPolicy& policy,
                      const Mat& x, const std::vector<std::size_t>& tracked);

// Geometric mean of |reward gaps| (log domain, per-factor floor).
double reward_separability(const std::vector<PreferencePair>& pairs, double gm_floor);
// Geometric mean of ||grad gaps||_2 (log domain, per-factor floor); the pairs
// must carry gradients (ContractError otherwise).
double gradient_sensitivity(const std::vector<PreferencePair>& pairs, double gm_floor);

double utility(double reward_sep, double grad_sens);

// Lower median of the batch utilities.
double batch_threshold(const std::vector<double>& utilities);

// s' = lambda*s + (1-lambda)*[U > tau], strict inequality.
double recurrent_update(double s, double u, double tau, double lambda);

// Pure threshold trichotomy (<= / >= boundaries as printed).
DeltaMode lifecycle_factor(double s, const DEGRPOConfig& cfg);

// Mean pairwise reward gap.
double mean_reward_gap(const std::vector<PreferencePair>& pairs);
// delta_factor * (mean gap - baseline_value).
double advantage(const std::vector<PreferencePair>& pairs, double baseline_value,
                 double delta_factor);

// --- objective ---------------------------------------------------------------

struct ObjectiveResult {
  double loss = 0.0;       // value to minimize (-J)
  double objective = 0.0;  // J
  double kl = 0.0;
  double mean_selected_logsig = 0.0;  // (1/|P|) sum of the selected log-sigmoid values
  std::vector<double> policy_grad;    // dloss/dtheta over pi_current's parameters
};

// Clipped pairwise surrogate with KL term, evaluated per sample:
//   J = (1/|P|) sum_p min(logsig(D)*A, logsig(clip(D,1-eps,1+eps))*A) +- beta*KL
// with D = rho_w - rho_l. Gradients flow to pi_current only. Throws
// NumericRangeError naming the pair when a ratio is non-finite.
ObjectiveResult objective(const std::vector<PreferencePair>& pairs,
                          const std::vector<StructuredResponse>& candidates, double advantage_value,
                          const ToyPolicy& current, const ToyPolicy& old_policy,
                          const ToyPolicy& ref_policy, const Mat& x, const DEGRPOConfig& cfg);

// Exposed for branch-anchoring tests: min(logsig(D)*A, logsig(clip(D))*A).
double pair_surrogate(double rho_w, double rho_l, double advantage_value, double epsilon);

// One squared-error step on the baseline toward the observed mean gap.
void baseline_update(ValueBaseline& baseline, const Mat& x, double target, double lr);

// --- batch step ----------------------------------------------------------------

enum class RunMode : std::uint8_t { kDeGrpo, kVanilla };
const char* run_mode_name(RunMode m);

// Names of invoked operations, collected to verify that vanilla never touches
// the DE-specific machinery.
using OpTrace = std::set<std::string>;

struct TrainingState {
  ToyPolicy policy;
  ToyPolicy reference;  // frozen at RL start
  ValueBaseline baseline;
  ChannelWeights weights;
  double lr_policy = 1e-2;
  double lr_baseline = 1e-2;
  double lr_alpha = 0.0;

  TrainingState(ToyPolicy p, ValueBaseline b)
      : policy(p), reference(p), baseline(std::move(b)) {}
};

struct StepSampleReport {
  int sample_id;
  double utility;
  double state;
  DeltaMode mode;
  double mean_reward;  // mean candidate reward
  bool degenerate;
};

struct StepReport {
  std::vector<StepSampleReport> samples;
  double batch_loss = 0.0;
  double mean_reward = 0.0;
  int visited = 0;
};

// One DE-GRPO iteration over a batch of active samples: utilities, recurrent
// state updates, removals, advantages, then a single optimizer step on the
// batch objective (pi_old is refreshed to pi_current at entry). Vanilla mode
// skips utilities/lifecycle (delta == 1, all samples stay active) but shares
// rewards, pairs, and the objective. Throws DataExhaustedError on an empty
// batch drawn from an exhausted active set.
StepReport degrpo_step(std::vector<SampleRecord*>& batch, TrainingState& state,
                       const DEGRPOConfig& cfg, RunMode mode, int iteration,
                       std::uint64_t run_seed, OpTrace* trace = nullptr);

}  // namespace pqrl

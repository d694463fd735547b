#pragma once

#include <string>
#include <vector>

#include "pqrl/degrpo.hpp"
#include "pqrl/vocab.hpp"

namespace pqrl {

// Synthetic dataset specification. Informative samples draw features near one
// of `clusters` hidden prototypes and take their ground truth from a hidden
// linear rule evaluated at the prototype (appearance/action tokens by sign,
// emotion by argmax against a zero "none" score); noise samples get uniform
// features and uniform truths. Deterministic under `seed`.
struct SyntheticDatasetSpec {
  std::size_t n = 512;
  double informative_fraction = 0.3;
  std::size_t feature_dim = 16;
  std::uint64_t seed = 7;
  std::size_t clusters = 16;
  double cluster_noise = 0.25;
  bool exclusive_emotion = true;

  void validate() const;
};

// The hidden rule, retained so tests can build the planted-oracle response.
struct HiddenRule {
  std::vector<Mat> channel_weights;  // F x V per channel
  std::vector<Mat> prototypes;       // one 1xF row per cluster

  StructuredResponse oracle_response(const Mat& prototype, const Vocabulary& vocab,
                                     bool exclusive_emotion) const;
};

struct SyntheticDataset {
  std::vector<SampleRecord> samples;
  HiddenRule rule;
  std::vector<int> cluster_of;  // -1 for noise samples

  std::vector<SampleRecord*> active_samples();
  std::vector<const SampleRecord*> informative_samples() const;
};

SyntheticDataset generate_dataset(const SyntheticDatasetSpec& spec, const Vocabulary& vocab);

// Dataset file: '#' header lines, one `id<TAB>features<TAB>f0 f1 ...` record
// per sample, then `id<TAB>channel<TAB>token` annotation records.
void save_dataset(const SyntheticDataset& ds, const SyntheticDatasetSpec& spec,
                  const Vocabulary& vocab, const std::string& path);
std::vector<SampleRecord> load_dataset(const std::string& path, const Vocabulary& vocab);

}  // namespace pqrl

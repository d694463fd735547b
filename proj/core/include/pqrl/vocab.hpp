#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pqrl/errors.hpp"

namespace pqrl {

// Annotation channels of a structured response.
enum class Channel : std::uint8_t { kAppearance = 0, kAction = 1, kEmotion = 2 };
constexpr std::array<Channel, 3> kChannels = {Channel::kAppearance, Channel::kAction,
                                              Channel::kEmotion};
const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

// Token lists per channel. The full vocabulary carries 103 tokens
// (48 appearance, 45 action, 10 emotion) with corpus occurrence counts;
// the small one keeps the 8 most frequent per channel for enumeration-scale
// test spaces.
class Vocabulary {
 public:
  static Vocabulary full();
  static Vocabulary small();
  static Vocabulary load(const std::string& path);   // lines: channel<TAB>token
  void save(const std::string& path) const;

  std::size_t channel_size(Channel c) const { return tokens_[idx(c)].size(); }
  std::size_t total_size() const;

  const std::vector<std::string>& tokens(Channel c) const { return tokens_[idx(c)]; }
  const std::vector<std::uint64_t>& counts(Channel c) const { return counts_[idx(c)]; }

  // Index of a token within its channel; VocabularyError names the token.
  std::size_t token_id(Channel c, const std::string& token) const;
  const std::string& token(Channel c, std::size_t id) const { return tokens_[idx(c)][id]; }
  bool contains(Channel c, const std::string& token) const;

  void add_token(Channel c, const std::string& token, std::uint64_t count = 0);

 private:
  static std::size_t idx(Channel c) { return static_cast<std::size_t>(c); }
  std::array<std::vector<std::string>, 3> tokens_;
  std::array<std::vector<std::uint64_t>, 3> counts_;
};

// A candidate answer decomposed into per-channel token sets, stored as
// inclusion masks sized to the vocabulary.
struct StructuredResponse {
  std::array<std::vector<std::uint8_t>, 3> included;

  static StructuredResponse empty(const Vocabulary& v);

  std::vector<std::uint8_t>& mask(Channel c) { return included[static_cast<std::size_t>(c)]; }
  const std::vector<std::uint8_t>& mask(Channel c) const {
    return included[static_cast<std::size_t>(c)];
  }
  void set(Channel c, std::size_t id, bool on = true) { mask(c)[id] = on ? 1 : 0; }
  bool has(Channel c, std::size_t id) const { return mask(c)[id] != 0; }
  std::size_t count(Channel c) const;
  bool operator==(const StructuredResponse& o) const { return included == o.included; }
};

// Annotation records: one `sample_id<TAB>channel<TAB>token` line per token.
struct AnnotationRecord {
  int sample_id;
  Channel channel;
  std::string token;
};

std::vector<AnnotationRecord> read_annotations(const std::string& path);

}  // namespace pqrl

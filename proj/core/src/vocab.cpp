#include "pqrl/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pqrl {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::kAppearance: return "appearance";
    case Channel::kAction: return "action";
    case Channel::kEmotion: return "emotion";
  }
  return "?";
}

Channel channel_from_name(const std::string& name) {
  for (Channel c : kChannels)
    if (name == channel_name(c)) return c;
  throw VocabularyError("unknown channel '" + name + "'");
}

namespace {

struct TokenCount {
  const char* token;
  std::uint64_t count;
};

// Corpus attribute statistics: 48 appearance + 45 action + 10 emotion = 103.
const TokenCount kAppearance[] = {
    {"blurry", 610}, {"male", 38434}, {"young", 15252}, {"chubby", 4880},
    {"pale_skin", 2440}, {"rosy_cheeks", 11591}, {"oval_face", 3660},
    {"receding_hairline", 7321}, {"bald", 1830}, {"bangs", 6711},
    {"black_hair", 16472}, {"blond_hair", 9761}, {"gray_hair", 7626},
    {"brown_hair", 20742}, {"straight_hair", 9151}, {"wavy_hair", 12201},
    {"long_hair", 13422}, {"arched_eyebrows", 20742}, {"bushy_eyebrows", 10371},
    {"bags_under_eyes", 5491}, {"eyeglasses", 6467}, {"sunglasses", 1834},
    {"narrow_eyes", 1220}, {"big_nose", 14621}, {"pointy_nose", 28674},
    {"high_cheekbones", 3672}, {"big_lips", 2928}, {"double_chin", 2671},
    {"no_beard", 35994}, {"5_o'clock_shadow", 7981}, {"goatee", 976},
    {"sideburns", 10981}, {"mustache", 2478}, {"heavy_makeup", 8541},
    {"wearing_earrings", 8976}, {"wearing_hat", 4271}, {"wearing_lipstick", 8663},
    {"wearing_necklace", 3663}, {"wearing_necktie", 3512}, {"wearing_mask", 1021},
    {"facial_tattoos", 244}, {"facial_hair", 126}, {"clean_shaven", 421},
    {"stubbly", 17784}, {"shaved_head", 276}, {"crew_cut", 7123},
    {"mullet", 62}, {"bald_spot", 42},
};

const TokenCount kAction[] = {
    {"blow", 1961}, {"chew", 1891}, {"close_eyes", 2441}, {"cough", 51},
    {"cry", 692}, {"drink", 1161}, {"eat", 1432}, {"frown", 9761},
    {"gaze", 9151}, {"glare", 3678}, {"head_wagging", 13421}, {"kiss", 918},
    {"laugh", 2189}, {"listen_to_music", 1513}, {"look_around", 7688},
    {"make_a_face", 107}, {"nod", 8907}, {"play_instrument", 102},
    {"read", 811}, {"shake_head", 7931}, {"shout", 2032}, {"sign", 1712},
    {"sing", 2001}, {"sleep", 599}, {"smile", 15241}, {"smoke", 1271},
    {"sneeze", 22}, {"sneer", 1621}, {"sniff", 2318}, {"talk", 46775},
    {"turn", 10981}, {"weep", 2271}, {"whisper", 2121}, {"wink", 2098},
    {"yawn", 92}, {"blush", 6421}, {"grin", 8724}, {"grimace", 102},
    {"scrunch", 812}, {"squint", 92}, {"stare", 651}, {"smirk", 61},
    {"sigh", 118}, {"pout", 141}, {"wince", 271},
};

const TokenCount kEmotion[] = {
    {"happy", 10798}, {"sad", 4472}, {"surprise", 726}, {"neutral", 39869},
    {"anger", 3629}, {"contempt", 469}, {"disgust", 1403}, {"fear", 836},
    {"shame", 31}, {"confusion", 36},
};

template <std::size_t N>
void fill_channel(Vocabulary& v, Channel c, const TokenCount (&table)[N]) {
  for (const auto& tc : table) v.add_token(c, tc.token, tc.count);
}

template <std::size_t N>
void fill_top8(Vocabulary& v, Channel c, const TokenCount (&table)[N]) {
  std::vector<std::size_t> order(N);
  for (std::size_t i = 0; i < N; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table[a].count > table[b].count; });
  for (std::size_t i = 0; i < 8; ++i)
    v.add_token(c, table[order[i]].token, table[order[i]].count);
}

}  // namespace

Vocabulary Vocabulary::full() {
  Vocabulary v;
  fill_channel(v, Channel::kAppearance, kAppearance);
  fill_channel(v, Channel::kAction, kAction);
  fill_channel(v, Channel::kEmotion, kEmotion);
  return v;
}

Vocabulary Vocabulary::small() {
  Vocabulary v;
  fill_top8(v, Channel::kAppearance, kAppearance);
  fill_top8(v, Channel::kAction, kAction);
  fill_top8(v, Channel::kEmotion, kEmotion);
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("vocabulary: cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ConfigError("vocabulary: malformed line '" + line + "' (expected channel<TAB>token)");
    v.add_token(channel_from_name(line.substr(0, tab)), line.substr(tab + 1));
  }
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("vocabulary: cannot open " + path + " for writing");
  for (Channel c : kChannels)
    for (const auto& t : tokens(c)) out << channel_name(c) << '\t' << t << '\n';
}

std::size_t Vocabulary::total_size() const {
  return tokens_[0].size() + tokens_[1].size() + tokens_[2].size();
}

std::size_t Vocabulary::token_id(Channel c, const std::string& token) const {
  const auto& ts = tokens_[idx(c)];
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i] == token) return i;
  throw VocabularyError("token '" + token + "' not in " + channel_name(c) + " vocabulary");
}

bool Vocabulary::contains(Channel c, const std::string& token) const {
  for (const auto& t : tokens_[idx(c)])
    if (t == token) return true;
  return false;
}

void Vocabulary::add_token(Channel c, const std::string& token, std::uint64_t count) {
  if (contains(c, token))
    throw VocabularyError("duplicate token '" + token + "' in " + channel_name(c));
  tokens_[idx(c)].push_back(token);
  counts_[idx(c)].push_back(count);
}

StructuredResponse StructuredResponse::empty(const Vocabulary& v) {
  StructuredResponse r;
  for (Channel c : kChannels)
    r.mask(c).assign(v.channel_size(c), 0);
  return r;
}

std::size_t StructuredResponse::count(Channel c) const {
  std::size_t n = 0;
  for (auto b : mask(c)) n += b;
  return n;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("annotations: cannot open " + path);
  std::vector<AnnotationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string id_s, ch_s, token;
    if (!std::getline(ss, id_s, '\t') || !std::getline(ss, ch_s, '\t') ||
        !std::getline(ss, token))
      throw ConfigError("annotations: malformed line '" + line + "'");
    if (ch_s == "features") continue;  // feature records live in the same file
    out.push_back({std::stoi(id_s), channel_from_name(ch_s), token});
  }
  return out;
}

}  // namespace pqrl

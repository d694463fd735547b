#include "pqrl/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pqrl/errors.hpp"

namespace pqrl {
namespace checkpoint {

namespace {

constexpr char kMagic[8] = {'P', 'Q', 'C', 'K', 'P', 'T', '\0', '\0'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save(const std::string& path, const std::vector<ParamTensor*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint64_t>(out, params.size());
  for (const auto* p : params) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod<std::uint64_t>(out, p->value.rows());
    write_pod<std::uint64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("checkpoint: write failed for " + path);
}

void write_manifest(const std::string& path, const std::vector<ParamTensor*>& params) {
  std::ofstream out(path);
  if (!out) throw ConfigError("checkpoint: cannot open " + path + " for writing");
  out << "# parameter manifest: name rows cols\n";
  for (const auto* p : params)
    out << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
}

void load(const std::string& path, const std::vector<ParamTensor*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("checkpoint: bad magic in " + path);
  auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  auto count = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto rows = read_pod<std::uint64_t>(in);
    auto cols = read_pod<std::uint64_t>(in);
    ParamTensor* target = nullptr;
    for (auto* p : params)
      if (p->name == name) target = p;
    if (target == nullptr) throw ConfigError("checkpoint: unknown tensor '" + name + "'");
    if (target->value.rows() != rows || target->value.cols() != cols)
      throw ConfigError("checkpoint: shape mismatch for '" + name + "'");
    in.read(reinterpret_cast<char*>(target->value.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw ConfigError("checkpoint: truncated tensor '" + name + "'");
  }
}

}  // namespace checkpoint
}  // namespace pqrl

#pragma once

#include <string>
#include <vector>

#include "pqrl/param.hpp"

namespace pqrl {

// Flat, versioned, length-prefixed binary parameter container plus a
// human-readable manifest (one "name rows cols" line per tensor).
//
// Layout (little-endian):
//   magic "PQCKPT\0\0" | u32 version | u64 tensor count
//   per tensor: u32 name length | name bytes | u64 rows | u64 cols | doubles (row-major)
namespace checkpoint {

constexpr std::uint32_t kVersion = 1;

void save(const std::string& path, const std::vector<ParamTensor*>& params);
void write_manifest(const std::string& path, const std::vector<ParamTensor*>& params);

// Loads values into matching names; throws ConfigError on magic/version
// mismatch, unknown tensor name, or shape mismatch.
void load(const std::string& path, const std::vector<ParamTensor*>& params);

}  // namespace checkpoint

}  // namespace pqrl

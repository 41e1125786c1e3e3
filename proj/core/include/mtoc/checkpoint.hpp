#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mtoc/nn.hpp"

namespace mtoc {

/// Self-describing binary container for named networks. Each section stores
/// the input shape, the full layer list, and raw little/big-native parameter
/// bytes behind an endianness tag, so a round trip is bit-exact and a file
/// from a foreign-endian machine is rejected instead of misread.
void save_networks(const std::filesystem::path& file,
                   const std::vector<std::pair<std::string, const Network*>>& sections);

std::vector<std::string> checkpoint_sections(const std::filesystem::path& file);

/// Reconstructs one named network (architecture + parameters).
Network load_network(const std::filesystem::path& file, const std::string& section);

}  // namespace mtoc

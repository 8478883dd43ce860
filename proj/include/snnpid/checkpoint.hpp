#pragma once

#include <string>

#include "snnpid/network.hpp"

namespace snnpid {

// Versioned, human-readable parameter file (JSON, flat named arrays). Used to
// exchange checkpoints between the trainer and the runtime.
void save_checkpoint(const std::string& path, const PidNetworkParams& params);

// Throws std::runtime_error on missing file, malformed JSON, unknown format
// version, or inconsistent array lengths.
PidNetworkParams load_checkpoint(const std::string& path);

}  // namespace snnpid

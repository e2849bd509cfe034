#pragma once

#include <cstdint>
#include <string>

#include "tsc/network.hpp"

namespace tsc {

// Self-describing textual dump of the network and its training progress.
struct Checkpoint {
    NetworkSpec spec;
    NetworkParams params;
    int64_t train_steps = 0;
    int encoder_size = 0;
    uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tsc

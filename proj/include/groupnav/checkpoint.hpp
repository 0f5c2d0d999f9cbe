#pragma once

#include <string>

#include "groupnav/neural.hpp"

namespace groupnav::net {

struct Checkpoint {
    PolicyParams params;
    AdamState adam;
};

// Text manifest (format line, optimizer step, tensor shapes) followed by the
// raw little-endian doubles: parameters, then Adam m, then Adam v.
void save_checkpoint(const std::string& path, const PolicyParams& params,
                     const AdamState& adam);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace groupnav::net

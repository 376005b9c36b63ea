#pragma once

#include <string>
#include <vector>

#include "qbsim/config.hpp"

namespace qbsim {

// Shipped scenario configs: read/write/rw master mixes crossed with the four
// burst patterns, plus a QoS stress scenario. Names look like "read_burst4".
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
// Canonical JSON text of one preset; throws SimError(ValidationError) for
// unknown names.
std::string preset_text(const std::string& name);
SimConfig preset_config(const std::string& name);

}  // namespace qbsim

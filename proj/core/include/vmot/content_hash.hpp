#pragma once

#include <string>

#include "vmot/instance.hpp"

namespace vmot {

// SHA-256 (hex) of a canonical serialization of the marginals (hexadecimal
// floating point, so bit-exact) and the payoff text. The direction is not
// part of the hash: MIN and MAX artifacts of one instance share it.
std::string instance_hash(const VmotInstance& instance);

std::string sha256_hex(const std::string& bytes);

}  // namespace vmot

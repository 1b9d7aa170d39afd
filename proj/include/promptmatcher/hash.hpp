#pragma once

#include <string>
#include <string_view>

namespace pm {

std::string sha256_hex(std::string_view data);

}  // namespace pm

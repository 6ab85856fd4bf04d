#pragma once

namespace mcltsgd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mcltsgd

#pragma once

namespace vb {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace vb

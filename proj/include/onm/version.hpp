#pragma once

namespace onm {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace onm

#pragma once

namespace hann {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hann

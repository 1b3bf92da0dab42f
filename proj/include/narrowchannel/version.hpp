#pragma once

namespace nchan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nchan

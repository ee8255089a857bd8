#pragma once

namespace pairtest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pairtest

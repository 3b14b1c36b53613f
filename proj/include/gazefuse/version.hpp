#pragma once

namespace gazefuse {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gazefuse

#pragma once

namespace t1t2 {

inline constexpr const char* version = "0.1.0";

} // namespace t1t2

#pragma once

namespace arealk {

inline constexpr const char* kVersion = "0.1.0";

} // namespace arealk

#pragma once

#include "arealk/rkad.hpp"

#include <string>

namespace arealk {

/// Writes a null distribution as a versioned JSON archive carrying the
/// study-area fingerprint, so an expensive null can be cached and shared.
void save_null(const NullDistribution& null_dist, const std::string& path);

/// Loads a null archive; refuses mismatched schema versions.
NullDistribution load_null(const std::string& path);

} // namespace arealk

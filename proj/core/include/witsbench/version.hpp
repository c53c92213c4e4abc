#pragma once

namespace witsbench {

/// Library version, recorded in every run manifest so that output files can
/// be traced back to the code that produced them.
inline constexpr int version_major = 1;
inline constexpr int version_minor = 0;
inline constexpr int version_patch = 0;
inline constexpr const char* version_string = "1.0.0";

}  // namespace witsbench

#pragma once

namespace boxdistill {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCheckpointFormat = "BXDCKPT1";
inline constexpr const char* kCacheFormat = "BXDPLC01";

}  // namespace boxdistill

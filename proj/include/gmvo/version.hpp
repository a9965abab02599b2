#pragma once

namespace gmvo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Format versions carried by the files this tool writes.
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr const char* kManifestFormatVersion = "1";
inline constexpr const char* kSyntheticSpecFormatVersion = "1";

}  // namespace gmvo

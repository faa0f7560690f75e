#ifndef ROLLING_VERSION_HPP
#define ROLLING_VERSION_HPP

namespace rolling {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace rolling

#endif

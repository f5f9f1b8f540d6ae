#ifndef STOKESHAPE_VERSION_HPP
#define STOKESHAPE_VERSION_HPP

namespace stokeshape {
inline constexpr const char* kVersion = "1.0.0";
}

#endif  // STOKESHAPE_VERSION_HPP

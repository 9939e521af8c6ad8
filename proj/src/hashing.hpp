// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace mg::detail
{

inline auto splitmix64(std::uint64_t x) -> std::uint64_t
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, for content keys.
class Fnv1a
{
  public:
    auto bytes(const void* data, std::size_t n) -> Fnv1a&
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i)
            _h = (_h ^ p[i]) * 0x100000001b3ULL;
        return *this;
    }
    auto text(std::string_view s) -> Fnv1a& { return bytes(s.data(), s.size()); }
    template <class T>
    auto value(const T& v) -> Fnv1a&
    {
        return bytes(&v, sizeof(T));
    }

    [[nodiscard]] auto digest() const -> std::uint64_t { return splitmix64(_h); }

  private:
    std::uint64_t _h = 0xcbf29ce484222325ULL;
};

/// Uniform double in [0, 1) from a hash.
inline auto unit_interval(std::uint64_t h) -> double
{
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace mg::detail

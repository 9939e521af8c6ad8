// SPDX-License-Identifier: Apache-2.0
#include "kernels_impl.hpp"

#include <memgrounder/errors.hpp>

#include <atomic>
#include <cstdlib>
#include <string>

namespace mg::kernels
{

namespace
{
    // -1: automatic selection; otherwise the forced Isa value.
    std::atomic<int> g_forced { -1 };

    auto cpu_has_avx2() -> bool
    {
#if defined(MG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    }

    auto detect() -> Isa
    {
        if (const char* env = std::getenv("MEMGROUNDER_ISA"))
            if (auto isa = parse_isa(env); isa && available(*isa))
                return *isa;
        if (available(Isa::avx2))
            return Isa::avx2;
        if (available(Isa::neon))
            return Isa::neon;
        return Isa::scalar;
    }

    void check_sizes(std::size_t n, std::size_t a, std::size_t b)
    {
        if (a != n || b != n)
            throw InvalidArgument("kernels: mismatched span lengths");
    }
} // namespace

auto isa_name(Isa isa) -> std::string_view
{
    switch (isa)
    {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

auto parse_isa(std::string_view name) -> std::optional<Isa>
{
    if (name == "scalar")
        return Isa::scalar;
    if (name == "avx2")
        return Isa::avx2;
    if (name == "neon")
        return Isa::neon;
    return std::nullopt;
}

auto available(Isa isa) -> bool
{
    switch (isa)
    {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
        case Isa::neon:
#if defined(MG_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

auto active_isa() -> Isa
{
    static const Isa detected = detect();
    const auto forced = g_forced.load(std::memory_order_relaxed);
    return forced >= 0 ? static_cast<Isa>(forced) : detected;
}

void force_isa(std::optional<Isa> isa)
{
    if (isa && !available(*isa))
        throw InvalidArgument("force_isa: " + std::string(isa_name(*isa)) + " is not available on this CPU");
    g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

void raycast(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
             std::span<std::int32_t> id_best)
{
    raycast(active_isa(), rays, boxes, t_best, id_best);
}

void raycast(Isa isa, const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
             std::span<std::int32_t> id_best)
{
    const auto n = rays.dx.size();
    check_sizes(n, rays.dy.size(), rays.dz.size());
    check_sizes(n, t_best.size(), id_best.size());
    if (!available(isa))
        throw InvalidArgument("raycast: " + std::string(isa_name(isa)) + " is not available");

    switch (isa)
    {
#if defined(MG_HAVE_AVX2)
        case Isa::avx2: detail::raycast_avx2(rays, boxes, t_best, id_best); return;
#endif
#if defined(MG_HAVE_NEON)
        case Isa::neon: detail::raycast_neon(rays, boxes, t_best, id_best); return;
#endif
        default: detail::raycast_scalar(rays, boxes, t_best, id_best, 0); return;
    }
}

void backproject(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                 std::span<const double> depth, std::span<double> x, std::span<double> y, std::span<double> z)
{
    backproject(active_isa(), rig, u, v, depth, x, y, z);
}

void backproject(Isa isa, const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                 std::span<const double> depth, std::span<double> x, std::span<double> y, std::span<double> z)
{
    const auto n = u.size();
    check_sizes(n, v.size(), depth.size());
    check_sizes(n, x.size(), y.size());
    check_sizes(n, z.size(), n);
    if (!available(isa))
        throw InvalidArgument("backproject: " + std::string(isa_name(isa)) + " is not available");

    switch (isa)
    {
#if defined(MG_HAVE_AVX2)
        case Isa::avx2: detail::backproject_avx2(rig, u, v, depth, x, y, z); return;
#endif
#if defined(MG_HAVE_NEON)
        case Isa::neon: detail::backproject_neon(rig, u, v, depth, x, y, z); return;
#endif
        default: detail::backproject_scalar(rig, u, v, depth, x, y, z, 0); return;
    }
}

} // namespace mg::kernels

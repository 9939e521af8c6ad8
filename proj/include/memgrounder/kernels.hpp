// SPDX-License-Identifier: Apache-2.0
#pragma once

// Data-parallel inner loops of the renderer and the back-projector.
//
// Every kernel has a scalar reference implementation and vector variants
// (AVX2 on x86-64, NEON on AArch64). The variants perform the same IEEE
// operations in the same order without fused multiply-add, so their output
// is bit-identical to the scalar path; the equivalence tests rely on that.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace mg::kernels
{

enum class Isa
{
    scalar,
    avx2,
    neon,
};

[[nodiscard]] auto isa_name(Isa isa) -> std::string_view;
[[nodiscard]] auto parse_isa(std::string_view name) -> std::optional<Isa>;

/// True when the variant was compiled in and the running CPU supports it.
[[nodiscard]] auto available(Isa isa) -> bool;

/// Best available variant, unless overridden by force_isa() or by the
/// MEMGROUNDER_ISA environment variable.
[[nodiscard]] auto active_isa() -> Isa;

/// Pins the dispatch target; std::nullopt restores automatic selection.
/// Throws InvalidArgument for an unavailable variant.
void force_isa(std::optional<Isa> isa);

/// One box prepared for slab tests. `rotation` is world-from-box, row-major.
struct SlabBox
{
    double center[3];
    double rotation[9];
    double half[3];
    std::int32_t id;
    /// Shell boxes are seen from inside: a ray starting inside reports its
    /// exit distance instead of being ignored.
    bool shell;
};

/// A fan of rays sharing one origin; directions are stored per component.
struct RayFan
{
    double origin[3];
    std::span<const double> dx;
    std::span<const double> dy;
    std::span<const double> dz;
};

/// Minimum accepted hit distance along a ray.
constexpr double kHitEpsilon = 1e-9;

/// Nearest-hit update: for each ray, t_best/id_best are replaced wherever a
/// box yields a strictly smaller hit distance. Boxes are tested in order, so
/// ties keep the earlier box.
void raycast(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
             std::span<std::int32_t> id_best);
void raycast(Isa isa, const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
             std::span<std::int32_t> id_best);

struct PinholeRig
{
    double fx, fy, cx, cy;
    /// World-from-camera rotation, row-major, and camera origin.
    double rotation[9];
    double translation[3];
};

/// Pixel (u, v) with z-depth d to world coordinates.
void backproject(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                 std::span<const double> depth, std::span<double> x, std::span<double> y, std::span<double> z);
void backproject(Isa isa, const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                 std::span<const double> depth, std::span<double> x, std::span<double> y, std::span<double> z);

} // namespace mg::kernels

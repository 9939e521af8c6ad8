// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memgrounder/kernels.hpp>

#include <cstddef>

namespace mg::kernels::detail
{

// Scalar min/max with the x86 minpd/maxpd contract: the second operand wins
// whenever the comparison is false, NaN included. Every variant uses this
// exact rule so results agree bit for bit.
inline auto min_pd(double a, double b) -> double { return a < b ? a : b; }
inline auto max_pd(double a, double b) -> double { return a > b ? a : b; }

// Ray-box test for one ray in box-local coordinates. Returns the accepted hit
// distance or +inf.
inline auto slab_hit(const SlabBox& box, const double o_local[3], double dx, double dy, double dz) -> double
{
    const auto& r = box.rotation;
    // local direction = R^T d
    const double lx = (r[0] * dx + r[3] * dy) + r[6] * dz;
    const double ly = (r[1] * dx + r[4] * dy) + r[7] * dz;
    const double lz = (r[2] * dx + r[5] * dy) + r[8] * dz;

    const double ix = 1.0 / lx;
    const double iy = 1.0 / ly;
    const double iz = 1.0 / lz;

    const double ax = (-box.half[0] - o_local[0]) * ix;
    const double bx = (box.half[0] - o_local[0]) * ix;
    const double ay = (-box.half[1] - o_local[1]) * iy;
    const double by = (box.half[1] - o_local[1]) * iy;
    const double az = (-box.half[2] - o_local[2]) * iz;
    const double bz = (box.half[2] - o_local[2]) * iz;

    const double t_near = max_pd(max_pd(min_pd(ax, bx), min_pd(ay, by)), min_pd(az, bz));
    const double t_far = min_pd(min_pd(max_pd(ax, bx), max_pd(ay, by)), max_pd(az, bz));

    constexpr double inf = __builtin_inf();
    if (!(t_far >= t_near))
        return inf;
    if (t_near > kHitEpsilon)
        return t_near;
    if (box.shell && t_far > kHitEpsilon)
        return t_far;
    return inf;
}

// Box-local ray origin, shared by all rays of a fan.
inline void local_origin(const SlabBox& box, const double origin[3], double out[3])
{
    const auto& r = box.rotation;
    const double px = origin[0] - box.center[0];
    const double py = origin[1] - box.center[1];
    const double pz = origin[2] - box.center[2];
    out[0] = (r[0] * px + r[3] * py) + r[6] * pz;
    out[1] = (r[1] * px + r[4] * py) + r[7] * pz;
    out[2] = (r[2] * px + r[5] * py) + r[8] * pz;
}

void raycast_scalar(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                    std::span<std::int32_t> id_best, std::size_t begin);
void backproject_scalar(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                        std::span<const double> depth, std::span<double> x, std::span<double> y,
                        std::span<double> z, std::size_t begin);

#if defined(MG_HAVE_AVX2)
void raycast_avx2(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                  std::span<std::int32_t> id_best);
void backproject_avx2(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                      std::span<const double> depth, std::span<double> x, std::span<double> y,
                      std::span<double> z);
#endif

#if defined(MG_HAVE_NEON)
void raycast_neon(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                  std::span<std::int32_t> id_best);
void backproject_neon(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                      std::span<const double> depth, std::span<double> x, std::span<double> y,
                      std::span<double> z);
#endif

} // namespace mg::kernels::detail

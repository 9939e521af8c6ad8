// SPDX-License-Identifier: Apache-2.0
// AArch64 Advanced SIMD variant. Two double lanes per register; min/max are
// spelled as compare+select to keep the scalar NaN rule.
#include "kernels_impl.hpp"

#include <arm_neon.h>

#include <limits>

namespace mg::kernels::detail
{

namespace
{
    constexpr std::size_t kLanes = 2;

    inline auto vmin(float64x2_t a, float64x2_t b) -> float64x2_t { return vbslq_f64(vcltq_f64(a, b), a, b); }
    inline auto vmax(float64x2_t a, float64x2_t b) -> float64x2_t { return vbslq_f64(vcgtq_f64(a, b), a, b); }

    inline auto dot3(float64x2_t a, float64x2_t x, float64x2_t b, float64x2_t y, float64x2_t c, float64x2_t z)
        -> float64x2_t
    {
        return vaddq_f64(vaddq_f64(vmulq_f64(a, x), vmulq_f64(b, y)), vmulq_f64(c, z));
    }
} // namespace

void raycast_neon(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                  std::span<std::int32_t> id_best)
{
    const auto n = rays.dx.size();
    const auto body = n - n % kLanes;

    const float64x2_t inf = vdupq_n_f64(std::numeric_limits<double>::infinity());
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t eps = vdupq_n_f64(kHitEpsilon);

    for (const auto& box: boxes)
    {
        double o_local[3];
        local_origin(box, rays.origin, o_local);
        const auto& r = box.rotation;

        const float64x2_t r0 = vdupq_n_f64(r[0]), r1 = vdupq_n_f64(r[1]), r2 = vdupq_n_f64(r[2]);
        const float64x2_t r3 = vdupq_n_f64(r[3]), r4 = vdupq_n_f64(r[4]), r5 = vdupq_n_f64(r[5]);
        const float64x2_t r6 = vdupq_n_f64(r[6]), r7 = vdupq_n_f64(r[7]), r8 = vdupq_n_f64(r[8]);

        const float64x2_t lo_x = vdupq_n_f64(-box.half[0] - o_local[0]);
        const float64x2_t hi_x = vdupq_n_f64(box.half[0] - o_local[0]);
        const float64x2_t lo_y = vdupq_n_f64(-box.half[1] - o_local[1]);
        const float64x2_t hi_y = vdupq_n_f64(box.half[1] - o_local[1]);
        const float64x2_t lo_z = vdupq_n_f64(-box.half[2] - o_local[2]);
        const float64x2_t hi_z = vdupq_n_f64(box.half[2] - o_local[2]);
        const uint64x2_t shell = vdupq_n_u64(box.shell ? ~0ULL : 0ULL);

        for (std::size_t i = 0; i < body; i += kLanes)
        {
            const float64x2_t dx = vld1q_f64(&rays.dx[i]);
            const float64x2_t dy = vld1q_f64(&rays.dy[i]);
            const float64x2_t dz = vld1q_f64(&rays.dz[i]);

            const float64x2_t ix = vdivq_f64(one, dot3(r0, dx, r3, dy, r6, dz));
            const float64x2_t iy = vdivq_f64(one, dot3(r1, dx, r4, dy, r7, dz));
            const float64x2_t iz = vdivq_f64(one, dot3(r2, dx, r5, dy, r8, dz));

            const float64x2_t ax = vmulq_f64(lo_x, ix), bx = vmulq_f64(hi_x, ix);
            const float64x2_t ay = vmulq_f64(lo_y, iy), by = vmulq_f64(hi_y, iy);
            const float64x2_t az = vmulq_f64(lo_z, iz), bz = vmulq_f64(hi_z, iz);

            const float64x2_t t_near = vmax(vmax(vmin(ax, bx), vmin(ay, by)), vmin(az, bz));
            const float64x2_t t_far = vmin(vmin(vmax(ax, bx), vmax(ay, by)), vmax(az, bz));

            const uint64x2_t ok = vcgeq_f64(t_far, t_near);
            const uint64x2_t near_hit = vandq_u64(ok, vcgtq_f64(t_near, eps));
            const uint64x2_t far_hit =
                vbicq_u64(vandq_u64(vandq_u64(ok, shell), vcgtq_f64(t_far, eps)), near_hit);

            float64x2_t t = vbslq_f64(near_hit, t_near, inf);
            t = vbslq_f64(far_hit, t_far, t);

            const float64x2_t best = vld1q_f64(&t_best[i]);
            const uint64x2_t better = vcltq_f64(t, best);
            vst1q_f64(&t_best[i], vbslq_f64(better, t, best));
            if (vgetq_lane_u64(better, 0))
                id_best[i] = box.id;
            if (vgetq_lane_u64(better, 1))
                id_best[i + 1] = box.id;
        }
    }

    raycast_scalar(rays, boxes, t_best, id_best, body);
}

void backproject_neon(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                      std::span<const double> depth, std::span<double> x, std::span<double> y,
                      std::span<double> z)
{
    const auto n = u.size();
    const auto body = n - n % kLanes;
    const auto& r = rig.rotation;

    const float64x2_t fx = vdupq_n_f64(rig.fx), fy = vdupq_n_f64(rig.fy);
    const float64x2_t cx = vdupq_n_f64(rig.cx), cy = vdupq_n_f64(rig.cy);
    const float64x2_t r0 = vdupq_n_f64(r[0]), r1 = vdupq_n_f64(r[1]), r2 = vdupq_n_f64(r[2]);
    const float64x2_t r3 = vdupq_n_f64(r[3]), r4 = vdupq_n_f64(r[4]), r5 = vdupq_n_f64(r[5]);
    const float64x2_t r6 = vdupq_n_f64(r[6]), r7 = vdupq_n_f64(r[7]), r8 = vdupq_n_f64(r[8]);
    const float64x2_t t0 = vdupq_n_f64(rig.translation[0]);
    const float64x2_t t1 = vdupq_n_f64(rig.translation[1]);
    const float64x2_t t2 = vdupq_n_f64(rig.translation[2]);

    for (std::size_t i = 0; i < body; i += kLanes)
    {
        const float64x2_t d = vld1q_f64(&depth[i]);
        const float64x2_t px = vdivq_f64(vmulq_f64(vsubq_f64(vld1q_f64(&u[i]), cx), d), fx);
        const float64x2_t py = vdivq_f64(vmulq_f64(vsubq_f64(vld1q_f64(&v[i]), cy), d), fy);
        vst1q_f64(&x[i], vaddq_f64(dot3(r0, px, r1, py, r2, d), t0));
        vst1q_f64(&y[i], vaddq_f64(dot3(r3, px, r4, py, r5, d), t1));
        vst1q_f64(&z[i], vaddq_f64(dot3(r6, px, r7, py, r8, d), t2));
    }

    backproject_scalar(rig, u, v, depth, x, y, z, body);
}

} // namespace mg::kernels::detail

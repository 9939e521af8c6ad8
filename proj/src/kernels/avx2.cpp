// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 only (no -mfma) so the arithmetic matches the scalar
// reference exactly.
#include "kernels_impl.hpp"

#include <immintrin.h>

#include <limits>

namespace mg::kernels::detail
{

namespace
{
    constexpr std::size_t kLanes = 4;
}

void raycast_avx2(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                  std::span<std::int32_t> id_best)
{
    const auto n = rays.dx.size();
    const auto body = n - n % kLanes;

    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d eps = _mm256_set1_pd(kHitEpsilon);

    for (const auto& box: boxes)
    {
        double o_local[3];
        local_origin(box, rays.origin, o_local);
        const auto& r = box.rotation;

        const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
        const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
        const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);

        const __m256d lo_x = _mm256_set1_pd(-box.half[0] - o_local[0]);
        const __m256d hi_x = _mm256_set1_pd(box.half[0] - o_local[0]);
        const __m256d lo_y = _mm256_set1_pd(-box.half[1] - o_local[1]);
        const __m256d hi_y = _mm256_set1_pd(box.half[1] - o_local[1]);
        const __m256d lo_z = _mm256_set1_pd(-box.half[2] - o_local[2]);
        const __m256d hi_z = _mm256_set1_pd(box.half[2] - o_local[2]);
        const __m256d shell = box.shell ? _mm256_castsi256_pd(_mm256_set1_epi64x(-1)) : _mm256_setzero_pd();

        for (std::size_t i = 0; i < body; i += kLanes)
        {
            const __m256d dx = _mm256_loadu_pd(&rays.dx[i]);
            const __m256d dy = _mm256_loadu_pd(&rays.dy[i]);
            const __m256d dz = _mm256_loadu_pd(&rays.dz[i]);

            const __m256d lx = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, dx), _mm256_mul_pd(r3, dy)),
                                             _mm256_mul_pd(r6, dz));
            const __m256d ly = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r1, dx), _mm256_mul_pd(r4, dy)),
                                             _mm256_mul_pd(r7, dz));
            const __m256d lz = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r2, dx), _mm256_mul_pd(r5, dy)),
                                             _mm256_mul_pd(r8, dz));

            const __m256d ix = _mm256_div_pd(one, lx);
            const __m256d iy = _mm256_div_pd(one, ly);
            const __m256d iz = _mm256_div_pd(one, lz);

            const __m256d ax = _mm256_mul_pd(lo_x, ix), bx = _mm256_mul_pd(hi_x, ix);
            const __m256d ay = _mm256_mul_pd(lo_y, iy), by = _mm256_mul_pd(hi_y, iy);
            const __m256d az = _mm256_mul_pd(lo_z, iz), bz = _mm256_mul_pd(hi_z, iz);

            const __m256d t_near = _mm256_max_pd(
                _mm256_max_pd(_mm256_min_pd(ax, bx), _mm256_min_pd(ay, by)), _mm256_min_pd(az, bz));
            const __m256d t_far = _mm256_min_pd(
                _mm256_min_pd(_mm256_max_pd(ax, bx), _mm256_max_pd(ay, by)), _mm256_max_pd(az, bz));

            const __m256d ok = _mm256_cmp_pd(t_far, t_near, _CMP_GE_OQ);
            const __m256d near_hit = _mm256_and_pd(ok, _mm256_cmp_pd(t_near, eps, _CMP_GT_OQ));
            const __m256d far_hit = _mm256_andnot_pd(
                near_hit, _mm256_and_pd(_mm256_and_pd(ok, shell), _mm256_cmp_pd(t_far, eps, _CMP_GT_OQ)));

            __m256d t = _mm256_blendv_pd(inf, t_near, near_hit);
            t = _mm256_blendv_pd(t, t_far, far_hit);

            const __m256d best = _mm256_loadu_pd(&t_best[i]);
            const __m256d better = _mm256_cmp_pd(t, best, _CMP_LT_OQ);
            const auto bits = _mm256_movemask_pd(better);
            if (bits == 0)
                continue;
            _mm256_storeu_pd(&t_best[i], _mm256_blendv_pd(best, t, better));
            for (std::size_t lane = 0; lane < kLanes; ++lane)
                if (bits & (1 << lane))
                    id_best[i + lane] = box.id;
        }
    }

    raycast_scalar(rays, boxes, t_best, id_best, body);
}

void backproject_avx2(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                      std::span<const double> depth, std::span<double> x, std::span<double> y,
                      std::span<double> z)
{
    const auto n = u.size();
    const auto body = n - n % kLanes;
    const auto& r = rig.rotation;

    const __m256d fx = _mm256_set1_pd(rig.fx), fy = _mm256_set1_pd(rig.fy);
    const __m256d cx = _mm256_set1_pd(rig.cx), cy = _mm256_set1_pd(rig.cy);
    const __m256d r0 = _mm256_set1_pd(r[0]), r1 = _mm256_set1_pd(r[1]), r2 = _mm256_set1_pd(r[2]);
    const __m256d r3 = _mm256_set1_pd(r[3]), r4 = _mm256_set1_pd(r[4]), r5 = _mm256_set1_pd(r[5]);
    const __m256d r6 = _mm256_set1_pd(r[6]), r7 = _mm256_set1_pd(r[7]), r8 = _mm256_set1_pd(r[8]);
    const __m256d t0 = _mm256_set1_pd(rig.translation[0]);
    const __m256d t1 = _mm256_set1_pd(rig.translation[1]);
    const __m256d t2 = _mm256_set1_pd(rig.translation[2]);

    for (std::size_t i = 0; i < body; i += kLanes)
    {
        const __m256d d = _mm256_loadu_pd(&depth[i]);
        const __m256d px = _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(&u[i]), cx), d), fx);
        const __m256d py = _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(&v[i]), cy), d), fy);

        const __m256d wx = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, px), _mm256_mul_pd(r1, py)), _mm256_mul_pd(r2, d)), t0);
        const __m256d wy = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r3, px), _mm256_mul_pd(r4, py)), _mm256_mul_pd(r5, d)), t1);
        const __m256d wz = _mm256_add_pd(
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r6, px), _mm256_mul_pd(r7, py)), _mm256_mul_pd(r8, d)), t2);

        _mm256_storeu_pd(&x[i], wx);
        _mm256_storeu_pd(&y[i], wy);
        _mm256_storeu_pd(&z[i], wz);
    }

    backproject_scalar(rig, u, v, depth, x, y, z, body);
}

} // namespace mg::kernels::detail

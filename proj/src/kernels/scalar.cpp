// SPDX-License-Identifier: Apache-2.0
#include "kernels_impl.hpp"

namespace mg::kernels::detail
{

void raycast_scalar(const RayFan& rays, std::span<const SlabBox> boxes, std::span<double> t_best,
                    std::span<std::int32_t> id_best, std::size_t begin)
{
    const auto n = rays.dx.size();
    for (const auto& box: boxes)
    {
        double o_local[3];
        local_origin(box, rays.origin, o_local);
        for (auto i = begin; i < n; ++i)
        {
            const auto t = slab_hit(box, o_local, rays.dx[i], rays.dy[i], rays.dz[i]);
            if (t < t_best[i])
            {
                t_best[i] = t;
                id_best[i] = box.id;
            }
        }
    }
}

void backproject_scalar(const PinholeRig& rig, std::span<const double> u, std::span<const double> v,
                        std::span<const double> depth, std::span<double> x, std::span<double> y,
                        std::span<double> z, std::size_t begin)
{
    const auto& r = rig.rotation;
    const auto& t = rig.translation;
    for (auto i = begin; i < u.size(); ++i)
    {
        const double d = depth[i];
        const double cx = ((u[i] - rig.cx) * d) / rig.fx;
        const double cy = ((v[i] - rig.cy) * d) / rig.fy;
        x[i] = ((r[0] * cx + r[1] * cy) + r[2] * d) + t[0];
        y[i] = ((r[3] * cx + r[4] * cy) + r[5] * d) + t[1];
        z[i] = ((r[6] * cx + r[7] * cy) + r[8] * d) + t[2];
    }
}

} // namespace mg::kernels::detail

#include "blurgs/unseen/unseen.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace blurgs {
namespace {

using testing::make_camera;

std::vector<double> random_colors(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

TEST(ParallelView, RejectsAlphaOutsideOpenInterval) {
    const Camera a = make_camera(16, 16, 20);
    EXPECT_THROW(make_parallel_view(a, a, 0.0), std::domain_error);
    EXPECT_THROW(make_parallel_view(a, a, 1.0), std::domain_error);
    EXPECT_THROW(make_parallel_view(a, a, -0.2), std::domain_error);
}

TEST(ParallelView, SmallAlphaApproachesFirstCamera) {
    const Camera a = make_camera(16, 16, 20, Vec3(0, 0, 0), Vec3(0.3, 0, 2));
    const Camera b = make_camera(16, 16, 20, Vec3(1, 0.2, 0), Vec3(0, 0, 2));
    const Camera c = make_parallel_view(a, b, 1e-9);
    EXPECT_LT((c.center() - a.center()).norm(), 1e-8);
    EXPECT_LT((c.rotation - a.rotation).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(c.intrinsics, a.intrinsics);
}

TEST(ParallelView, MidpointCenter) {
    const Camera a = make_camera(16, 16, 20, Vec3(0, 0, 0), Vec3(0, 0, 5));
    const Camera b = make_camera(16, 16, 20, Vec3(2, 0, 0), Vec3(2, 0, 5));
    const Camera c = make_parallel_view(a, b, 0.5);
    EXPECT_NEAR(c.center().x(), 1.0, 1e-12);
    EXPECT_NEAR(c.center().y(), 0.0, 1e-12);
    EXPECT_NEAR(c.center().z(), 0.0, 1e-12);
}

TEST(ParallelView, HalvesRelativeRotation) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Camera a = make_camera(16, 16, 20);
        a.rotation = quat::to_matrix(testing::random_quat(rng));
        Camera b = a;
        const Vec3 axis = Vec3::Random().normalized();
        const double angle = 0.1 + 2.5 * trial / 20.0;
        b.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * a.rotation;
        const Camera c = make_parallel_view(a, b, 0.5);
        const Eigen::AngleAxisd rel(c.rotation * a.rotation.transpose());
        EXPECT_NEAR(rel.angle(), angle / 2, 1e-9);
        EXPECT_LT((rel.axis() - axis).norm(), 1e-7);
    }
}

TEST(PerpendicularView, StraightLineAlongXGivesVerticalOffset) {
    std::vector<Camera> traj;
    for (int i = 0; i < 5; ++i) traj.push_back(make_camera(32, 32, 40, Vec3(0.25 * i, 0, 0), Vec3(0.25 * i, 0, 3)));
    for (int i = 0; i < 5; ++i) {
        const Vec3 n = perpendicular_direction(traj, i, PerpendicularMode::ViewPlane);
        EXPECT_NEAR(std::abs(n.y()), 1.0, 1e-12);
        const Camera c = make_perpendicular_view(traj[i], traj, i, 0.7, 3.0);
        const Vec3 shift = c.center() - traj[i].center();
        EXPECT_NEAR(std::abs(shift.y()), 0.7, 1e-12);
        EXPECT_NEAR(shift.x(), 0.0, 1e-12);
        EXPECT_NEAR(shift.z(), 0.0, 1e-12);
        EXPECT_EQ(c.frame, traj[i].frame);
    }
}

TEST(PerpendicularView, SidesAreOpposite) {
    std::vector<Camera> traj;
    for (int i = 0; i < 3; ++i) traj.push_back(make_camera(32, 32, 40, Vec3(0.25 * i, 0, 0), Vec3(0.25 * i, 0, 3)));
    const Camera p = make_perpendicular_view(traj[1], traj, 1, 0.5, 3.0, 1);
    const Camera m = make_perpendicular_view(traj[1], traj, 1, 0.5, 3.0, -1);
    EXPECT_LT((p.center() + m.center() - 2 * traj[1].center()).norm(), 1e-12);
}

TEST(PerpendicularView, ZeroOffsetIsSource) {
    std::vector<Camera> traj{make_camera(16, 16, 20), make_camera(16, 16, 20, Vec3(1, 0, 0), Vec3(1, 0, 1))};
    const Camera c = make_perpendicular_view(traj[0], traj, 0, 0.0, 2.0);
    EXPECT_EQ(c.rotation, traj[0].rotation);
    EXPECT_EQ(c.translation, traj[0].translation);
}

TEST(PerpendicularView, KeepsLookAtPointInView) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Camera> traj;
        const Vec3 target(u(rng), u(rng), 4.0);
        for (int i = 0; i < 4; ++i) {
            traj.push_back(make_camera(64, 64, 70, Vec3(0.3 * i + 0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)), target));
        }
        const int idx = trial % 4;
        const double look_depth = (target - traj[idx].center()).norm();
        for (auto mode : {PerpendicularMode::ViewPlane, PerpendicularMode::Horizontal}) {
            const Camera c = make_perpendicular_view(traj[idx], traj, idx, 0.5 + 0.5 * (u(rng) + 1) / 2, look_depth,
                                                     trial % 2 ? 1 : -1, mode);
            const auto p = project(target, c);
            ASSERT_TRUE(p.has_value());
            EXPECT_NEAR(p->pixel.x(), 31.5, 1e-6);
            EXPECT_NEAR(p->pixel.y(), 31.5, 1e-6);
            EXPECT_LT((c.rotation * c.rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(PerpendicularView, StationaryTrajectoryFallsBackToCameraRight) {
    const Camera a = make_camera(16, 16, 20);
    std::vector<Camera> traj{a, a, a};
    const Vec3 n = perpendicular_direction(traj, 1, PerpendicularMode::ViewPlane);
    EXPECT_LT((n - Vec3(a.rotation.row(0).transpose())).norm(), 1e-12);
    std::vector<Camera> single{a};
    EXPECT_THROW(make_perpendicular_view(a, single, 0, 0.5, 1.0), std::invalid_argument);
}

TEST(Warp, IdentityReproducesSource) {
    std::mt19937_64 rng(5);
    const Camera cam = make_camera(24, 20, 30, Vec3(0.1, -0.2, 0), Vec3(0.3, 0.1, 2));
    const std::size_t n = 24 * 20;
    const auto color = random_colors(rng, 3 * n), mask = random_colors(rng, n);
    std::vector<double> depth = random_colors(rng, n);
    for (double& d : depth) d = 1.0 + 3.0 * d;
    const WarpedTargets w = warp_to_unseen(color, mask, depth, cam, cam);
    std::size_t covered = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (w.valid[p] == 0.0) continue;
        ++covered;
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(w.color[3 * p + c], color[3 * p + c], 1e-6);
        EXPECT_NEAR(w.mask[p], mask[p], 1e-6);
    }
    EXPECT_EQ(covered, n);
}

TEST(Warp, FrontoParallelPlaneShiftsByDisparity) {
    const int w = 48, h = 32;
    const double f = 40, z = 2.5, dx = 0.1;
    const Camera s = make_camera(w, h, f);
    const Camera t = make_camera(w, h, f, Vec3(dx, 0, 0), Vec3(dx, 0, 1));
    std::vector<double> color(3 * w * h), mask(w * h, 0.0), depth(w * h, z);
    // Horizontal ramp: the warped value encodes the source column.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) color[3 * (y * w + x) + c] = x / double(w);
        }
    }
    const WarpedTargets out = warp_to_unseen(color, mask, depth, s, t);
    const double disparity = f * dx / z;
    for (int y = 4; y < h - 4; ++y) {
        for (int x = 4; x < w - 8; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            ASSERT_EQ(out.valid[p], 1.0);
            const double source_col = out.color[3 * p] * w;
            EXPECT_NEAR(source_col - x, disparity, 0.5);
        }
    }
}

TEST(Warp, ConstantImageStaysConstant) {
    std::mt19937_64 rng(8);
    const Camera s = make_camera(32, 32, 35);
    const Camera t = make_camera(32, 32, 35, Vec3(0.2, 0.1, -0.1), Vec3(0.1, 0, 3));
    std::vector<double> color(3 * 32 * 32, 0.37), mask(32 * 32, 1.0);
    std::vector<double> depth = random_colors(rng, 32 * 32);
    for (double& d : depth) d = 2.0 + d;
    const WarpedTargets out = warp_to_unseen(color, mask, depth, s, t);
    std::size_t covered = 0;
    for (std::size_t p = 0; p < out.valid.size(); ++p) {
        if (out.valid[p] == 0.0) {
            EXPECT_EQ(out.color[3 * p], 0.0);
            continue;
        }
        ++covered;
        EXPECT_NEAR(out.color[3 * p + 1], 0.37, 1e-12);
        EXPECT_NEAR(out.mask[p], 1.0, 1e-12);
    }
    EXPECT_GT(covered, 0u);
}

TEST(Warp, ResultsStayWithinSourceRange) {
    std::mt19937_64 rng(9);
    const Camera s = make_camera(24, 24, 30);
    const Camera t = make_camera(24, 24, 30, Vec3(-0.15, 0.05, 0), Vec3(0, 0, 2));
    const auto color = random_colors(rng, 3 * 24 * 24), mask = random_colors(rng, 24 * 24);
    std::vector<double> depth = random_colors(rng, 24 * 24);
    for (double& d : depth) d = 1.5 + d;
    const WarpedTargets out = warp_to_unseen(color, mask, depth, s, t);
    const auto [lo, hi] = std::minmax_element(color.begin(), color.end());
    for (double v : out.color) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, *hi + 1e-12);
    }
    for (std::size_t p = 0; p < out.valid.size(); ++p) {
        if (out.valid[p] == 1.0) {
            for (int c = 0; c < 3; ++c) EXPECT_GE(out.color[3 * p + c], *lo - 1e-12);
        }
    }
}

TEST(Warp, ZBufferKeepsForeground) {
    // A near square in front of a far plane: after the shift the near square must win.
    const int w = 32, h = 32;
    const Camera s = make_camera(w, h, 30);
    const Camera t = make_camera(w, h, 30, Vec3(0.1, 0, 0), Vec3(0.1, 0, 1));
    std::vector<double> color(3 * w * h, 0.0), mask(w * h, 0.0), depth(w * h, 6.0);
    for (int y = 10; y < 22; ++y) {
        for (int x = 10; x < 22; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            depth[p] = 1.5;
            mask[p] = 1.0;
            for (int c = 0; c < 3; ++c) color[3 * p + c] = 1.0;
        }
    }
    const WarpedTargets out = warp_to_unseen(color, mask, depth, s, t);
    // The square moves left by 30 * 0.1 / 1.5 = 2 px; the background by 0.5 px.
    for (int y = 12; y < 20; ++y) {
        for (int x = 9; x < 19; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            EXPECT_NEAR(out.mask[p], 1.0, 1e-12) << x << "," << y;
        }
    }
}

TEST(Warp, RejectsMismatchedBuffers) {
    const Camera cam = make_camera(8, 8, 10);
    std::vector<double> color(3 * 64), mask(63), depth(64, 1.0);
    EXPECT_THROW(warp_to_unseen(color, mask, depth, cam, cam), std::invalid_argument);
}

}  // namespace
}  // namespace blurgs

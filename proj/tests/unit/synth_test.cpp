#include "blurgs/blur/blur_field.hpp"
#include "blurgs/metrics/image_metrics.hpp"
#include "blurgs/render/render.hpp"
#include "blurgs/synth/kernels.hpp"
#include "blurgs/synth/sequence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace blurgs {
namespace {

void expect_simplex(const std::vector<double>& k) {
    double sum = 0.0;
    for (double v : k) {
        EXPECT_GE(v, 0.0);
        sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(DefocusKernel, TinySigmaIsDelta) {
    const auto k = make_defocus_kernel(1e-3, 9);
    EXPECT_NEAR(k[40], 1.0, 1e-15);
    expect_simplex(k);
}

TEST(DefocusKernel, InvariantUnderQuarterTurn) {
    const auto k = make_defocus_kernel(1.7, 7);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) EXPECT_DOUBLE_EQ(k[i * 7 + j], k[j * 7 + (6 - i)]);
    }
}

TEST(DefocusKernel, MatchesDirectFormula) {
    const auto k = make_defocus_kernel(1.5, 9);
    double z = 0.0;
    for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) z += std::exp(-(i * i + j * j) / 4.5);
    }
    for (int i = -4; i <= 4; ++i) {
        for (int j = -4; j <= 4; ++j) EXPECT_NEAR(k[(i + 4) * 9 + j + 4], std::exp(-(i * i + j * j) / 4.5) / z, 1e-15);
    }
    EXPECT_THROW(make_defocus_kernel(0.0, 9), std::invalid_argument);
    EXPECT_THROW(make_defocus_kernel(1.0, 8), std::invalid_argument);
}

TEST(MotionKernel, UnitLengthIsDelta) {
    const auto k = make_motion_kernel(0.7, 1.0, 9);
    EXPECT_NEAR(k[40], 1.0, 1e-12);
}

TEST(MotionKernel, HorizontalLineStaysOnCenterRow) {
    const auto k = make_motion_kernel(0.0, 5.0, 9);
    expect_simplex(k);
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
            if (i != 4) EXPECT_EQ(k[i * 9 + j], 0.0);
            if (i == 4 && std::abs(j - 4) > 2) EXPECT_EQ(k[i * 9 + j], 0.0);
        }
    }
    // Interior taps of the line carry equal mass.
    EXPECT_NEAR(k[4 * 9 + 3], k[4 * 9 + 4], 1e-3);
    EXPECT_NEAR(k[4 * 9 + 3], k[4 * 9 + 5], 1e-12);
}

TEST(MotionKernel, QuarterTurnIsTranspose) {
    const double pi = std::numbers::pi;
    EXPECT_EQ(make_motion_kernel(0.0, 5.0, 9), transpose_kernel(make_motion_kernel(pi / 2, 5.0, 9)));
    // Transposition reflects the angle about the diagonal.
    for (double theta : {0.2, 0.5, 1.1, 2.4}) {
        const auto a = make_motion_kernel(theta, 5.0, 9);
        const auto b = transpose_kernel(make_motion_kernel(pi / 2 - theta, 5.0, 9));
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
        expect_simplex(a);
    }
}

TEST(MotionKernel, RejectsBadLengths) {
    EXPECT_THROW(make_motion_kernel(0.0, 10.0, 9), std::invalid_argument);
    EXPECT_THROW(make_motion_kernel(0.0, 0.5, 9), std::invalid_argument);
    EXPECT_THROW(make_motion_kernel(0.0, 3.0, 6), std::invalid_argument);
    KernelSpec s;
    s.type = "bokeh";
    EXPECT_THROW(s.build(), std::invalid_argument);
}

TEST(BuildScene, UnknownPresetRejected) {
    SynthConfig c;
    c.preset = "teapot";
    EXPECT_THROW(build_scene(c), std::invalid_argument);
}

TEST(BuildScene, CameraCentersHaveUnitDiagonal) {
    const GtScene gt = build_scene(SynthConfig{});
    Eigen::AlignedBox3d box;
    for (const Camera& c : gt.cameras) box.extend(c.center());
    EXPECT_NEAR(box.diagonal().norm(), 1.0, 1e-12);
    EXPECT_EQ(gt.novel_cameras.size(), gt.cameras.size());
}

TEST(BuildScene, SingleObjectPresetsUseOneBasis) {
    for (const char* preset : {"orbiting-spheres", "sliding-sprite"}) {
        SynthConfig c;
        c.preset = preset;
        const GtScene gt = build_scene(c);
        EXPECT_EQ(gt.scene.num_bases(), 1);
        EXPECT_EQ(gt.num_objects, 1);
        validate_scene(gt.scene);
    }
}

TEST(BuildScene, TwoBodyLogitsSelectEachObjectsBasis) {
    SynthConfig c;
    c.preset = "two-body";
    const GtScene gt = build_scene(c);
    ASSERT_EQ(gt.scene.num_bases(), 2);
    for (std::size_t g = 0; g < gt.scene.dynamics.size(); g += 17) {
        for (int t = 1; t < gt.scene.num_frames(); ++t) {
            const RigidTransform blended = compose_motion(gt.scene.logits(g), gt.scene.bases, t);
            const RigidTransform own = gt.scene.bases.transform(t, gt.object_of[g]);
            EXPECT_LT((blended.translation - own.translation).norm(), 1e-12);
            EXPECT_LT(quat::angle_between(blended.rotation, own.rotation), 1e-7);
        }
    }
}

TEST(Sequence, StaticVariantHasEmptyMasks) {
    SynthConfig c;
    c.static_scene = true;
    c.frames = 3;
    const SyntheticSequence seq = generate_sequence(c);
    EXPECT_EQ(seq.gt.scene.dynamics.size(), 0u);
    for (const auto& m : seq.mask) {
        for (double v : m) EXPECT_EQ(v, 0.0);
    }
}

TEST(Sequence, SpriteCenterDepthMatchesCardDepth) {
    SynthConfig c;
    c.preset = "sliding-sprite";
    c.frames = 2;
    const SyntheticSequence seq = generate_sequence(c);
    const Camera& cam = seq.gt.cameras[0];
    const Vec3 center = seq.gt.object_centers[0];
    const auto p = project(center, cam);
    ASSERT_TRUE(p.has_value());
    const int x = static_cast<int>(std::lround(p->pixel.x())), y = static_cast<int>(std::lround(p->pixel.y()));
    // The card faces this camera, so every point on it has the camera depth of its center.
    const double analytic = p->depth;
    EXPECT_NEAR(seq.depth[0][y * c.width + x], analytic, 1e-3);
    EXPECT_EQ(seq.mask[0][y * c.width + x], 1.0);
}

TEST(Sequence, BlurredFramesAreTheDeclaredConvolution) {
    SynthConfig c;
    c.frames = 3;
    const SyntheticSequence seq = generate_sequence(c);
    const BlurField field = BlurField::broadcast(c.width, c.height, seq.kernel);
    for (int t = 0; t < seq.frames(); ++t) {
        const auto expected = convolve_blur(seq.sharp[t], field);
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(seq.blurred[t][i], quantize8(expected[i]));
    }
}

TEST(Sequence, DeterministicUnderSeed) {
    SynthConfig c;
    c.frames = 3;
    const SyntheticSequence a = generate_sequence(c), b = generate_sequence(c);
    EXPECT_EQ(a.blurred, b.blurred);
    EXPECT_EQ(a.depth, b.depth);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.novel_sharp, b.novel_sharp);
    c.seed = 8;
    EXPECT_NE(generate_sequence(c).sharp, a.sharp);
}

TEST(Sequence, DefaultBlursDegradeByAtLeastTwoDecibels) {
    for (const char* type : {"gaussian", "motion"}) {
        for (const char* preset : {"orbiting-spheres", "sliding-sprite", "two-body"}) {
            SynthConfig c;
            c.preset = preset;
            c.frames = 2;
            c.kernel.type = type;
            const SyntheticSequence seq = generate_sequence(c);
            const RenderOutput raw = render(seq.gt.scene, seq.gt.cameras[0], 0, RenderSettings{});
            const double quantized = psnr(raw.image, seq.sharp[0]);
            const double blurred = psnr(seq.sharp[0], seq.blurred[0]);
            EXPECT_TRUE(std::isfinite(blurred));
            EXPECT_LE(blurred, quantized - 2.0) << preset << " " << type;
        }
    }
}

TEST(Sequence, MasksCoverDynamicProjections) {
    // The background lies behind every object, so the mask equals the coverage of a
    // dynamic-only render.
    SynthConfig c;
    c.preset = "two-body";
    c.frames = 4;
    const SyntheticSequence seq = generate_sequence(c);
    Scene dynamic_only = seq.gt.scene;
    dynamic_only.statics = GaussianCloud{};
    std::size_t covered = 0;
    for (int t = 0; t < seq.frames(); ++t) {
        const RenderOutput out = render(dynamic_only, seq.gt.cameras[t], t, RenderSettings{});
        for (std::size_t p = 0; p < out.pixels(); ++p) {
            EXPECT_EQ(seq.mask[t][p], out.alpha[p] > 0.5 ? 1.0 : 0.0);
            covered += seq.mask[t][p] > 0.5;
        }
    }
    EXPECT_GT(covered, 100u);
}

}  // namespace
}  // namespace blurgs

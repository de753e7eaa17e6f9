// Toy denoiser and the image round trip: pixel-shuffle codec, quantization
// bounds, and end-to-end embed -> sample -> decode -> invert -> recover.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "latentmark/errors.hpp"
#include "latentmark/image.hpp"
#include "latentmark/pipeline.hpp"
#include "latentmark/rng.hpp"
#include "latentmark/schedule.hpp"
#include "latentmark/toy_denoiser.hpp"
#include "latentmark/watermark.hpp"
#include "oracles.hpp"

using namespace latentmark;

namespace {

LatentTensor random_latent(Shape s, std::uint64_t seed) {
    SeededRng rng(seed);
    return standard_normal_tensor(s, rng);
}

oracles::ScalarModel scalar_model(const ToyDenoiser& toy, const DiffusionSchedule& schedule) {
    oracles::ScalarModel sm;
    sm.h = toy.latent_shape().h;
    sm.w = toy.latent_shape().w;
    sm.m = toy.mix_matrix();
    sm.gamma = toy.gamma();
    sm.alpha_bar = schedule.alpha_bar;
    return sm;
}

std::vector<double> to_vec(const LatentTensor& t) {
    return std::vector<double>(t.values().begin(), t.values().end());
}

WatermarkConfig small_config(std::uint32_t f_c, std::uint32_t f_hw, std::uint32_t l,
                             Shape shape) {
    WatermarkConfig cfg;
    cfg.f_c = f_c;
    cfg.f_hw = f_hw;
    cfg.l = l;
    cfg.latent_shape = shape;
    for (std::size_t i = 0; i < cfg.key.size(); ++i) cfg.key[i] = std::uint8_t(3 * i + 1);
    for (std::size_t i = 0; i < cfg.nonce.size(); ++i) cfg.nonce[i] = std::uint8_t(0x90 + i);
    cfg.validate();
    return cfg;
}

}  // namespace

TEST_CASE("toy denoiser rejects unusable shapes and gains") {
    CHECK_THROWS_AS(ToyDenoiser(Shape{3, 4, 4}), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 5, 4}), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 4, 5}), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 0, 4}), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 4, 0}), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 4, 4}, 0.0), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 4, 4}, 1.0), ConfigError);
    CHECK_THROWS_AS(ToyDenoiser(Shape{4, 4, 4}, -0.5), ConfigError);
    CHECK_NOTHROW(ToyDenoiser(Shape{4, 4, 4}, 0.8));
}

TEST_CASE("toy denoiser eps rejects mismatched input") {
    ToyDenoiser toy(Shape{4, 4, 4});
    CHECK_THROWS_AS(toy.eps(LatentTensor(Shape{4, 4, 6}), 1), ShapeError);
}

TEST_CASE("toy mix matrix is orthogonal and seed-stable") {
    ToyDenoiser toy(Shape{4, 4, 4});
    const auto& m = toy.mix_matrix();
    for (int r = 0; r < 16; ++r) {
        for (int s = 0; s < 16; ++s) {
            double dot = 0.0;
            for (int j = 0; j < 16; ++j) dot += m[r * 16 + j] * m[s * 16 + j];
            CHECK(std::abs(dot - (r == s ? 1.0 : 0.0)) < 1e-12);
        }
    }

    ToyDenoiser again(Shape{4, 8, 8});  // shape does not enter the matrix
    CHECK(again.mix_matrix() == m);
    ToyDenoiser other(Shape{4, 4, 4}, 0.8, 12);
    CHECK(other.mix_matrix() != m);
}

TEST_CASE("zero latent isolates the time offset") {
    // With v = 0 the mix contributes nothing and every site sees
    // eps[r] = gamma * tanh(c(t)[r]) exactly.
    ToyDenoiser toy(Shape{4, 4, 6});
    const LatentTensor z(Shape{4, 4, 6});
    for (int t : {0, 1, 7, 50}) {
        const auto c = toy.time_offset(t);
        const LatentTensor e = toy.eps(z, t);
        for (std::uint32_t by = 0; by < 2; ++by) {
            for (std::uint32_t bx = 0; bx < 3; ++bx) {
                for (int r = 0; r < 16; ++r) {
                    const double want = toy.gamma() * std::tanh(c[r]);
                    CHECK(e.at(r / 4, 2 * by + (r % 4) / 2, 2 * bx + r % 2) == want);
                }
            }
        }
    }
}

TEST_CASE("time offset matches the reference formula") {
    ToyDenoiser toy(Shape{4, 4, 4});
    for (int t : {0, 1, 13, 50, 999}) {
        const auto got = toy.time_offset(t);
        const auto want = oracles::scalar_time_offset(t);
        for (int r = 0; r < 16; ++r) CHECK(got[r] == want[r]);
    }
}

TEST_CASE("eps matches the scalar reference bit for bit") {
    const Shape shape{4, 6, 8};
    ToyDenoiser toy(shape);
    const DiffusionSchedule schedule = DiffusionSchedule::linear_beta(10);
    const oracles::ScalarModel sm = scalar_model(toy, schedule);
    const LatentTensor z = random_latent(shape, 41);
    for (int t : {1, 5, 10}) {
        const std::vector<double> want = oracles::scalar_eps(sm, to_vec(z), t);
        const LatentTensor got = toy.eps(z, t);
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(got.values()[i] == want[i]);
    }
}

TEST_CASE("eps output is bounded by gamma") {
    ToyDenoiser toy(Shape{4, 8, 8}, 0.8);
    const LatentTensor z = random_latent(Shape{4, 8, 8}, 99);
    const LatentTensor big = [&] {
        LatentTensor t = z;
        t.apply([](double v) { return 50.0 * v; });
        return t;
    }();
    // tanh saturates to exactly 1.0 in double for large inputs, so the bound
    // is inclusive
    for (const LatentTensor* in : {&z, &big}) {
        const LatentTensor e = toy.eps(*in, 3);
        CHECK(max_abs(e) <= 0.8);
        CHECK(e.all_finite());
    }
}

TEST_CASE("decoding the zero latent gives mid-gray") {
    // 0 maps to 127.5; the integer image rounds half away from zero to 128.
    const LatentTensor z(Shape{4, 3, 5});
    const FloatImage f = decode_latent_float(z);
    CHECK(f.h == 6);
    CHECK(f.w == 10);
    for (double v : f.pix) CHECK(v == 127.5);
    const ImageTensor img = decode_latent(z);
    for (std::uint8_t v : img.pix) CHECK(v == 128);
}

TEST_CASE("pixel shuffle places each latent value where expected") {
    const Shape shape{4, 2, 3};
    LatentTensor z(shape);
    for (std::size_t i = 0; i < z.values().size(); ++i) z.values()[i] = 0.1 * double(i) - 1.0;
    const FloatImage f = decode_latent_float(z);
    for (std::uint32_t ch = 0; ch < 4; ++ch) {
        for (std::uint32_t y = 0; y < shape.h; ++y) {
            for (std::uint32_t x = 0; x < shape.w; ++x) {
                const double want = (z.at(ch, y, x) + 4.0) * (255.0 / 8.0);
                CHECK(f.at(2 * y + ch / 2, 2 * x + ch % 2) == want);
            }
        }
    }
}

TEST_CASE("float image codec inverts the affine map") {
    const LatentTensor z = random_latent(Shape{4, 8, 8}, 5);
    const LatentTensor back = encode_float_image(decode_latent_float(z));
    CHECK(max_abs_diff(back, z) < 1e-12);
}

TEST_CASE("quantization error stays within half a bucket") {
    // One 8-bit step covers 8/255 latent units, so rounding moves a value
    // at most 4/255 = 8/510, plus clamping at the +/-4 boundary which this
    // latent never exceeds after the clamp below.
    LatentTensor z = random_latent(Shape{4, 16, 16}, 6);
    z.apply([](double v) { return std::clamp(v, -4.0, 4.0); });
    z.values()[0] = -4.0;
    z.values()[1] = 4.0;
    z.values()[2] = 0.0;
    const LatentTensor back = encode_image(decode_latent(z));
    CHECK(max_abs_diff(back, z) <= 8.0 / 510.0 + 1e-12);
}

TEST_CASE("out-of-range latents clamp to the pixel range") {
    LatentTensor z(Shape{4, 1, 1});
    z.values()[0] = -9.0;
    z.values()[1] = 9.0;
    const ImageTensor img = decode_latent(z);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(0, 1) == 255);
}

TEST_CASE("image codec rejects unusable shapes") {
    CHECK_THROWS_AS(decode_latent(LatentTensor(Shape{3, 4, 4})), ShapeError);
    CHECK_THROWS_AS(decode_latent_float(LatentTensor(Shape{1, 4, 4})), ShapeError);
    CHECK_THROWS_AS(encode_image(ImageTensor(3, 4)), ShapeError);
    CHECK_THROWS_AS(encode_image(ImageTensor(4, 6 + 1)), ShapeError);
    CHECK_THROWS_AS(encode_float_image(FloatImage(5, 8)), ShapeError);
    CHECK_THROWS_AS(ImageTensor(0, 4), ShapeError);
    CHECK_THROWS_AS(FloatImage(4, 0), ShapeError);
}

TEST_CASE("generation is deterministic in the rng seed") {
    const WatermarkConfig cfg = small_config(4, 8, 2, Shape{4, 16, 16});
    const DiffusionSchedule schedule = DiffusionSchedule::linear_beta(10);
    ToyDenoiser toy(cfg.latent_shape);
    SeededRng wm_rng(77);
    const Watermark wm = Watermark::random(cfg, wm_rng);

    SeededRng r1(123), r2(123), r3(124);
    const Generated a = generate_watermarked(wm, cfg, toy, schedule, 0.93, r1);
    const Generated b = generate_watermarked(wm, cfg, toy, schedule, 0.93, r2);
    const Generated c = generate_watermarked(wm, cfg, toy, schedule, 0.93, r3);
    CHECK(a.image == b.image);
    CHECK(max_abs_diff(a.z_T, b.z_T) == 0.0);
    CHECK(max_abs_diff(a.z_T, c.z_T) > 0.0);
}

TEST_CASE("clean images recover the watermark end to end") {
    // High replication (f_c * f_hw^2 = 256 copies per bit) makes the vote
    // immune to the quantization noise and the inversion residue.
    const WatermarkConfig cfg = small_config(4, 8, 2, Shape{4, 16, 16});
    const DiffusionSchedule schedule = DiffusionSchedule::linear_beta(50);
    ToyDenoiser toy(cfg.latent_shape);
    SeededRng wm_rng(8);
    const Watermark wm = Watermark::random(cfg, wm_rng);

    SeededRng rng_f(10);
    const GeneratedFloat gf = generate_watermarked_float(wm, cfg, toy, schedule, 0.93, rng_f);
    const Recovery rf =
        recover_from_float_image(gf.image, cfg, toy, schedule, 0.93, RecoverMode::Edict);
    CHECK(rf.watermark == wm);
    CHECK(bit_accuracy(rf.watermark, wm) == 1.0);

    SeededRng rng_q(10);
    const Generated gq = generate_watermarked(wm, cfg, toy, schedule, 0.93, rng_q);
    const Recovery rq =
        recover_from_image(gq.image, cfg, toy, schedule, 0.93, RecoverMode::Edict);
    CHECK(bit_accuracy(rq.watermark, wm) == 1.0);

    const Recovery rd =
        recover_from_image(gq.image, cfg, toy, schedule, 0.93, RecoverMode::Ddim);
    CHECK(bit_accuracy(rd.watermark, wm) >= 0.9);
}

TEST_CASE("recovery rejects images of the wrong size") {
    const WatermarkConfig cfg = small_config(4, 8, 1, Shape{4, 16, 16});
    const DiffusionSchedule schedule = DiffusionSchedule::linear_beta(5);
    ToyDenoiser toy(Shape{4, 8, 8});
    CHECK_THROWS_AS(
        recover_from_image(ImageTensor(16, 16), cfg, toy, schedule, 0.93, RecoverMode::Edict),
        ShapeError);
}

TEST_CASE("unwatermarked images match a random payload at chance level") {
    const WatermarkConfig cfg = small_config(1, 8, 1, Shape{4, 64, 64});  // 256 bits
    const DiffusionSchedule schedule = DiffusionSchedule::linear_beta(50);
    ToyDenoiser toy(cfg.latent_shape);

    ImageTensor img(128, 128);
    SeededRng pix_rng(31);
    for (auto& v : img.pix) v = std::uint8_t(pix_rng.next_below(256));
    const Recovery rec = recover_from_image(img, cfg, toy, schedule, 0.93, RecoverMode::Edict);

    SeededRng wm_rng(32);
    const Watermark other = Watermark::random(cfg, wm_rng);
    const double acc = bit_accuracy(rec.watermark, other);
    CHECK(acc > 0.3);
    CHECK(acc < 0.7);
}

TEST_CASE("recover mode names round trip") {
    CHECK(parse_recover_mode("edict") == RecoverMode::Edict);
    CHECK(parse_recover_mode("ddim") == RecoverMode::Ddim);
    CHECK(to_string(RecoverMode::Edict) == "edict");
    CHECK(to_string(RecoverMode::Ddim) == "ddim");
    CHECK_THROWS_AS(parse_recover_mode("exact"), ConfigError);
}

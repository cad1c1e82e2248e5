#include "eba/enhance.hpp"
#include "eba/error.hpp"
#include "eba/uncertainty.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <algorithm>

using namespace eba;
using namespace eba::uncertainty;
using eba::img::ImageBuf;

namespace {

std::vector<ImageBuf> two_passes(double delta) {
    const auto a = fx::random_image(6, 7, 1, 0.2, 0.6);
    auto b = a;
    b.at(3, 4, 1) += delta;
    return {a, b};
}

}  // namespace

TEST_CASE("zero-noise passes have zero variance") {
    const auto im = fx::random_image(40, 40, 2);
    const auto plan = adaptive::plan(im, adaptive::AdaptiveParams{.tile = 16, .overlap = 4}).plan;
    enhance::BaselineEnhancer enh;
    StochasticConfig cfg;
    cfg.gain_jitter_sigma = 0.0;
    cfg.pass_drop_prob = 0.0;
    cfg.passes = 6;
    const auto r = mc_variance("x", im, plan, enh, cfg);
    for (double v : r.variance_map.values()) CHECK(v == 0.0);
    CHECK(r.scalar == 0.0);
    CHECK_FALSE(r.flagged);
    CHECK(r.mean_image == enh.enhance("x", im, plan, std::nullopt));
}

TEST_CASE("a single pass has zero variance") {
    const std::vector<ImageBuf> one{fx::random_image(5, 5, 3)};
    const auto r = variance_from_passes(one);
    for (double v : r.variance_map.values()) CHECK(v == 0.0);
    CHECK(r.mean_image == one[0]);
}

TEST_CASE("two passes differing at one sample") {
    for (double delta : {0.1, 0.25, 1e-3}) {
        const auto passes = two_passes(delta);
        const auto r = variance_from_passes(passes);
        CHECK(std::abs(r.variance_map.at(3, 4) - delta * delta / 12.0) <= 1e-12);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 7; ++x)
                if (y != 3 || x != 4) CHECK(r.variance_map.at(y, x) == 0.0);
    }
    const double s1 = variance_from_passes(two_passes(0.1)).scalar;
    const double s2 = variance_from_passes(two_passes(0.2)).scalar;
    CHECK(s2 == doctest::Approx(4.0 * s1).epsilon(1e-12));
}

TEST_CASE("variance is invariant under pass permutation") {
    std::vector<ImageBuf> passes;
    for (std::uint64_t t = 0; t < 7; ++t) passes.push_back(fx::random_image(9, 11, 50 + t));
    const auto ref = variance_from_passes(passes);
    std::vector<std::size_t> order(passes.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(1);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(order.begin(), order.end(), gen);
        std::vector<ImageBuf> perm;
        for (auto i : order) perm.push_back(passes[i]);
        const auto r = variance_from_passes(perm);
        CHECK(r.variance_map == ref.variance_map);
        CHECK(r.mean_image == ref.mean_image);
        CHECK(r.scalar == ref.scalar);
    }
}

TEST_CASE("noisy passes produce positive variance deterministically") {
    const auto im = fx::random_image(32, 32, 4, 0.2, 0.7);
    const auto plan = adaptive::plan(im, adaptive::AdaptiveParams{.tile = 16, .overlap = 4}).plan;
    enhance::BaselineEnhancer enh;
    StochasticConfig cfg;
    cfg.passes = 5;
    const auto a = mc_variance("x", im, plan, enh, cfg);
    const auto b = mc_variance("x", im, plan, enh, cfg);
    CHECK(a.scalar > 0.0);
    CHECK(a.variance_map == b.variance_map);
    CHECK(pass_noise(cfg, 0).stream != pass_noise(cfg, 1).stream);
    for (double v : a.variance_map.values()) CHECK(v <= 0.25);
}

TEST_CASE("flag threshold is strict") {
    CHECK_FALSE(flag(1e-3));
    CHECK(flag(std::nextafter(1e-3, 1.0)));
    CHECK(flag(0.5, 0.4));
}

TEST_CASE("variance errors and config validation") {
    CHECK_THROWS_AS(variance_from_passes(std::vector<ImageBuf>{}), Error);
    const std::vector<ImageBuf> mixed{ImageBuf(2, 2), ImageBuf(2, 3)};
    try {
        variance_from_passes(mixed);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
    CHECK_THROWS_AS((StochasticConfig{.passes = 0}.validate()), Error);
    CHECK_THROWS_AS((StochasticConfig{.pass_drop_prob = 1.0}.validate()), Error);
}

TEST_CASE("EBAV round trip") {
    fx::TempDir dir;
    img::Plane p(3, 5);
    for (int i = 0; i < 15; ++i) p.values()[static_cast<std::size_t>(i)] = i * 0.01;
    write_ebav(p, dir / "v.ebav");
    CHECK(fx::read_file(dir / "v.ebav").size() == 12 + 15 * 4);
    const auto back = read_ebav(dir / "v.ebav");
    REQUIRE(back.height() == 3);
    REQUIRE(back.width() == 5);
    for (std::size_t i = 0; i < 15; ++i) CHECK(back.values()[i] == static_cast<double>(static_cast<float>(p.values()[i])));

    fx::write_file(dir / "bad.ebav", "EBAX00000000");
    CHECK_THROWS_AS(read_ebav(dir / "bad.ebav"), Error);
    auto bytes = fx::read_file(dir / "v.ebav");
    bytes.pop_back();
    fx::write_file(dir / "cut.ebav", bytes);
    try {
        read_ebav(dir / "cut.ebav");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TruncatedRecord);
    }
}

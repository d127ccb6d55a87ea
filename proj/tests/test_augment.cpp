#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "vocattr/augment.hpp"
#include "vocattr/rng.hpp"

using namespace vocattr;

namespace {

Grid random_grid(int rows, int cols, Rng& rng, double lo = -3.0, double hi = 3.0) {
    Grid g(rows, cols);
    for (double& v : g.v) v = rng.uniform(lo, hi);
    return g;
}

Grid constant_grid(int rows, int cols, double value) {
    Grid g(rows, cols);
    for (double& v : g.v) v = value;
    return g;
}

LabeledExample example(Grid spec, int class_id) {
    LabeledExample ex;
    ex.spec = std::move(spec);
    ex.label.assign(kNumClasses, 0.0);
    ex.label[class_id] = 1.0;
    return ex;
}

double label_sum(const std::vector<double>& label) {
    double s = 0.0;
    for (double v : label) s += v;
    return s;
}

double grid_mean(const Grid& g) {
    double s = 0.0;
    for (double v : g.v) s += v;
    return s / static_cast<double>(g.v.size());
}

}  // namespace

TEST_CASE("mixup at lambda 1 returns the first example exactly") {
    Rng rng(1);
    LabeledExample a = example(random_grid(16, 16, rng), 0);
    LabeledExample b = example(random_grid(16, 16, rng), 1);
    LabeledExample out = mixup(a, b, 1.0);
    for (size_t i = 0; i < a.spec.v.size(); ++i) CHECK(out.spec.v[i] == a.spec.v[i]);
    for (int c = 0; c < kNumClasses; ++c) CHECK(out.label[c] == a.label[c]);
}

TEST_CASE("mixup at lambda 0 returns the second example exactly") {
    Rng rng(2);
    LabeledExample a = example(random_grid(16, 16, rng), 0);
    LabeledExample b = example(random_grid(16, 16, rng), 1);
    LabeledExample out = mixup(a, b, 0.0);
    for (size_t i = 0; i < b.spec.v.size(); ++i) CHECK(out.spec.v[i] == b.spec.v[i]);
    for (int c = 0; c < kNumClasses; ++c) CHECK(out.label[c] == b.label[c]);
}

TEST_CASE("mixup halfway between one-hot labels is the even split") {
    Rng rng(3);
    LabeledExample a = example(random_grid(8, 8, rng), 0);
    LabeledExample b = example(random_grid(8, 8, rng), 1);
    LabeledExample out = mixup(a, b, 0.5);
    CHECK(out.label[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.label[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (int c = 2; c < kNumClasses; ++c) CHECK(out.label[c] == 0.0);
    for (size_t i = 0; i < a.spec.v.size(); ++i)
        CHECK(out.spec.v[i] == doctest::Approx(0.5 * (a.spec.v[i] + b.spec.v[i])).epsilon(1e-12));
}

TEST_CASE("mixup keeps labels on the simplexes for 1000 Beta draws") {
    Rng rng(4);
    LabeledExample a = example(random_grid(12, 12, rng), 2);
    LabeledExample b = example(random_grid(12, 12, rng), 4);
    for (int trial = 0; trial < 1000; ++trial) {
        double lambda = rng.beta(2.5, 2.5);
        LabeledExample out = mixup(a, b, lambda);
        CHECK(label_sum(out.label) == doctest::Approx(1.0).epsilon(1e-6));
        for (double v : out.label) CHECK(v >= 0.0);
    }
}

TEST_CASE("mixup rejects mismatched shapes and lambda outside [0,1]") {
    Rng rng(5);
    LabeledExample a = example(random_grid(8, 8, rng), 0);
    LabeledExample b = example(random_grid(8, 9, rng), 1);
    CHECK_THROWS_AS(mixup(a, b, 0.5), std::invalid_argument);
    LabeledExample c = example(random_grid(8, 8, rng), 1);
    CHECK_THROWS_AS(mixup(a, c, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(mixup(a, c, -0.1), std::invalid_argument);
}

TEST_CASE("cutmix with a zero-area rectangle returns the base example") {
    Rng rng(6);
    LabeledExample a = example(random_grid(48, 48, rng), 0);
    LabeledExample b = example(random_grid(48, 48, rng), 1);
    LabeledExample out = cutmix(a, b, 1.0, rng);  // lambda 1 -> target area 0
    for (size_t i = 0; i < a.spec.v.size(); ++i) CHECK(out.spec.v[i] == a.spec.v[i]);
    for (int c = 0; c < kNumClasses; ++c) CHECK(out.label[c] == a.label[c]);
}

TEST_CASE("cutmix with a full-area rectangle returns the donor example") {
    Rng rng(7);
    LabeledExample a = example(random_grid(48, 48, rng), 0);
    LabeledExample b = example(random_grid(48, 48, rng), 1);
    LabeledExample out = cutmix(a, b, 0.0, rng);  // lambda 0 -> full replacement
    for (size_t i = 0; i < b.spec.v.size(); ++i) CHECK(out.spec.v[i] == b.spec.v[i]);
    for (int c = 0; c < kNumClasses; ++c) CHECK(out.label[c] == b.label[c]);
}

TEST_CASE("cutmix at exact quarter area weighs labels 0.75/0.25") {
    // lambda 0.75 on 48x48: sides round(sqrt(0.25)*48) = 24, area 576/2304 = 0.25.
    Rng rng(8);
    LabeledExample a = example(constant_grid(48, 48, 1.0), 0);
    LabeledExample b = example(constant_grid(48, 48, 2.0), 1);
    LabeledExample out = cutmix(a, b, 0.75, rng);
    int pasted = 0;
    for (double v : out.spec.v) {
        REQUIRE((v == 1.0 || v == 2.0));
        if (v == 2.0) ++pasted;
    }
    CHECK(pasted == 576);
    CHECK(out.label[0] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(out.label[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cutmix pastes one contiguous rectangle of the donor") {
    Rng rng(9);
    LabeledExample a = example(constant_grid(30, 40, 0.0), 0);
    LabeledExample b = example(constant_grid(30, 40, 1.0), 1);
    for (int trial = 0; trial < 200; ++trial) {
        double lambda = rng.beta(2.5, 2.5);
        LabeledExample out = cutmix(a, b, lambda, rng);
        int r_lo = 30, r_hi = -1, c_lo = 40, c_hi = -1, count = 0;
        for (int r = 0; r < 30; ++r)
            for (int c = 0; c < 40; ++c)
                if (out.spec.at(r, c) == 1.0) {
                    r_lo = std::min(r_lo, r);
                    r_hi = std::max(r_hi, r);
                    c_lo = std::min(c_lo, c);
                    c_hi = std::max(c_hi, c);
                    ++count;
                }
        if (count == 0) {
            CHECK(out.label[0] == doctest::Approx(1.0).epsilon(1e-12));
            continue;
        }
        // the pasted cells fill their bounding box exactly
        CHECK(count == (r_hi - r_lo + 1) * (c_hi - c_lo + 1));
        double rho = static_cast<double>(count) / (30.0 * 40.0);
        CHECK(out.label[1] == doctest::Approx(rho).epsilon(1e-9));
        CHECK(out.label[0] == doctest::Approx(1.0 - rho).epsilon(1e-9));
    }
}

TEST_CASE("gaussian_noise with sigma 0 is the identity") {
    Rng rng(10);
    Grid g = random_grid(20, 20, rng);
    Grid before = g;
    gaussian_noise(g, 0.0, rng);
    for (size_t i = 0; i < g.v.size(); ++i) CHECK(g.v[i] == before.v[i]);
}

TEST_CASE("gaussian_noise at sigma 0.5 matches sample statistics on 128x384") {
    Rng rng(11);
    Grid g = random_grid(128, 384, rng);
    Grid before = g;
    gaussian_noise(g, 0.5, rng);
    double sum = 0.0, sq = 0.0;
    const double n = static_cast<double>(g.v.size());
    for (size_t i = 0; i < g.v.size(); ++i) {
        double d = g.v[i] - before.v[i];
        sum += d;
        sq += d * d;
    }
    double mean = sum / n;
    double std_dev = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) <= 0.02);
    CHECK(std_dev == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("gaussian_noise rejects negative sigma") {
    Rng rng(12);
    Grid g = random_grid(4, 4, rng);
    CHECK_THROWS_AS(gaussian_noise(g, -0.1, rng), std::invalid_argument);
}

TEST_CASE("time_freq_mask with zero widths changes nothing") {
    Rng rng(13);
    Grid g = random_grid(24, 32, rng);
    Grid before = g;
    time_freq_mask(g, 0, 0, rng);
    for (size_t i = 0; i < g.v.size(); ++i) CHECK(g.v[i] == before.v[i]);
}

TEST_CASE("time_freq_mask paints bounded bands with the original mean") {
    Rng rng(14);
    for (int trial = 0; trial < 300; ++trial) {
        Grid g = random_grid(24, 32, rng);
        Grid before = g;
        const double fill = grid_mean(before);
        time_freq_mask(g, 8, 6, rng);

        std::set<int> touched_rows, touched_cols;
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c)
                if (g.at(r, c) != before.at(r, c)) {
                    CHECK(g.at(r, c) == fill);
                    touched_rows.insert(r);
                    touched_cols.insert(c);
                }
        // a full row stripe marks every column and vice versa, so count the
        // dimensions of the two bands instead of raw touch counts
        int freq_band = 0, time_band = 0;
        for (int r = 0; r < g.rows; ++r) {
            bool whole_row = true;
            for (int c = 0; c < g.cols; ++c) whole_row = whole_row && g.at(r, c) == fill;
            if (whole_row) ++freq_band;
        }
        for (int c = 0; c < g.cols; ++c) {
            bool whole_col = true;
            for (int r = 0; r < g.rows; ++r) whole_col = whole_col && g.at(r, c) == fill;
            if (whole_col) ++time_band;
        }
        CHECK(freq_band <= 6);
        CHECK(time_band <= 8);
    }
}

TEST_CASE("time_freq_mask rejects bands as wide as the grid") {
    Rng rng(15);
    Grid g = random_grid(10, 12, rng);
    CHECK_THROWS_WITH_AS(time_freq_mask(g, 12, 4, rng), doctest::Contains("max_time"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(time_freq_mask(g, 4, 10, rng), doctest::Contains("max_freq"),
                         std::invalid_argument);
    CHECK_THROWS_AS(time_freq_mask(g, -1, 4, rng), std::invalid_argument);
}

TEST_CASE("jpeg_degrade leaves a constant spectrogram untouched") {
    Grid g = constant_grid(16, 16, -4.2);
    jpeg_degrade(g, 30);
    for (double v : g.v) CHECK(v == -4.2);
}

TEST_CASE("jpeg_degrade at quality 100 stays within the 8-bit bound") {
    Rng rng(16);
    Grid g = random_grid(48, 48, rng, -8.0, 2.0);
    Grid before = g;
    jpeg_degrade(g, 100);
    const double range = 10.0;  // hi - lo of the input by construction is <= 10
    double lo = before.v[0], hi = before.v[0];
    for (double v : before.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double bound = 2.0 * (hi - lo) / 255.0;
    CHECK(hi - lo <= range);
    for (size_t i = 0; i < g.v.size(); ++i)
        CHECK(std::abs(g.v[i] - before.v[i]) <= bound);
}

TEST_CASE("jpeg_degrade preserves shape for non-multiple-of-8 grids") {
    Rng rng(17);
    for (auto [rows, cols] : {std::pair{20, 35}, {128, 384}, {7, 9}}) {
        Grid g = random_grid(rows, cols, rng);
        jpeg_degrade(g, 40);
        CHECK(g.rows == rows);
        CHECK(g.cols == cols);
        CHECK(static_cast<int>(g.v.size()) == rows * cols);
        for (double v : g.v) CHECK(std::isfinite(v));
    }
}

TEST_CASE("jpeg_degrade at low quality actually distorts the image") {
    Rng rng(18);
    Grid g = random_grid(32, 32, rng);
    Grid before = g;
    jpeg_degrade(g, 10);
    double total = 0.0;
    for (size_t i = 0; i < g.v.size(); ++i) total += std::abs(g.v[i] - before.v[i]);
    CHECK(total > 0.0);
}

TEST_CASE("jpeg_degrade rejects out-of-range quality") {
    Grid g = constant_grid(8, 8, 1.0);
    CHECK_THROWS_AS(jpeg_degrade(g, 0), std::invalid_argument);
    CHECK_THROWS_AS(jpeg_degrade(g, 101), std::invalid_argument);
}

TEST_CASE("augment config validation catches bad settings") {
    AugmentConfig cfg;
    cfg.validate();  // defaults are fine
    AugmentConfig bad = cfg;
    bad.mix_prob = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.mixup_alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.jpeg_quality_min = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.jpeg_quality_max = 101;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.noise_sigma_max = -0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("augment_example with all probabilities zero is the identity") {
    Rng rng(19);
    LabeledExample a = example(random_grid(16, 16, rng), 3);
    std::vector<LabeledExample> pool = {example(random_grid(16, 16, rng), 1)};
    AugmentConfig cfg;
    cfg.mix_prob = cfg.noise_prob = cfg.mask_prob = cfg.jpeg_prob = 0.0;
    LabeledExample out = augment_example(a, pool, cfg, rng);
    for (size_t i = 0; i < a.spec.v.size(); ++i) CHECK(out.spec.v[i] == a.spec.v[i]);
    for (int c = 0; c < kNumClasses; ++c) CHECK(out.label[c] == a.label[c]);
}

TEST_CASE("augment_example preserves simplex, shape and finiteness") {
    Rng rng(20);
    std::vector<LabeledExample> pool;
    for (int i = 0; i < 4; ++i) pool.push_back(example(random_grid(16, 20, rng), i % 6));
    AugmentConfig cfg;
    cfg.mask_max_time = 6;
    cfg.mask_max_freq = 5;
    for (int trial = 0; trial < 500; ++trial) {
        const LabeledExample& a = pool[trial % pool.size()];
        LabeledExample out = augment_example(a, pool, cfg, rng);
        REQUIRE(out.spec.rows == 16);
        REQUIRE(out.spec.cols == 20);
        REQUIRE(out.label.size() == static_cast<size_t>(kNumClasses));
        CHECK(label_sum(out.label) == doctest::Approx(1.0).epsilon(1e-6));
        for (double v : out.label) CHECK(v >= 0.0);
        for (double v : out.spec.v) CHECK(std::isfinite(v));
    }
}

TEST_CASE("augment_example is deterministic for a fixed stream") {
    Rng pool_rng(21);
    std::vector<LabeledExample> pool;
    for (int i = 0; i < 3; ++i) pool.push_back(example(random_grid(12, 12, pool_rng), i));
    AugmentConfig cfg;
    cfg.mask_max_time = 4;
    cfg.mask_max_freq = 4;
    Rng r1(77), r2(77);
    for (int trial = 0; trial < 50; ++trial) {
        LabeledExample o1 = augment_example(pool[0], pool, cfg, r1);
        LabeledExample o2 = augment_example(pool[0], pool, cfg, r2);
        for (size_t i = 0; i < o1.spec.v.size(); ++i) REQUIRE(o1.spec.v[i] == o2.spec.v[i]);
        for (int c = 0; c < kNumClasses; ++c) REQUIRE(o1.label[c] == o2.label[c]);
    }
}

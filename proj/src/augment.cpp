#include "vocattr/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vocattr {

namespace {

void check_pair(const LabeledExample& a, const LabeledExample& b) {
    if (a.spec.rows != b.spec.rows || a.spec.cols != b.spec.cols)
        throw std::invalid_argument("augment: spectrogram shapes differ");
    if (a.label.empty() || a.label.size() != b.label.size())
        throw std::invalid_argument("augment: label lengths differ");
}

}  // namespace

void AugmentConfig::validate() const {
    for (double p : {mix_prob, noise_prob, mask_prob, jpeg_prob})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("AugmentConfig: probabilities must lie in [0,1]");
    if (!(mixup_alpha > 0.0) || !(mixup_beta > 0.0))
        throw std::invalid_argument("AugmentConfig: Beta shape parameters must be positive");
    if (noise_sigma_max < 0.0)
        throw std::invalid_argument("AugmentConfig: noise_sigma_max must be >= 0");
    if (mask_max_time < 0 || mask_max_freq < 0)
        throw std::invalid_argument("AugmentConfig: mask widths must be >= 0");
    if (jpeg_quality_min < 1 || jpeg_quality_max > 100 || jpeg_quality_min > jpeg_quality_max)
        throw std::invalid_argument("AugmentConfig: quality range must lie within [1,100]");
}

LabeledExample mixup(const LabeledExample& a, const LabeledExample& b, double lambda) {
    check_pair(a, b);
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("mixup: lambda out of [0,1]");
    LabeledExample out;
    out.spec = Grid(a.spec.rows, a.spec.cols);
    for (size_t i = 0; i < a.spec.v.size(); ++i)
        out.spec.v[i] = lambda * a.spec.v[i] + (1.0 - lambda) * b.spec.v[i];
    out.label.resize(a.label.size());
    for (size_t c = 0; c < a.label.size(); ++c)
        out.label[c] = lambda * a.label[c] + (1.0 - lambda) * b.label[c];
    return out;
}

LabeledExample cutmix(const LabeledExample& a, const LabeledExample& b, double lambda, Rng& rng) {
    check_pair(a, b);
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("cutmix: lambda out of [0,1]");

    const int rows = a.spec.rows, cols = a.spec.cols;
    // Box sized so area ratio ~ (1 - lambda); sides scale with sqrt.
    const double ratio = std::sqrt(1.0 - lambda);
    const int box_h = static_cast<int>(std::lround(ratio * rows));
    const int box_w = static_cast<int>(std::lround(ratio * cols));
    const int r0 = rng.uniform_int(0, rows - box_h);
    const int c0 = rng.uniform_int(0, cols - box_w);

    LabeledExample out = a;
    for (int r = r0; r < r0 + box_h; ++r)
        for (int c = c0; c < c0 + box_w; ++c) out.spec.at(r, c) = b.spec.at(r, c);

    const double pasted = static_cast<double>(box_h) * box_w;
    const double lam_eff = 1.0 - pasted / (static_cast<double>(rows) * cols);
    out.label.resize(a.label.size());
    for (size_t c = 0; c < a.label.size(); ++c)
        out.label[c] = lam_eff * a.label[c] + (1.0 - lam_eff) * b.label[c];
    return out;
}

void gaussian_noise(Grid& spec, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
    for (double& x : spec.v) x += sigma * rng.normal();
}

void time_freq_mask(Grid& spec, int max_time, int max_freq, Rng& rng) {
    if (max_time < 0 || max_time >= spec.cols)
        throw std::invalid_argument("time_freq_mask: need 0 <= max_time < n_frames");
    if (max_freq < 0 || max_freq >= spec.rows)
        throw std::invalid_argument("time_freq_mask: need 0 <= max_freq < n_mels");
    double mean = 0.0;
    for (double x : spec.v) mean += x;
    mean /= static_cast<double>(spec.v.size());

    const int t_w = rng.uniform_int(0, max_time);
    const int t0 = rng.uniform_int(0, spec.cols - t_w);
    for (int r = 0; r < spec.rows; ++r)
        for (int c = t0; c < t0 + t_w; ++c) spec.at(r, c) = mean;

    const int f_w = rng.uniform_int(0, max_freq);
    const int f0 = rng.uniform_int(0, spec.rows - f_w);
    for (int r = f0; r < f0 + f_w; ++r)
        for (int c = 0; c < spec.cols; ++c) spec.at(r, c) = mean;
}

namespace {

// Standard luminance quantization table (row-major, zigzag not needed here).
constexpr int kLumaQuant[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

// libjpeg-style scaling of the table for a quality setting in [1,100].
void scaled_quant(int quality, double table[64]) {
    quality = std::clamp(quality, 1, 100);
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    for (int i = 0; i < 64; ++i) {
        int q = (kLumaQuant[i] * scale + 50) / 100;
        table[i] = static_cast<double>(std::clamp(q, 1, 255));
    }
}

// Orthonormal DCT-II basis factor for index k at position n (length 8).
double dct_basis(int k, int n) {
    const double scale = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
    return scale * std::cos((2.0 * n + 1.0) * k * M_PI / 16.0);
}

}  // namespace

void jpeg_degrade(Grid& spec, int quality) {
    if (quality < 1 || quality > 100)
        throw std::invalid_argument("jpeg_degrade: quality must lie in [1,100]");
    if (spec.v.empty()) throw std::invalid_argument("jpeg_degrade: empty spectrogram");
    double lo = spec.v[0], hi = spec.v[0];
    for (double x : spec.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi - lo <= 0.0) return;  // constant image: nothing to quantize

    double quant[64];
    scaled_quant(quality, quant);

    // Work on a [0,255] copy padded up to multiples of 8 by edge replication.
    const int rows = spec.rows, cols = spec.cols;
    const int prows = (rows + 7) / 8 * 8, pcols = (cols + 7) / 8 * 8;
    std::vector<double> img(static_cast<size_t>(prows) * pcols);
    for (int r = 0; r < prows; ++r)
        for (int c = 0; c < pcols; ++c)
            img[static_cast<size_t>(r) * pcols + c] =
                (spec.at(std::min(r, rows - 1), std::min(c, cols - 1)) - lo) / (hi - lo) * 255.0;

    double block[64], coef[64];
    for (int br = 0; br < prows; br += 8) {
        for (int bc = 0; bc < pcols; bc += 8) {
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    block[r * 8 + c] =
                        img[static_cast<size_t>(br + r) * pcols + (bc + c)] - 128.0;

            // forward 2-D DCT, quantize/dequantize, inverse
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    double acc = 0.0;
                    for (int r = 0; r < 8; ++r)
                        for (int c = 0; c < 8; ++c)
                            acc += block[r * 8 + c] * dct_basis(u, r) * dct_basis(v, c);
                    coef[u * 8 + v] = std::round(acc / quant[u * 8 + v]) * quant[u * 8 + v];
                }
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c) {
                    double acc = 0.0;
                    for (int u = 0; u < 8; ++u)
                        for (int v = 0; v < 8; ++v)
                            acc += coef[u * 8 + v] * dct_basis(u, r) * dct_basis(v, c);
                    img[static_cast<size_t>(br + r) * pcols + (bc + c)] = acc + 128.0;
                }
        }
    }

    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double px = std::clamp(img[static_cast<size_t>(r) * pcols + c], 0.0, 255.0);
            spec.at(r, c) = lo + px / 255.0 * (hi - lo);
        }
}

LabeledExample augment_example(const LabeledExample& a,
                               const std::vector<LabeledExample>& pool,
                               const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    LabeledExample out = a;
    if (!pool.empty() && rng.bernoulli(cfg.mix_prob)) {
        const LabeledExample& partner =
            pool[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
        const double lambda = rng.beta(cfg.mixup_alpha, cfg.mixup_beta);
        out = rng.bernoulli(0.5) ? mixup(out, partner, lambda)
                                 : cutmix(out, partner, lambda, rng);
    }
    if (rng.bernoulli(cfg.noise_prob))
        gaussian_noise(out.spec, rng.uniform(0.0, cfg.noise_sigma_max), rng);
    if (rng.bernoulli(cfg.mask_prob))
        time_freq_mask(out.spec, cfg.mask_max_time, cfg.mask_max_freq, rng);
    if (rng.bernoulli(cfg.jpeg_prob))
        jpeg_degrade(out.spec, rng.uniform_int(cfg.jpeg_quality_min, cfg.jpeg_quality_max));
    return out;
}

}  // namespace vocattr

#pragma once

#include <array>
#include <vector>

#include "vocattr/dsp.hpp"
#include "vocattr/rng.hpp"

namespace vocattr {

inline constexpr int kNumClasses = 6;

// A spectrogram with a soft class distribution attached.
struct LabeledExample {
    Grid spec;
    std::vector<double> label;  // length kNumClasses, sums to 1
};

struct AugmentConfig {
    double mix_prob = 0.5;       // chance of mixup/cutmix (coin-flipped between the two)
    double noise_prob = 0.5;
    double mask_prob = 0.5;
    double jpeg_prob = 0.5;
    double mixup_alpha = 2.5;    // Beta(alpha, beta) for blend strength
    double mixup_beta = 2.5;
    double noise_sigma_max = 0.1;   // in log-power units
    int mask_max_time = 8;       // widest time stripe, in frames
    int mask_max_freq = 8;       // widest frequency stripe, in bins
    int jpeg_quality_min = 30;
    int jpeg_quality_max = 90;

    void validate() const;
};

// Convex blend of two examples: lambda*a + (1-lambda)*b, labels likewise.
LabeledExample mixup(const LabeledExample& a, const LabeledExample& b, double lambda);

// Paste a rectangle of b into a, sized so its area targets (1 - lambda) of
// the grid and placed uniformly among fully-inside positions; labels weighted
// by the exact pasted area.
LabeledExample cutmix(const LabeledExample& a, const LabeledExample& b, double lambda, Rng& rng);

// Adds iid N(0, sigma^2) to every cell.
void gaussian_noise(Grid& spec, double sigma, Rng& rng);

// Fills one time stripe and one frequency stripe with the spectrogram mean.
// Widths drawn uniformly from [0, max_*]; maxima must leave at least one
// untouched frame/bin (max_time < cols, max_freq < rows).
void time_freq_mask(Grid& spec, int max_time, int max_freq, Rng& rng);

// Simulates JPEG compression of the spectrogram image: min-max scale to
// [0,255], 8x8 block DCT, quantize with the standard luminance table at the
// given quality, reconstruct, map back to the original value range.
void jpeg_degrade(Grid& spec, int quality);

// Applies the full chain in order mix -> noise -> mask -> jpeg, each gated by
// its probability. `pool` supplies mix partners (uniformly drawn, may pick a).
LabeledExample augment_example(const LabeledExample& a,
                               const std::vector<LabeledExample>& pool,
                               const AugmentConfig& cfg, Rng& rng);

}  // namespace vocattr

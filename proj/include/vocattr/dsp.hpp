#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "vocattr/audio.hpp"

namespace vocattr {

// Log-mel front-end settings. standard() and extended() are the two
// production configurations; toy() is the small one the bundled experiment
// uses.
struct SpecConfig {
    int sample_rate = 16000;
    int n_fft = 2048;
    int win_length = 2048;  // Hann
    int hop_length = 250;
    int n_mels = 128;
    double f_min = 0.0;
    double f_max = 8000.0;
    double log_floor = 1e-6;

    static SpecConfig standard() { return SpecConfig{}; }
    static SpecConfig extended() {
        SpecConfig c;
        c.n_mels = 256;
        return c;
    }
    static SpecConfig toy() {
        SpecConfig c;
        c.n_fft = 512;
        c.win_length = 512;
        c.hop_length = 500;
        c.n_mels = 48;
        return c;
    }

    void validate() const;
    bool operator==(const SpecConfig&) const = default;
};

// Row-major real grid, rows x cols.
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Grid() = default;
    Grid(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

// Log-mel spectrogram, [n_mels x n_frames], natural log of mel power.
struct MelSpec {
    Grid values;
    SpecConfig config;

    int n_mels() const { return values.rows; }
    int n_frames() const { return values.cols; }
};

// In-place radix-2 FFT (n must be a power of two). invert=true gives the
// unscaled inverse; divide by n afterwards to recover the signal.
void fft_radix2(std::vector<std::complex<double>>& a, bool invert = false);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Frames for an N-sample signal at the given hop: ceil(n / hop).
int num_frames(size_t n_samples, int hop_length);

// Squared-magnitude STFT, [n_fft/2+1 x n_frames]. Frame t is centered at
// sample t*hop; the signal is zero outside its bounds; Hann window.
Grid stft_power(const AudioClip& clip, const SpecConfig& cfg);

// Triangular mel filterbank, [n_mels x n_fft/2+1], peaks equally spaced on
// the mel scale between f_min and f_max.
Grid mel_filterbank(const SpecConfig& cfg);

// values = ln(fb * power + log_floor).
MelSpec log_mel(const Grid& power, const Grid& fb, const SpecConfig& cfg);

// Full waveform -> log-mel pipeline; the filterbank is cached per config.
MelSpec transform(const AudioClip& clip, const SpecConfig& cfg);

}  // namespace vocattr

#include "vocattr/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace vocattr {

void SpecConfig::validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("SpecConfig: sample_rate must be positive");
    if (n_fft <= 0 || (n_fft & (n_fft - 1)) != 0)
        throw std::invalid_argument("SpecConfig: n_fft must be a power of two");
    if (win_length <= 0 || win_length > n_fft)
        throw std::invalid_argument("SpecConfig: need 0 < win_length <= n_fft");
    if (hop_length < 1) throw std::invalid_argument("SpecConfig: hop_length must be >= 1");
    if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
        throw std::invalid_argument("SpecConfig: need 0 <= f_min < f_max <= sample_rate/2");
    if (n_mels < 1) throw std::invalid_argument("SpecConfig: n_mels must be >= 1");
    if (!(log_floor > 0.0)) throw std::invalid_argument("SpecConfig: log_floor must be positive");
}

void fft_radix2(std::vector<std::complex<double>>& a, bool invert) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft: size must be a nonzero power of two");

    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / static_cast<double>(len) * (invert ? 1.0 : -1.0);
        const std::complex<double> wn(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int num_frames(size_t n_samples, int hop_length) {
    return static_cast<int>((n_samples + static_cast<size_t>(hop_length) - 1) /
                            static_cast<size_t>(hop_length));
}

Grid stft_power(const AudioClip& clip, const SpecConfig& cfg) {
    cfg.validate();
    if (clip.sample_rate != cfg.sample_rate)
        throw std::invalid_argument("stft_power: clip sample rate does not match config");
    if (clip.samples.empty()) throw std::invalid_argument("stft_power: empty clip");

    const int n_bins = cfg.n_fft / 2 + 1;
    const int frames = num_frames(clip.samples.size(), cfg.hop_length);
    const long n = static_cast<long>(clip.samples.size());

    // periodic Hann
    std::vector<double> window(cfg.win_length);
    for (int i = 0; i < cfg.win_length; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / cfg.win_length));

    Grid power(n_bins, frames);
    std::vector<std::complex<double>> buf(cfg.n_fft);

    for (int t = 0; t < frames; ++t) {
        const long center = static_cast<long>(t) * cfg.hop_length;
        const long start = center - cfg.win_length / 2;
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (int i = 0; i < cfg.win_length; ++i) {
            const long idx = start + i;
            if (idx < 0 || idx >= n) continue;
            buf[i] = window[i] * static_cast<double>(clip.samples[idx]);
        }
        fft_radix2(buf);
        for (int k = 0; k < n_bins; ++k) power.at(k, t) = std::norm(buf[k]);
    }
    return power;
}

Grid mel_filterbank(const SpecConfig& cfg) {
    cfg.validate();
    const int n_bins = cfg.n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(cfg.f_min);
    const double mel_hi = hz_to_mel(cfg.f_max);

    // n_mels + 2 equally spaced points; triangle i spans [p_i, p_i+2]
    std::vector<double> mel_points(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i)
        mel_points[i] = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);

    Grid fb(cfg.n_mels, n_bins);
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = mel_points[m], mid = mel_points[m + 1], hi = mel_points[m + 2];
        for (int k = 0; k < n_bins; ++k) {
            const double mel_k = hz_to_mel(static_cast<double>(k) * cfg.sample_rate / cfg.n_fft);
            double w = 0.0;
            if (mel_k > lo && mel_k < hi)
                w = mel_k <= mid ? (mel_k - lo) / (mid - lo) : (hi - mel_k) / (hi - mid);
            fb.at(m, k) = w;
        }
    }
    return fb;
}

MelSpec log_mel(const Grid& power, const Grid& fb, const SpecConfig& cfg) {
    cfg.validate();
    if (fb.cols != power.rows)
        throw std::invalid_argument("log_mel: filterbank/power shape mismatch");
    if (fb.rows != cfg.n_mels)
        throw std::invalid_argument("log_mel: filterbank does not match config");

    MelSpec spec;
    spec.config = cfg;
    spec.values = Grid(cfg.n_mels, power.cols);
    for (int m = 0; m < fb.rows; ++m) {
        for (int t = 0; t < power.cols; ++t) {
            double acc = 0.0;
            for (int k = 0; k < fb.cols; ++k) acc += fb.at(m, k) * power.at(k, t);
            spec.values.at(m, t) = std::log(acc + cfg.log_floor);
        }
    }
    return spec;
}

namespace {

struct FbKey {
    int sample_rate, n_fft, n_mels;
    double f_min, f_max;
    auto operator<=>(const FbKey&) const = default;
};

const Grid& cached_filterbank(const SpecConfig& cfg) {
    static std::mutex mutex;
    static std::map<FbKey, std::unique_ptr<Grid>> cache;
    FbKey key{cfg.sample_rate, cfg.n_fft, cfg.n_mels, cfg.f_min, cfg.f_max};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Grid>(mel_filterbank(cfg))).first;
    return *it->second;
}

}  // namespace

MelSpec transform(const AudioClip& clip, const SpecConfig& cfg) {
    return log_mel(stft_power(clip, cfg), cached_filterbank(cfg), cfg);
}

}  // namespace vocattr

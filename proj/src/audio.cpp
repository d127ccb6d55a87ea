#include "vocattr/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace vocattr {

namespace {

uint32_t read_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16le(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void write_u32le(std::ofstream& f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16le(std::ofstream& f, uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 2);
}

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
    throw std::runtime_error("wav: malformed header: " + what + ": " + path);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xfffe;

}  // namespace

AudioClip load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        if (!std::filesystem::exists(path))
            throw std::runtime_error("wav: file not found: " + path);
        throw std::runtime_error("wav: cannot open: " + path);
    }

    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        malformed(path, "missing RIFF/WAVE magic");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    size_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        uint32_t size = read_u32le(chunk + 4);
        if (pos + 8 + size > bytes.size()) malformed(path, "chunk overruns file");
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16) malformed(path, "fmt chunk too small");
            format = read_u16le(chunk + 8);
            channels = read_u16le(chunk + 10);
            sample_rate = read_u32le(chunk + 12);
            bits = read_u16le(chunk + 22);
            if (format == kFormatExtensible) {
                // sub-format GUID starts with the base format code
                if (size < 40) malformed(path, "extensible fmt chunk too small");
                format = read_u16le(chunk + 32);
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            data_size = size;
        }
        pos += 8 + size + (size & 1);  // chunks are word-aligned
    }

    if (!have_fmt) malformed(path, "no fmt chunk");
    if (data == nullptr) malformed(path, "no data chunk");
    if (channels == 0 || sample_rate == 0) malformed(path, "zero channels or rate");

    const bool pcm_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24);
    const bool float_ok = format == kFormatFloat && bits == 32;
    if (!pcm_ok && !float_ok)
        throw std::runtime_error("wav: unsupported encoding: format=" + std::to_string(format) +
                                 " bits=" + std::to_string(bits) + ": " + path);

    size_t bytes_per_sample = bits / 8;
    size_t frame_size = bytes_per_sample * channels;
    size_t n_frames = data_size / frame_size;

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    clip.samples.resize(n_frames);

    for (size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const unsigned char* s = data + i * frame_size + c * bytes_per_sample;
            double v = 0.0;
            switch (bits) {
                case 8:  // unsigned
                    v = (static_cast<int>(s[0]) - 128) / 128.0;
                    break;
                case 16: {
                    int16_t x = static_cast<int16_t>(s[0] | (s[1] << 8));
                    v = x / 32768.0;
                    break;
                }
                case 24: {
                    int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
                    if (x & 0x800000) x |= ~0xffffff;  // sign extend
                    v = x / 8388608.0;
                    break;
                }
                case 32: {
                    uint32_t u = read_u32le(s);
                    float fv;
                    std::memcpy(&fv, &u, 4);
                    v = fv;
                    break;
                }
            }
            acc += v;
        }
        clip.samples[i] = static_cast<float>(acc / channels);
    }
    return clip;
}

void save_wav(const std::string& path, const AudioClip& clip, int bits) {
    if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
        throw std::invalid_argument("save_wav: bits must be 8, 16, 24 or 32");
    if (clip.sample_rate <= 0) throw std::invalid_argument("save_wav: bad sample rate");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("wav: cannot write: " + path);

    uint16_t format = bits == 32 ? kFormatFloat : kFormatPcm;
    uint32_t byte_rate = clip.sample_rate * bits / 8;
    uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * bits / 8);

    f.write("RIFF", 4);
    write_u32le(f, 36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_u32le(f, 16);
    write_u16le(f, format);
    write_u16le(f, 1);  // mono
    write_u32le(f, static_cast<uint32_t>(clip.sample_rate));
    write_u32le(f, byte_rate);
    write_u16le(f, static_cast<uint16_t>(bits / 8));
    write_u16le(f, static_cast<uint16_t>(bits));
    f.write("data", 4);
    write_u32le(f, data_size);

    for (float s : clip.samples) {
        double v = std::clamp(static_cast<double>(s), -1.0, 1.0);
        switch (bits) {
            case 8: {
                int x = static_cast<int>(std::lrint(v * 127.0)) + 128;
                unsigned char b = static_cast<unsigned char>(std::clamp(x, 0, 255));
                f.write(reinterpret_cast<const char*>(&b), 1);
                break;
            }
            case 16: {
                int x = static_cast<int>(std::lrint(v * 32767.0));
                write_u16le(f, static_cast<uint16_t>(static_cast<int16_t>(x)));
                break;
            }
            case 24: {
                int32_t x = static_cast<int32_t>(std::lrint(v * 8388607.0));
                unsigned char b[3] = {static_cast<unsigned char>(x & 0xff),
                                      static_cast<unsigned char>((x >> 8) & 0xff),
                                      static_cast<unsigned char>((x >> 16) & 0xff)};
                f.write(reinterpret_cast<const char*>(b), 3);
                break;
            }
            case 32: {
                float fv = static_cast<float>(s);
                uint32_t u;
                std::memcpy(&u, &fv, 4);
                write_u32le(f, u);
                break;
            }
        }
    }
    if (!f) throw std::runtime_error("wav: write failed: " + path);
}

namespace {

// Zeroth-order modified Bessel function, power series.
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    double half_x = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half_x / k) * (half_x / k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

constexpr double kKaiserBeta = 8.0;
constexpr int kSincZeros = 32;  // zero crossings per side at the cutoff

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw std::invalid_argument("resample: target_rate must be positive");
    if (clip.sample_rate <= 0) throw std::invalid_argument("resample: clip has no sample rate");
    if (target_rate == clip.sample_rate) return clip;

    const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
    const size_t n_in = clip.samples.size();
    const size_t n_out = static_cast<size_t>(std::llround(static_cast<double>(n_in) * ratio));

    AudioClip out;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);

    // cutoff (cycles per input sample) sits at the smaller Nyquist
    const double cutoff = std::min(1.0, ratio);
    const double half_width = kSincZeros / cutoff;
    const double i0_beta = bessel_i0(kKaiserBeta);

    for (size_t j = 0; j < n_out; ++j) {
        const double t = static_cast<double>(j) / ratio;  // position in input samples
        const long n_lo = static_cast<long>(std::ceil(t - half_width));
        const long n_hi = static_cast<long>(std::floor(t + half_width));
        double acc = 0.0;
        for (long n = std::max(0L, n_lo); n <= std::min(static_cast<long>(n_in) - 1, n_hi); ++n) {
            const double d = t - static_cast<double>(n);
            const double x = cutoff * d;
            const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
            const double u = d / half_width;  // in [-1, 1]
            const double w = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            acc += clip.samples[n] * cutoff * sinc * w;
        }
        out.samples[j] = static_cast<float>(acc);
    }
    return out;
}

AudioClip z_normalize(const AudioClip& clip) {
    if (clip.samples.empty()) throw std::invalid_argument("z_normalize: empty clip");

    double mean = 0.0;
    for (float s : clip.samples) mean += s;
    mean /= static_cast<double>(clip.samples.size());

    double var = 0.0;
    for (float s : clip.samples) {
        double d = s - mean;
        var += d * d;
    }
    var /= static_cast<double>(clip.samples.size());
    double sd = std::sqrt(var);

    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples.resize(clip.samples.size());
    if (sd < 1e-8) return out;  // silent clip maps to zeros

    for (size_t i = 0; i < clip.samples.size(); ++i)
        out.samples[i] = static_cast<float>((clip.samples[i] - mean) / sd);
    return out;
}

namespace {

size_t segment_length(const AudioClip& clip, double duration_s) {
    if (clip.samples.empty()) throw std::invalid_argument("segment: empty clip");
    if (duration_s <= 0.0) throw std::invalid_argument("segment: duration must be positive");
    return static_cast<size_t>(std::llround(duration_s * clip.sample_rate));
}

}  // namespace

AudioClip random_segment(const AudioClip& clip, double duration_s, Rng& rng) {
    const size_t len = segment_length(clip, duration_s);
    const size_t n = clip.samples.size();

    AudioClip out;
    out.sample_rate = clip.sample_rate;
    if (n == len) {
        out.samples = clip.samples;
    } else if (n > len) {
        size_t offset = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(n - len)));
        out.samples.assign(clip.samples.begin() + offset, clip.samples.begin() + offset + len);
    } else {
        out.samples.assign(len, 0.0f);
        size_t offset = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(len - n)));
        std::copy(clip.samples.begin(), clip.samples.end(), out.samples.begin() + offset);
    }
    return out;
}

AudioClip center_segment(const AudioClip& clip, double duration_s) {
    const size_t len = segment_length(clip, duration_s);
    const size_t n = clip.samples.size();

    AudioClip out;
    out.sample_rate = clip.sample_rate;
    if (n == len) {
        out.samples = clip.samples;
    } else if (n > len) {
        size_t offset = (n - len) / 2;
        out.samples.assign(clip.samples.begin() + offset, clip.samples.begin() + offset + len);
    } else {
        out.samples.assign(len, 0.0f);
        std::copy(clip.samples.begin(), clip.samples.end(), out.samples.begin() + (len - n) / 2);
    }
    return out;
}

}  // namespace vocattr

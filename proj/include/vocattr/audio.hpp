#pragma once

#include <string>
#include <vector>

#include "vocattr/rng.hpp"

namespace vocattr {

// Mono waveform. Samples are dimensionless amplitudes, nominally in [-1, 1].
struct AudioClip {
    std::vector<float> samples;
    int sample_rate = 0;

    size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// PCM WAV reader. Accepts 8/16/24-bit integer and 32-bit float encodings,
// mono or stereo (stereo is downmixed by per-sample channel mean).
// Throws std::runtime_error with a distinct message per failure kind:
//   "wav: file not found: ..."       missing file
//   "wav: malformed header: ..."     structurally broken RIFF/fmt/data
//   "wav: unsupported encoding: ..." valid WAV outside the supported set
AudioClip load_wav(const std::string& path);

// Writes a mono clip. encoding: 16 (PCM16, default), 8, 24, or 32 (float).
void save_wav(const std::string& path, const AudioClip& clip, int bits = 16);

// Band-limited sample-rate conversion (windowed-sinc, Kaiser beta=8,
// 32 zero crossings per side). Output length is round(n * target / input).
// A clip already at target_rate is returned unchanged.
AudioClip resample(const AudioClip& clip, int target_rate);

// Shifts and scales to zero mean, unit population standard deviation.
// Clips with std below 1e-8 (silence) come back all-zero.
AudioClip z_normalize(const AudioClip& clip);

// Fixed-length view: longer clips yield a uniformly random contiguous window,
// shorter ones are placed whole at a uniformly random offset in a zero buffer.
AudioClip random_segment(const AudioClip& clip, double duration_s, Rng& rng);

// Deterministic counterpart used at inference: center crop or center pad.
AudioClip center_segment(const AudioClip& clip, double duration_s);

}  // namespace vocattr

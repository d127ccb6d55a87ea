#pragma once

#include <string>
#include <vector>

#include "vocattr/audio.hpp"
#include "vocattr/rng.hpp"

namespace vocattr {

// Recipe for one synthetic voice family: harmonic stack with vibrato,
// spectral tilt, fixed formant resonances, tremolo and a breathy noise
// component. Individual draws jitter every parameter slightly. n_harmonics
// of 0 with noise_mix 1 gives a purely noise-excited formant voice.
struct GeneratorSpec {
    std::string family;
    int class_id = 0;  // 0..4 known generators, 5 = out-of-set
    double f0_min = 100.0, f0_max = 200.0;
    int n_harmonics = 30;
    double tilt_db_per_oct = -6.0;
    double vibrato_rate_hz = 5.0;
    double vibrato_cents = 30.0;
    std::vector<double> formant_hz{500.0, 1500.0, 2500.0};
    std::vector<double> formant_bw{120.0, 200.0, 300.0};
    double am_rate_hz = 0.0;
    double am_depth = 0.0;
    double noise_mix = 0.1;  // fraction of shaped-noise excitation, in [0, 1]

    void validate() const;
};

// The five in-set voice families (class ids 0..4).
const std::vector<GeneratorSpec>& known_families();
// Out-of-set families seen during training (class id 5).
const std::vector<GeneratorSpec>& train_unknown_families();
// Different out-of-set families reserved for evaluation (class id 5).
const std::vector<GeneratorSpec>& eval_unknown_families();

AudioClip gen_sample(const GeneratorSpec& spec, double duration_s, int sample_rate, Rng& rng);

// --- perturbations -------------------------------------------------------

void add_noise_snr(AudioClip& clip, double snr_db, Rng& rng);
// 8-bit mu-law (mu = 255) compress, quantize, expand.
void mulaw_compand(AudioClip& clip);
// Convolves with a noise-excited exponentially decaying impulse response
// whose tail reaches -60 dB at rt60 seconds; output RMS matches the input.
void apply_reverb(AudioClip& clip, double rt60_s, Rng& rng);

// Resample-then-restretch pitch shift; duration is preserved.
void pitch_shift(AudioClip& clip, double semitones);
// Overlap-add time stretch to round(n * factor) samples (pitch preserved).
void time_stretch(AudioClip& clip, double factor);
// 4th-order Butterworth filters (two biquad sections), forward pass only.
void butterworth_lowpass(AudioClip& clip, double cutoff_hz);
void butterworth_highpass(AudioClip& clip, double cutoff_hz);

struct PerturbConfig {
    // mild chain
    double noise_prob = 0.5, snr_db_min = 15.0, snr_db_max = 30.0;
    double mulaw_prob = 0.5;
    double reverb_prob = 0.5, rt60_min = 0.1, rt60_max = 0.4;
    // aggressive chain
    double pitch_prob = 0.5, pitch_semitones_max = 2.0;
    double stretch_prob = 0.5, stretch_min = 0.85, stretch_max = 1.15;
    double lowpass_prob = 0.5, lp_hz_min = 3000.0, lp_hz_max = 7000.0;
    double highpass_prob = 0.5, hp_hz_min = 100.0, hp_hz_max = 400.0;
};

// Each returns the semicolon-joined tags of what was applied ("none" if
// nothing) and renormalizes so the peak never exceeds 1. With force_one,
// redraws until at least one perturbation lands.
std::string perturb_weak(AudioClip& clip, const PerturbConfig& cfg, Rng& rng, bool force_one);
std::string perturb_strong(AudioClip& clip, const PerturbConfig& cfg, Rng& rng, bool force_one);

// --- corpus --------------------------------------------------------------

struct CorpusConfig {
    int sample_rate = 16000;
    double clip_duration_s = 2.0;
    int train_per_class = 100;  // class 5 split round-robin over its families
    int eval1_per_class = 12;   // half stays clean, half gets the mild chain
    int eval2_per_class = 10;   // every clip gets the aggressive chain
    PerturbConfig perturb;
    uint64_t seed = 1234;

    void validate() const;
};

struct CorpusItem {
    std::string filename;  // relative to the corpus root
    int class_id = 0;
    std::string family;
    std::string split;  // train / eval1 / eval2
    std::string perturbations;  // "none" or e.g. "noise;reverb"
};

struct BuiltClip {
    AudioClip clip;
    CorpusItem item;
};

// Synthesizes the whole corpus in memory: train (clean, known + external
// unknown families), eval1 (held-out unknown families; half clean, half mild
// chain), eval2 (same class structure, aggressive chain on every clip).
// Deterministic for a fixed config, independent of thread count.
std::vector<BuiltClip> build_corpus(const CorpusConfig& cfg, int threads);

// build_corpus + WAVs under `root` (train/, eval1/, eval2/) + manifest.csv.
std::vector<CorpusItem> write_corpus(const std::string& root, const CorpusConfig& cfg,
                                     int threads);

std::vector<CorpusItem> read_manifest(const std::string& path);

}  // namespace vocattr

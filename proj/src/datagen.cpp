#include "vocattr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "vocattr/dsp.hpp"
#include "vocattr/parallel.hpp"

namespace vocattr {

namespace {

double rms(const std::vector<float>& x) {
    double acc = 0.0;
    for (float v : x) acc += static_cast<double>(v) * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

void scale_to_rms(std::vector<float>& x, double target) {
    const double cur = rms(x);
    if (cur <= 0.0) return;
    const float k = static_cast<float>(target / cur);
    for (float& v : x) v *= k;
}

void clamp_peak(std::vector<float>& x, float peak) {
    float mx = 0.0f;
    for (float v : x) mx = std::max(mx, std::abs(v));
    if (mx > peak) {
        const float k = peak / mx;
        for (float& v : x) v *= k;
    }
}

double formant_gain(const GeneratorSpec& g, const std::vector<double>& centers, double f) {
    double gain = 0.05;  // floor keeps harmonics between formants audible
    for (size_t i = 0; i < centers.size(); ++i) {
        const double d = (f - centers[i]) / (g.formant_bw[i] * 0.5);
        gain += 1.0 / (1.0 + d * d);
    }
    return gain;
}

}  // namespace

const std::vector<GeneratorSpec>& known_families() {
    static const std::vector<GeneratorSpec> families = {
        {"low_drone", 0, 110, 140, 40, -6.0, 4.5, 30, {500, 1500, 2500}, {120, 200, 300}, 2.0,
         0.2, 0.10},
        {"mid_bright", 1, 180, 220, 30, -3.0, 5.5, 20, {800, 1200, 3000}, {150, 180, 350}, 0.0,
         0.0, 0.05},
        {"mid_dark", 2, 180, 220, 30, -9.0, 4.0, 60, {400, 900, 2200}, {100, 160, 280}, 3.0,
         0.3, 0.10},
        {"mid_breathy", 3, 180, 220, 25, -6.0, 6.5, 15, {600, 1700, 2800}, {140, 220, 320}, 0.0,
         0.0, 0.35},
        {"wide_tremolo", 4, 90, 300, 20, -5.0, 3.0, 80, {700, 2000, 3500}, {160, 260, 400}, 1.5,
         0.5, 0.15},
    };
    return families;
}

const std::vector<GeneratorSpec>& train_unknown_families() {
    // The out-of-set pool is deliberately broad: wide pitch bands and formant
    // layouts tiling the space between the in-set voices, so "unknown" is
    // learned as a region rather than a handful of points. ext_mid_flat keeps
    // the 180-220 Hz band the shared speaker of classes 1-3 uses.
    static const std::vector<GeneratorSpec> families = {
        {"ext_mid_flat", 5, 180, 220, 28, -6.0, 7.0, 40, {650, 1500, 2850}, {130, 210, 330},
         2.5, 0.25, 0.20},
        {"ext_low_soft", 5, 100, 190, 32, -9.0, 5.0, 50, {500, 1250, 2250}, {110, 170, 300},
         0.0, 0.0, 0.25},
        {"ext_high_buzz", 5, 210, 330, 22, -2.0, 4.8, 25, {800, 1700, 3300}, {150, 240, 380},
         4.0, 0.4, 0.08},
        {"ext_wide_warble", 5, 90, 320, 26, -5.0, 6.2, 70, {700, 1350, 2500}, {140, 220, 340},
         1.5, 0.2, 0.15},
        {"ext_dark_hum", 5, 130, 240, 36, -11.0, 3.6, 20, {420, 1050, 2050}, {100, 180, 290},
         0.8, 0.15, 0.18},
        // purely noise-excited formant voice: no harmonic stack at all
        {"ext_whisper", 5, 120, 300, 0, -5.0, 0.0, 0, {300, 1450, 2700}, {180, 260, 420},
         0.0, 0.0, 1.0},
    };
    return families;
}

const std::vector<GeneratorSpec>& eval_unknown_families() {
    static const std::vector<GeneratorSpec> families = {
        {"ext_mid_hollow", 5, 180, 220, 26, -7.0, 6.0, 35, {550, 1400, 2900}, {120, 190, 340},
         1.0, 0.3, 0.30},
        {"ext_low_bright", 5, 120, 160, 34, -3.0, 5.2, 45, {750, 1300, 2100}, {140, 200, 280},
         3.5, 0.2, 0.12},
        {"ext_high_dark", 5, 220, 270, 24, -10.0, 4.2, 55, {450, 1800, 3400}, {100, 230, 360},
         0.0, 0.0, 0.20},
    };
    return families;
}

void GeneratorSpec::validate() const {
    if (family.empty()) throw std::invalid_argument("GeneratorSpec: family name required");
    if (class_id < 0 || class_id > 5)
        throw std::invalid_argument("GeneratorSpec: class_id out of range");
    if (!(f0_min > 0.0 && f0_min <= f0_max))
        throw std::invalid_argument("GeneratorSpec: need 0 < f0_min <= f0_max");
    if (n_harmonics < 0) throw std::invalid_argument("GeneratorSpec: n_harmonics must be >= 0");
    if (formant_hz.size() != formant_bw.size() || formant_hz.empty())
        throw std::invalid_argument("GeneratorSpec: formant_hz/formant_bw size mismatch");
    if (!(noise_mix >= 0.0 && noise_mix <= 1.0))
        throw std::invalid_argument("GeneratorSpec: noise_mix must lie in [0,1]");
    if (n_harmonics == 0 && noise_mix <= 0.0)
        throw std::invalid_argument("GeneratorSpec: silent family (no harmonics, no noise)");
}

AudioClip gen_sample(const GeneratorSpec& g, double duration_s, int sample_rate, Rng& rng) {
    if (duration_s <= 0.0) throw std::invalid_argument("gen_sample: duration must be positive");
    g.validate();
    const int n = static_cast<int>(std::llround(duration_s * sample_rate));

    // per-draw jitter so one family still has spread
    const double f0 = rng.uniform(g.f0_min, g.f0_max);
    const double tilt = g.tilt_db_per_oct + rng.uniform(-1.0, 1.0);
    const double vib_rate = g.vibrato_rate_hz * rng.uniform(0.8, 1.2);
    const double vib_depth = g.vibrato_cents * rng.uniform(0.8, 1.2);
    const double am_rate = g.am_rate_hz * rng.uniform(0.8, 1.2);
    std::vector<double> centers(g.formant_hz.size());
    for (size_t i = 0; i < centers.size(); ++i)
        centers[i] = g.formant_hz[i] * rng.uniform(0.95, 1.05);

    const double nyquist_guard = 0.45 * sample_rate;
    std::vector<double> amp, phase;
    for (int h = 1; h <= g.n_harmonics; ++h) {
        const double fh = h * f0;
        if (fh >= nyquist_guard) break;
        amp.push_back(std::pow(10.0, tilt * std::log2(static_cast<double>(h)) / 20.0) *
                      formant_gain(g, centers, fh));
        phase.push_back(rng.uniform(0.0, 2.0 * M_PI));
    }

    // harmonic stack phase-locked to a vibrato-modulated fundamental
    std::vector<float> harm(n, 0.0f);
    double base_phase = 0.0;
    for (int t = 0; t < n; ++t) {
        const double ts = static_cast<double>(t) / sample_rate;
        const double inst_f0 =
            f0 * std::pow(2.0, vib_depth / 1200.0 * std::sin(2.0 * M_PI * vib_rate * ts));
        base_phase += 2.0 * M_PI * inst_f0 / sample_rate;
        double s = 0.0;
        for (size_t h = 0; h < amp.size(); ++h)
            s += amp[h] * std::sin(static_cast<double>(h + 1) * base_phase + phase[h]);
        if (g.am_depth > 0.0)
            s *= (1.0 + g.am_depth * std::sin(2.0 * M_PI * am_rate * ts)) / (1.0 + g.am_depth);
        harm[t] = static_cast<float>(s);
    }
    scale_to_rms(harm, 1.0);

    std::vector<float> out(n);
    if (g.noise_mix > 0.0) {
        // breath component: white noise spectrally shaped by the same formants
        size_t m = 1;
        while (m < static_cast<size_t>(n)) m <<= 1;
        std::vector<std::complex<double>> buf(m);
        for (int t = 0; t < n; ++t) buf[t] = rng.normal();
        fft_radix2(buf);
        for (size_t k = 0; k <= m / 2; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(m);
            const double gq = f < nyquist_guard ? formant_gain(g, centers, f) : 0.0;
            buf[k] *= gq;
            if (k > 0 && k < m / 2) buf[m - k] = std::conj(buf[k]);
        }
        fft_radix2(buf, /*invert=*/true);
        std::vector<float> noise(n);
        for (int t = 0; t < n; ++t)
            noise[t] = static_cast<float>(buf[t].real() / static_cast<double>(m));
        scale_to_rms(noise, 1.0);
        for (int t = 0; t < n; ++t)
            out[t] = static_cast<float>((1.0 - g.noise_mix) * harm[t] + g.noise_mix * noise[t]);
    } else {
        out = harm;
    }

    scale_to_rms(out, 0.15);
    clamp_peak(out, 0.9f);
    return AudioClip{std::move(out), sample_rate};
}

void add_noise_snr(AudioClip& clip, double snr_db, Rng& rng) {
    double power = 0.0;
    for (float v : clip.samples) power += static_cast<double>(v) * v;
    power /= static_cast<double>(clip.samples.size());
    if (power <= 0.0) return;
    const double sigma = std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
    for (float& v : clip.samples) v += static_cast<float>(sigma * rng.normal());
}

void mulaw_compand(AudioClip& clip) {
    constexpr double mu = 255.0;
    const double log1p_mu = std::log1p(mu);
    for (float& v : clip.samples) {
        const double x = std::clamp(static_cast<double>(v), -1.0, 1.0);
        const double y = std::copysign(std::log1p(mu * std::abs(x)) / log1p_mu, x);
        const double q = std::round((y + 1.0) * 0.5 * mu) / mu * 2.0 - 1.0;
        v = static_cast<float>(std::copysign((std::pow(1.0 + mu, std::abs(q)) - 1.0) / mu, q));
    }
}

void apply_reverb(AudioClip& clip, double rt60_s, Rng& rng) {
    if (rt60_s <= 0.0) throw std::invalid_argument("apply_reverb: rt60 must be positive");
    const int n = static_cast<int>(clip.samples.size());
    const int ir_len = std::max(2, static_cast<int>(std::llround(rt60_s * clip.sample_rate)));
    std::vector<double> ir(ir_len);
    ir[0] = 1.0;  // direct path
    const double decay = std::log(1000.0);  // -60 dB over rt60
    for (int i = 1; i < ir_len; ++i)
        ir[i] = 0.25 * rng.normal() * std::exp(-decay * static_cast<double>(i) / ir_len);

    size_t m = 1;
    while (m < static_cast<size_t>(n + ir_len)) m <<= 1;
    std::vector<std::complex<double>> a(m), b(m);
    for (int i = 0; i < n; ++i) a[i] = static_cast<double>(clip.samples[i]);
    for (int i = 0; i < ir_len; ++i) b[i] = ir[i];
    fft_radix2(a);
    fft_radix2(b);
    for (size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_radix2(a, /*invert=*/true);

    const double before = rms(clip.samples);
    for (int i = 0; i < n; ++i)
        clip.samples[i] = static_cast<float>(a[i].real() / static_cast<double>(m));
    scale_to_rms(clip.samples, before);
}

void time_stretch(AudioClip& clip, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("time_stretch: factor must be positive");
    const int n = static_cast<int>(clip.samples.size());
    const int m = std::max(1, static_cast<int>(std::llround(n * factor)));
    constexpr int kGrain = 1024, kHop = 256;

    std::vector<double> window(kGrain);
    for (int i = 0; i < kGrain; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / kGrain));

    std::vector<double> acc(m, 0.0), norm(m, 0.0);
    for (int so = 0; so < m; so += kHop) {
        // grain in the output maps back to input time t_in = t_out / factor
        const long sa = std::lround(static_cast<double>(so) / factor);
        for (int i = 0; i < kGrain; ++i) {
            const int oi = so + i;
            const long ii = sa + i;
            if (oi >= m) break;
            if (ii < 0 || ii >= n) continue;
            acc[oi] += window[i] * static_cast<double>(clip.samples[ii]);
            norm[oi] += window[i];
        }
    }
    std::vector<float> out(m);
    for (int i = 0; i < m; ++i)
        out[i] = static_cast<float>(norm[i] > 1e-9 ? acc[i] / norm[i] : 0.0);
    clip.samples = std::move(out);
}

void pitch_shift(AudioClip& clip, double semitones) {
    const int n = static_cast<int>(clip.samples.size());
    const double ratio = std::pow(2.0, semitones / 12.0);
    // resample so playback at the original rate lands `semitones` higher,
    // then stretch the result back to the original duration
    const int carrier_rate = std::max(1000, static_cast<int>(std::llround(clip.sample_rate / ratio)));
    AudioClip shifted = resample(clip, carrier_rate);
    shifted.sample_rate = clip.sample_rate;
    time_stretch(shifted, static_cast<double>(n) / static_cast<double>(shifted.samples.size()));
    shifted.samples.resize(n, 0.0f);
    clip.samples = std::move(shifted.samples);
}

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;

    void apply(std::vector<float>& x) const {
        double z1 = 0.0, z2 = 0.0;  // transposed direct form II
        for (float& v : x) {
            const double in = v;
            const double out = b0 * in + z1;
            z1 = b1 * in - a1 * out + z2;
            z2 = b2 * in - a2 * out;
            v = static_cast<float>(out);
        }
    }
};

// 4th-order Butterworth splits into two biquads with these Q values.
constexpr double kButterQ[2] = {0.54119610014620, 1.30656296487638};

Biquad design_biquad(double cutoff_hz, double sample_rate, double q, bool highpass) {
    if (!(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0))
        throw std::invalid_argument("butterworth: cutoff must lie in (0, rate/2)");
    const double w0 = 2.0 * M_PI * cutoff_hz / sample_rate;
    const double cw = std::cos(w0), sw = std::sin(w0);
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f{};
    if (highpass) {
        f.b0 = (1.0 + cw) / 2.0 / a0;
        f.b1 = -(1.0 + cw) / a0;
        f.b2 = (1.0 + cw) / 2.0 / a0;
    } else {
        f.b0 = (1.0 - cw) / 2.0 / a0;
        f.b1 = (1.0 - cw) / a0;
        f.b2 = (1.0 - cw) / 2.0 / a0;
    }
    f.a1 = -2.0 * cw / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
}

}  // namespace

void butterworth_lowpass(AudioClip& clip, double cutoff_hz) {
    for (double q : kButterQ)
        design_biquad(cutoff_hz, clip.sample_rate, q, /*highpass=*/false).apply(clip.samples);
}

void butterworth_highpass(AudioClip& clip, double cutoff_hz) {
    for (double q : kButterQ)
        design_biquad(cutoff_hz, clip.sample_rate, q, /*highpass=*/true).apply(clip.samples);
}

namespace {

std::string join_tags(const std::vector<std::string>& tags) {
    if (tags.empty()) return "none";
    std::string out = tags[0];
    for (size_t i = 1; i < tags.size(); ++i) out += ";" + tags[i];
    return out;
}

void renormalize_peak(std::vector<float>& x) {
    float mx = 0.0f;
    for (float v : x) mx = std::max(mx, std::abs(v));
    if (mx > 1.0f)
        for (float& v : x) v /= mx;
}

}  // namespace

std::string perturb_weak(AudioClip& clip, const PerturbConfig& cfg, Rng& rng, bool force_one) {
    for (;;) {
        const bool do_noise = rng.bernoulli(cfg.noise_prob);
        const bool do_mulaw = rng.bernoulli(cfg.mulaw_prob);
        const bool do_reverb = rng.bernoulli(cfg.reverb_prob);
        if (force_one && !do_noise && !do_mulaw && !do_reverb) continue;
        std::vector<std::string> tags;
        if (do_reverb) {
            apply_reverb(clip, rng.uniform(cfg.rt60_min, cfg.rt60_max), rng);
            tags.push_back("reverb");
        }
        if (do_noise) {
            add_noise_snr(clip, rng.uniform(cfg.snr_db_min, cfg.snr_db_max), rng);
            tags.push_back("noise");
        }
        if (do_mulaw) {
            clamp_peak(clip.samples, 1.0f);
            mulaw_compand(clip);
            tags.push_back("mulaw");
        }
        renormalize_peak(clip.samples);
        return join_tags(tags);
    }
}

std::string perturb_strong(AudioClip& clip, const PerturbConfig& cfg, Rng& rng, bool force_one) {
    for (;;) {
        const bool do_pitch = rng.bernoulli(cfg.pitch_prob);
        const bool do_stretch = rng.bernoulli(cfg.stretch_prob);
        const bool do_lp = rng.bernoulli(cfg.lowpass_prob);
        const bool do_hp = rng.bernoulli(cfg.highpass_prob);
        if (force_one && !do_pitch && !do_stretch && !do_lp && !do_hp) continue;
        std::vector<std::string> tags;
        if (do_pitch) {
            const double st = rng.uniform(-cfg.pitch_semitones_max, cfg.pitch_semitones_max);
            pitch_shift(clip, st);
            tags.push_back("pitch");
        }
        if (do_stretch) {
            time_stretch(clip, rng.uniform(cfg.stretch_min, cfg.stretch_max));
            tags.push_back("stretch");
        }
        if (do_lp) {
            butterworth_lowpass(clip, rng.uniform(cfg.lp_hz_min, cfg.lp_hz_max));
            tags.push_back("lowpass");
        }
        if (do_hp) {
            butterworth_highpass(clip, rng.uniform(cfg.hp_hz_min, cfg.hp_hz_max));
            tags.push_back("highpass");
        }
        renormalize_peak(clip.samples);
        return join_tags(tags);
    }
}

void CorpusConfig::validate() const {
    if (sample_rate < 8000) throw std::invalid_argument("CorpusConfig: sample_rate too low");
    if (clip_duration_s <= 0.0)
        throw std::invalid_argument("CorpusConfig: clip duration must be positive");
    if (train_per_class < 10)
        throw std::invalid_argument("CorpusConfig: train_per_class must be >= 10");
    if (eval1_per_class < 2 || eval2_per_class < 1)
        throw std::invalid_argument("CorpusConfig: eval counts too small");
}

namespace {

struct PlannedItem {
    const GeneratorSpec* spec;
    std::string split;
    int index_in_family;
    bool weak = false;
    bool strong = false;
};

// One plan entry per clip; class 5 deals clips round-robin over its family
// set so per-class histograms are exact.
void plan_split(std::vector<PlannedItem>& plan, const std::string& split, int per_class,
                const std::vector<GeneratorSpec>& unknown_set, bool weak_half, bool strong_all) {
    std::map<const GeneratorSpec*, int> family_count;
    auto push = [&](const GeneratorSpec& fam, int seq_in_class) {
        plan.push_back({&fam, split, family_count[&fam]++,
                        weak_half && seq_in_class % 2 == 1, strong_all});
    };
    for (const auto& fam : known_families())
        for (int i = 0; i < per_class; ++i) push(fam, i);
    for (int i = 0; i < per_class; ++i) push(unknown_set[i % unknown_set.size()], i);
}

}  // namespace

std::vector<BuiltClip> build_corpus(const CorpusConfig& cfg, int threads) {
    cfg.validate();
    std::vector<PlannedItem> plan;
    plan_split(plan, "train", cfg.train_per_class, train_unknown_families(), false, false);
    plan_split(plan, "eval1", cfg.eval1_per_class, eval_unknown_families(), true, false);
    plan_split(plan, "eval2", cfg.eval2_per_class, eval_unknown_families(), false, true);

    std::vector<BuiltClip> built(plan.size());
    Rng master(cfg.seed);
    parallel_for(plan.size(), threads, [&](size_t i) {
        const PlannedItem& p = plan[i];
        Rng rng = master.fork(static_cast<uint64_t>(i));
        AudioClip clip = gen_sample(*p.spec, cfg.clip_duration_s, cfg.sample_rate, rng);
        std::string tags = "none";
        if (p.weak) tags = perturb_weak(clip, cfg.perturb, rng, /*force_one=*/true);
        if (p.strong) tags = perturb_strong(clip, cfg.perturb, rng, /*force_one=*/true);
        clamp_peak(clip.samples, 0.99f);  // headroom for 16-bit storage

        std::ostringstream name;
        name << p.split << "/" << p.spec->family << "_";
        name.fill('0');
        name.width(4);
        name << p.index_in_family;
        name << ".wav";
        built[i].clip = std::move(clip);
        built[i].item = {name.str(), p.spec->class_id, p.spec->family, p.split, tags};
    });
    return built;
}

std::vector<CorpusItem> write_corpus(const std::string& root, const CorpusConfig& cfg,
                                     int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(root) / "train");
    fs::create_directories(fs::path(root) / "eval1");
    fs::create_directories(fs::path(root) / "eval2");

    std::vector<BuiltClip> built = build_corpus(cfg, threads);
    std::vector<CorpusItem> items(built.size());
    parallel_for(built.size(), threads, [&](size_t i) {
        save_wav((fs::path(root) / built[i].item.filename).string(), built[i].clip);
        items[i] = built[i].item;
    });

    std::ofstream manifest(fs::path(root) / "manifest.csv");
    if (!manifest) throw std::runtime_error("write_corpus: cannot write manifest");
    manifest << "filename,class_id,family,split,perturbations\n";
    for (const auto& item : items)
        manifest << item.filename << "," << item.class_id << "," << item.family << ","
                 << item.split << "," << item.perturbations << "\n";
    return items;
}

std::vector<CorpusItem> read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("manifest: empty file");
    if (line != "filename,class_id,family,split,perturbations")
        throw std::runtime_error("manifest: unexpected header");
    std::vector<CorpusItem> items;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) throw std::runtime_error("manifest: malformed row: " + line);
        CorpusItem item;
        item.filename = fields[0];
        item.class_id = std::stoi(fields[1]);
        item.family = fields[2];
        item.split = fields[3];
        item.perturbations = fields[4];
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace vocattr

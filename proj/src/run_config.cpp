#include "vocattr/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace vocattr {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items())
        if (!allowed.contains(key))
            throw std::runtime_error("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SpecConfig RunConfig::spec_config() const {
    if (preset == "toy") return SpecConfig::toy();
    if (preset == "standard") return SpecConfig::standard();
    if (preset == "extended") return SpecConfig::extended();
    throw std::runtime_error("config: unknown preset '" + preset + "'");
}

FeatureConfig RunConfig::feature_config() const { return FeatureConfig{spec_config(), segment_s}; }

void RunConfig::validate() const {
    if (threads < 1) throw std::runtime_error("config: threads must be >= 1");
    if (!(segment_s > 0.0)) throw std::runtime_error("config: segment_s must be positive");
    spec_config();  // throws on a bad preset
    corpus.validate();
    train.validate();
    augment.validate();
    model.validate();
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config: parse error in " + path + ": " + e.what());
    }

    RunConfig cfg;
    check_keys(j, "root",
               {"corpus_dir", "run_dir", "threads", "preset", "segment_s", "corpus", "train",
                "augment", "model", "ensemble"});
    maybe(j, "corpus_dir", cfg.corpus_dir);
    maybe(j, "run_dir", cfg.run_dir);
    maybe(j, "threads", cfg.threads);
    maybe(j, "preset", cfg.preset);
    maybe(j, "segment_s", cfg.segment_s);
    maybe(j, "ensemble", cfg.ensemble);

    if (j.contains("corpus")) {
        const json& c = j.at("corpus");
        check_keys(c, "corpus",
                   {"sample_rate", "clip_duration_s", "train_per_class", "eval1_per_class",
                    "eval2_per_class", "seed"});
        maybe(c, "sample_rate", cfg.corpus.sample_rate);
        maybe(c, "clip_duration_s", cfg.corpus.clip_duration_s);
        maybe(c, "train_per_class", cfg.corpus.train_per_class);
        maybe(c, "eval1_per_class", cfg.corpus.eval1_per_class);
        maybe(c, "eval2_per_class", cfg.corpus.eval2_per_class);
        maybe(c, "seed", cfg.corpus.seed);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, "train",
                   {"learning_rate", "decay_rate", "label_smoothing", "adam_beta1", "adam_beta2",
                    "adam_eps", "epochs", "batch_size", "n_folds", "seed"});
        maybe(t, "learning_rate", cfg.train.learning_rate);
        maybe(t, "decay_rate", cfg.train.decay_rate);
        maybe(t, "label_smoothing", cfg.train.label_smoothing);
        maybe(t, "adam_beta1", cfg.train.adam_beta1);
        maybe(t, "adam_beta2", cfg.train.adam_beta2);
        maybe(t, "adam_eps", cfg.train.adam_eps);
        maybe(t, "epochs", cfg.train.epochs);
        maybe(t, "batch_size", cfg.train.batch_size);
        maybe(t, "n_folds", cfg.train.n_folds);
        maybe(t, "seed", cfg.train.seed);
    }
    if (j.contains("augment")) {
        const json& a = j.at("augment");
        check_keys(a, "augment",
                   {"mix_prob", "noise_prob", "mask_prob", "jpeg_prob", "mixup_alpha",
                    "mixup_beta", "noise_sigma_max", "mask_max_time", "mask_max_freq",
                    "jpeg_quality_min", "jpeg_quality_max"});
        maybe(a, "mix_prob", cfg.augment.mix_prob);
        maybe(a, "noise_prob", cfg.augment.noise_prob);
        maybe(a, "mask_prob", cfg.augment.mask_prob);
        maybe(a, "jpeg_prob", cfg.augment.jpeg_prob);
        maybe(a, "mixup_alpha", cfg.augment.mixup_alpha);
        maybe(a, "mixup_beta", cfg.augment.mixup_beta);
        maybe(a, "noise_sigma_max", cfg.augment.noise_sigma_max);
        maybe(a, "mask_max_time", cfg.augment.mask_max_time);
        maybe(a, "mask_max_freq", cfg.augment.mask_max_freq);
        maybe(a, "jpeg_quality_min", cfg.augment.jpeg_quality_min);
        maybe(a, "jpeg_quality_max", cfg.augment.jpeg_quality_max);
    }
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, "model", {"channels", "n_classes"});
        maybe(m, "channels", cfg.model.channels);
        maybe(m, "n_classes", cfg.model.n_classes);
    }

    cfg.validate();
    return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    json j;
    j["corpus_dir"] = cfg.corpus_dir;
    j["run_dir"] = cfg.run_dir;
    j["threads"] = cfg.threads;
    j["preset"] = cfg.preset;
    j["segment_s"] = cfg.segment_s;
    j["ensemble"] = cfg.ensemble;
    j["corpus"] = {{"sample_rate", cfg.corpus.sample_rate},
                   {"clip_duration_s", cfg.corpus.clip_duration_s},
                   {"train_per_class", cfg.corpus.train_per_class},
                   {"eval1_per_class", cfg.corpus.eval1_per_class},
                   {"eval2_per_class", cfg.corpus.eval2_per_class},
                   {"seed", cfg.corpus.seed}};
    j["train"] = {{"learning_rate", cfg.train.learning_rate},
                  {"decay_rate", cfg.train.decay_rate},
                  {"label_smoothing", cfg.train.label_smoothing},
                  {"adam_beta1", cfg.train.adam_beta1},
                  {"adam_beta2", cfg.train.adam_beta2},
                  {"adam_eps", cfg.train.adam_eps},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"n_folds", cfg.train.n_folds},
                  {"seed", cfg.train.seed}};
    j["augment"] = {{"mix_prob", cfg.augment.mix_prob},
                    {"noise_prob", cfg.augment.noise_prob},
                    {"mask_prob", cfg.augment.mask_prob},
                    {"jpeg_prob", cfg.augment.jpeg_prob},
                    {"mixup_alpha", cfg.augment.mixup_alpha},
                    {"mixup_beta", cfg.augment.mixup_beta},
                    {"noise_sigma_max", cfg.augment.noise_sigma_max},
                    {"mask_max_time", cfg.augment.mask_max_time},
                    {"mask_max_freq", cfg.augment.mask_max_freq},
                    {"jpeg_quality_min", cfg.augment.jpeg_quality_min},
                    {"jpeg_quality_max", cfg.augment.jpeg_quality_max}};
    j["model"] = {{"channels", cfg.model.channels}, {"n_classes", cfg.model.n_classes}};

    std::ofstream os(path);
    if (!os) throw std::runtime_error("config: cannot write: " + path);
    os << j.dump(2) << "\n";
}

}  // namespace vocattr

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vocattr/augment.hpp"
#include "vocattr/datagen.hpp"
#include "vocattr/dsp.hpp"
#include "vocattr/metrics.hpp"
#include "vocattr/nn.hpp"

namespace vocattr {

enum class SourceTag { Known, UnknownExternal, Pseudo };

struct Example {
    Grid spec;
    std::vector<double> label;  // 6-simplex; one-hot except for pseudo labels
    SourceTag tag = SourceTag::Known;
    std::string family;
    std::string id;  // manifest filename or synthetic identifier
};

using Dataset = std::vector<Example>;

int argmax_class(const std::vector<double>& v);
std::vector<double> one_hot(int class_id, int n_classes = kNumClasses);

// Union of `known` (classes 0-4 only) with every example from the unknown
// sources relabeled to one-hot class 5 and tagged unknown-external.
Dataset assemble_unknown(const Dataset& known, const std::vector<Dataset>& unknown_sources);

struct TrainConfig {
    double learning_rate = 1e-3;
    double decay_rate = 0.9;  // per-epoch multiplier
    double label_smoothing = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 60;
    int batch_size = 32;
    int n_folds = 5;
    uint64_t seed = 7;

    void validate() const;
};

struct FoldSplit {
    std::vector<size_t> train_idx, val_idx;
};

// Stratified by argmax label: per-class index lists are shuffled (seeded) and
// dealt round-robin, so per-fold class counts stay within 1 of proportional.
std::vector<FoldSplit> make_folds(const Dataset& ds, int k, uint64_t seed);

// Trains one model on ds[train_idx] with augmentation. Deterministic per
// (data, configs, seed). epochs == 0 returns the freshly initialized model.
Cnn<float> train_model(const Dataset& ds, const std::vector<size_t>& train_idx,
                       const TrainConfig& tc, const AugmentConfig& ac, const ModelConfig& mc,
                       uint64_t seed, std::vector<double>* epoch_losses = nullptr);

std::vector<std::vector<double>> predict_probs(const Cnn<float>& model, const Dataset& ds,
                                               const std::vector<size_t>& idx,
                                               int batch_size = 64);
std::vector<std::vector<double>> predict_probs(const Cnn<float>& model, const Dataset& ds,
                                               int batch_size = 64);

MetricsReport evaluate_on(const Cnn<float>& model, const Dataset& ds,
                          const std::vector<size_t>& idx);

struct FoldResult {
    Cnn<float> model{ModelConfig{}};
    MetricsReport report;  // held-out fold, no augmentation
    std::vector<double> epoch_losses;
};

FoldResult train_fold(const Dataset& ds, const std::vector<FoldSplit>& folds, int fold_id,
                      const TrainConfig& tc, const AugmentConfig& ac, const ModelConfig& mc);

// Full cross-validation pass; folds may train in parallel, results are
// independent of scheduling. `extra_train` examples (e.g. pseudo-labeled
// data) are appended to every fold's training partition, never to
// validation, and never influence the stratified split itself.
std::vector<FoldResult> run_cv(const Dataset& ds, const Dataset& extra_train,
                               const TrainConfig& tc, const AugmentConfig& ac,
                               const ModelConfig& mc, int threads);

// Elementwise mean of per-model softmax outputs.
std::vector<double> ensemble_predict(const std::vector<Cnn<float>>& models, const Grid& spec);
std::vector<std::vector<double>> ensemble_predict_all(const std::vector<Cnn<float>>& models,
                                                      const Dataset& ds, int batch_size = 64);

// Soft labels straight from the ensemble: no thresholding, no hardening.
Dataset pseudo_label(const std::vector<Cnn<float>>& models, const Dataset& unlabeled);

// One retraining round with pseudo examples as additional training data
// (unit weight). CV folds are made from `ds` alone.
std::vector<FoldResult> retrain_with_pseudo(const Dataset& ds, const Dataset& pseudo,
                                            const TrainConfig& tc, const AugmentConfig& ac,
                                            const ModelConfig& mc, int threads);

// Open-set baseline: a 5-class model declares class 5 when its top softmax
// probability falls below tau. tau must lie strictly inside (0, 1).
int baseline_threshold_predict(const Cnn<float>& model, const Grid& spec, double tau);
int threshold_decision(const std::vector<double>& probs, double tau);

inline const std::vector<double>& threshold_grid() {
    static const std::vector<double> grid{0.5, 0.55, 0.6, 0.65, 0.7, 0.75,
                                          0.8, 0.85, 0.9, 0.95};
    return grid;
}

// Sweeps the tau grid and returns (best tau, best accuracy); ties take the
// smallest tau.
std::pair<double, double> best_threshold_accuracy(
    const std::vector<std::vector<double>>& probs5, const std::vector<int>& truth);

// --- feature building ------------------------------------------------------

struct FeatureConfig {
    SpecConfig spec = SpecConfig::toy();
    double segment_s = 1.5;
};

// Loads every manifest item (paths relative to corpus_root), resamples to the
// front-end rate if needed, takes a random (training) or center (evaluation)
// segment, z-normalizes, and computes the log-mel grid. Output order matches
// `items`; deterministic and independent of thread count.
Dataset build_features(const std::string& corpus_root, const std::vector<CorpusItem>& items,
                       const FeatureConfig& fc, uint64_t seed, int threads,
                       bool random_segments);

std::vector<CorpusItem> filter_split(const std::vector<CorpusItem>& items,
                                     const std::string& split);

}  // namespace vocattr

#include "vocattr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "vocattr/parallel.hpp"

namespace vocattr {

namespace {

constexpr uint64_t kFoldStream = 100;  // keeps fold seeds clear of class streams

bool on_simplex(const std::vector<double>& v, double tol = 1e-6) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

void check_same_shape(const Dataset& ds) {
    for (size_t i = 1; i < ds.size(); ++i)
        if (ds[i].spec.rows != ds[0].spec.rows || ds[i].spec.cols != ds[0].spec.cols)
            throw std::invalid_argument("pipeline: examples have mismatched spectrogram shapes");
}

}  // namespace

int argmax_class(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<double> one_hot(int class_id, int n_classes) {
    if (class_id < 0 || class_id >= n_classes)
        throw std::invalid_argument("one_hot: class id out of range");
    std::vector<double> v(n_classes, 0.0);
    v[class_id] = 1.0;
    return v;
}

Dataset assemble_unknown(const Dataset& known, const std::vector<Dataset>& unknown_sources) {
    Dataset out;
    out.reserve(known.size());
    for (const Example& ex : known) {
        if (argmax_class(ex.label) > 4)
            throw std::invalid_argument("assemble_unknown: known set contains a label above 4");
        out.push_back(ex);
    }
    for (const Dataset& src : unknown_sources)
        for (const Example& ex : src) {
            Example relabeled = ex;
            relabeled.label = one_hot(5);
            relabeled.tag = SourceTag::UnknownExternal;
            out.push_back(std::move(relabeled));
        }
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (!(decay_rate > 0.0 && decay_rate <= 1.0))
        throw std::invalid_argument("TrainConfig: need 0 < decay_rate <= 1");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
        throw std::invalid_argument("TrainConfig: need 0 <= label_smoothing < 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw std::invalid_argument("TrainConfig: betas must lie in (0, 1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (n_folds < 2) throw std::invalid_argument("TrainConfig: n_folds must be >= 2");
}

std::vector<FoldSplit> make_folds(const Dataset& ds, int k, uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: need k >= 2");
    std::vector<std::vector<size_t>> by_class(kNumClasses);
    for (size_t i = 0; i < ds.size(); ++i) by_class[argmax_class(ds[i].label)].push_back(i);

    Rng root(seed);
    std::vector<std::vector<size_t>> fold_members(k);
    for (int c = 0; c < kNumClasses; ++c) {
        std::vector<size_t>& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < static_cast<size_t>(k))
            throw std::invalid_argument("make_folds: a class has fewer examples than folds");
        Rng rng = root.fork(static_cast<uint64_t>(c));
        for (size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
        for (size_t i = 0; i < idx.size(); ++i)
            fold_members[i % k].push_back(idx[i]);
    }

    std::vector<FoldSplit> folds(k);
    for (int f = 0; f < k; ++f) {
        folds[f].val_idx = fold_members[f];
        std::sort(folds[f].val_idx.begin(), folds[f].val_idx.end());
        for (int g = 0; g < k; ++g)
            if (g != f)
                folds[f].train_idx.insert(folds[f].train_idx.end(), fold_members[g].begin(),
                                          fold_members[g].end());
        std::sort(folds[f].train_idx.begin(), folds[f].train_idx.end());
    }
    return folds;
}

namespace {

Tensor4<float> make_batch(const std::vector<const Grid*>& grids) {
    const int rows = grids[0]->rows, cols = grids[0]->cols;
    Tensor4<float> x(static_cast<int>(grids.size()), 1, rows, cols);
    for (size_t j = 0; j < grids.size(); ++j) {
        float* plane = x.plane(static_cast<int>(j), 0);
        const std::vector<double>& v = grids[j]->v;
        for (size_t i = 0; i < v.size(); ++i) plane[i] = static_cast<float>(v[i]);
    }
    return x;
}

}  // namespace

Cnn<float> train_model(const Dataset& ds, const std::vector<size_t>& train_idx,
                       const TrainConfig& tc, const AugmentConfig& ac, const ModelConfig& mc,
                       uint64_t seed, std::vector<double>* epoch_losses) {
    tc.validate();
    ac.validate();
    mc.validate();
    if (train_idx.empty()) throw std::invalid_argument("train_model: empty training set");

    std::vector<LabeledExample> pool;
    pool.reserve(train_idx.size());
    for (size_t idx : train_idx) {
        if (idx >= ds.size()) throw std::invalid_argument("train_model: index out of range");
        if (!on_simplex(ds[idx].label))
            throw std::invalid_argument("train_model: label off the simplex");
        std::vector<double> label(ds[idx].label.begin(),
                                  ds[idx].label.begin() + mc.n_classes);
        if (!on_simplex(label))  // catches class-5 data fed to a 5-class model
            throw std::invalid_argument("train_model: label outside the model's class range");
        pool.push_back({ds[idx].spec, std::move(label)});
    }
    for (size_t i = 1; i < pool.size(); ++i)
        if (pool[i].spec.rows != pool[0].spec.rows || pool[i].spec.cols != pool[0].spec.cols)
            throw std::invalid_argument("train_model: mismatched spectrogram shapes");

    Rng root(seed);
    Cnn<float> model(mc);
    model.he_init(root.fork(0).next_u64());
    Adam<float> opt(model, tc.adam_beta1, tc.adam_beta2, tc.adam_eps);

    std::vector<size_t> order(pool.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    ForwardCache<float> cache;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        Rng erng = root.fork(1 + static_cast<uint64_t>(epoch));
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[erng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
        const double lr = lr_schedule(epoch, tc.learning_rate, tc.decay_rate);

        double loss_sum = 0.0;
        size_t n_batches = 0;
        for (size_t start = 0; start < order.size(); start += tc.batch_size) {
            const size_t bn = std::min<size_t>(tc.batch_size, order.size() - start);
            std::vector<LabeledExample> batch;
            batch.reserve(bn);
            for (size_t j = 0; j < bn; ++j)
                batch.push_back(augment_example(pool[order[start + j]], pool, ac, erng));

            std::vector<const Grid*> grids(bn);
            std::vector<double> targets(bn * mc.n_classes);
            for (size_t j = 0; j < bn; ++j) {
                grids[j] = &batch[j].spec;
                const std::vector<double> tgt =
                    smoothed_target(batch[j].label, tc.label_smoothing);
                std::copy(tgt.begin(), tgt.end(), targets.begin() + j * mc.n_classes);
            }
            const Tensor4<float> x = make_batch(grids);
            const std::vector<double> logits = model.forward(x, cache);

            if (n_batches == 0) {  // once per epoch: model outputs stay on the simplex
                for (size_t j = 0; j < bn; ++j) {
                    const std::vector<double> row(logits.begin() + j * mc.n_classes,
                                                  logits.begin() + (j + 1) * mc.n_classes);
                    if (!on_simplex(softmax(row)))
                        throw std::runtime_error("train_model: softmax left the simplex");
                }
            }

            std::vector<double> dlogits;
            const double loss = batch_loss_grad(logits, targets, mc.n_classes, dlogits);
            if (!std::isfinite(loss)) throw std::runtime_error("train_model: non-finite loss");
            model.zero_grad();
            model.backward(cache, dlogits);
            opt.step(model, lr);
            loss_sum += loss;
            ++n_batches;
        }
        if (epoch_losses) epoch_losses->push_back(loss_sum / static_cast<double>(n_batches));
    }
    return model;
}

std::vector<std::vector<double>> predict_probs(const Cnn<float>& model, const Dataset& ds,
                                               const std::vector<size_t>& idx, int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("predict_probs: batch_size must be >= 1");
    std::vector<std::vector<double>> probs(idx.size());
    for (size_t start = 0; start < idx.size(); start += batch_size) {
        const size_t bn = std::min<size_t>(batch_size, idx.size() - start);
        std::vector<const Grid*> grids(bn);
        for (size_t j = 0; j < bn; ++j) grids[j] = &ds[idx[start + j]].spec;
        const Tensor4<float> x = make_batch(grids);
        std::vector<std::vector<double>> batch_probs = model.predict(x);
        for (size_t j = 0; j < bn; ++j) probs[start + j] = std::move(batch_probs[j]);
    }
    return probs;
}

std::vector<std::vector<double>> predict_probs(const Cnn<float>& model, const Dataset& ds,
                                               int batch_size) {
    std::vector<size_t> idx(ds.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return predict_probs(model, ds, idx, batch_size);
}

MetricsReport evaluate_on(const Cnn<float>& model, const Dataset& ds,
                          const std::vector<size_t>& idx) {
    if (idx.empty()) throw std::invalid_argument("evaluate_on: empty evaluation set");
    const std::vector<std::vector<double>> probs = predict_probs(model, ds, idx);
    std::vector<int> truth(idx.size()), pred(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        truth[i] = argmax_class(ds[idx[i]].label);
        pred[i] = argmax_class(probs[i]);
    }
    return compute_metrics(truth, pred, kNumClasses);
}

FoldResult train_fold(const Dataset& ds, const std::vector<FoldSplit>& folds, int fold_id,
                      const TrainConfig& tc, const AugmentConfig& ac, const ModelConfig& mc) {
    if (fold_id < 0 || fold_id >= static_cast<int>(folds.size()))
        throw std::invalid_argument("train_fold: fold id out of range");
    const FoldSplit& split = folds[fold_id];
    FoldResult result;
    const uint64_t fold_seed =
        Rng(tc.seed).fork(kFoldStream + static_cast<uint64_t>(fold_id)).next_u64();
    result.model = train_model(ds, split.train_idx, tc, ac, mc, fold_seed,
                               &result.epoch_losses);
    result.report = evaluate_on(result.model, ds, split.val_idx);
    return result;
}

std::vector<FoldResult> run_cv(const Dataset& ds, const Dataset& extra_train,
                               const TrainConfig& tc, const AugmentConfig& ac,
                               const ModelConfig& mc, int threads) {
    check_same_shape(ds);
    const std::vector<FoldSplit> folds = make_folds(ds, tc.n_folds, tc.seed);

    Dataset combined = ds;
    combined.insert(combined.end(), extra_train.begin(), extra_train.end());
    std::vector<FoldSplit> extended = folds;
    for (FoldSplit& split : extended)
        for (size_t i = 0; i < extra_train.size(); ++i)
            split.train_idx.push_back(ds.size() + i);

    std::vector<FoldResult> results(folds.size());
    parallel_for(folds.size(), threads, [&](size_t f) {
        results[f] = train_fold(combined, extended, static_cast<int>(f), tc, ac, mc);
    });
    return results;
}

std::vector<double> ensemble_predict(const std::vector<Cnn<float>>& models, const Grid& spec) {
    if (models.empty()) throw std::invalid_argument("ensemble_predict: no models");
    std::vector<const Grid*> grids{&spec};
    const Tensor4<float> x = make_batch(grids);
    std::vector<double> mean;
    for (const auto& model : models) {
        const std::vector<double> p = model.predict(x)[0];
        if (mean.empty())
            mean = p;
        else {
            if (p.size() != mean.size())
                throw std::invalid_argument("ensemble_predict: models disagree on class count");
            for (size_t c = 0; c < p.size(); ++c) mean[c] += p[c];
        }
    }
    for (double& x2 : mean) x2 /= static_cast<double>(models.size());
    return mean;
}

std::vector<std::vector<double>> ensemble_predict_all(const std::vector<Cnn<float>>& models,
                                                      const Dataset& ds, int batch_size) {
    if (models.empty()) throw std::invalid_argument("ensemble_predict: no models");
    if (ds.empty()) return {};
    std::vector<std::vector<double>> mean;
    for (const auto& model : models) {
        std::vector<std::vector<double>> p = predict_probs(model, ds, batch_size);
        if (mean.empty())
            mean = std::move(p);
        else
            for (size_t i = 0; i < mean.size(); ++i) {
                if (p[i].size() != mean[i].size())
                    throw std::invalid_argument(
                        "ensemble_predict: models disagree on class count");
                for (size_t c = 0; c < mean[i].size(); ++c) mean[i][c] += p[i][c];
            }
    }
    for (auto& row : mean)
        for (double& x : row) x /= static_cast<double>(models.size());
    return mean;
}

Dataset pseudo_label(const std::vector<Cnn<float>>& models, const Dataset& unlabeled) {
    const std::vector<std::vector<double>> probs = ensemble_predict_all(models, unlabeled);
    Dataset out = unlabeled;
    for (size_t i = 0; i < out.size(); ++i) {
        out[i].label = probs[i];
        out[i].tag = SourceTag::Pseudo;
    }
    return out;
}

std::vector<FoldResult> retrain_with_pseudo(const Dataset& ds, const Dataset& pseudo,
                                            const TrainConfig& tc, const AugmentConfig& ac,
                                            const ModelConfig& mc, int threads) {
    for (const Example& ex : pseudo)
        if (!on_simplex(ex.label))
            throw std::invalid_argument("retrain_with_pseudo: pseudo label off the simplex");
    return run_cv(ds, pseudo, tc, ac, mc, threads);
}

int threshold_decision(const std::vector<double>& probs, double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw std::invalid_argument("threshold_decision: tau must lie in (0, 1)");
    const int top = argmax_class(probs);
    return probs[top] >= tau ? top : 5;
}

int baseline_threshold_predict(const Cnn<float>& model, const Grid& spec, double tau) {
    std::vector<const Grid*> grids{&spec};
    return threshold_decision(model.predict(make_batch(grids))[0], tau);
}

std::pair<double, double> best_threshold_accuracy(
    const std::vector<std::vector<double>>& probs5, const std::vector<int>& truth) {
    if (probs5.size() != truth.size() || truth.empty())
        throw std::invalid_argument("best_threshold_accuracy: size mismatch");
    double best_tau = threshold_grid().front(), best_acc = -1.0;
    for (double tau : threshold_grid()) {
        long correct = 0;
        for (size_t i = 0; i < truth.size(); ++i)
            if (threshold_decision(probs5[i], tau) == truth[i]) ++correct;
        const double acc = static_cast<double>(correct) / static_cast<double>(truth.size());
        if (acc > best_acc) {
            best_acc = acc;
            best_tau = tau;
        }
    }
    return {best_tau, best_acc};
}

Dataset build_features(const std::string& corpus_root, const std::vector<CorpusItem>& items,
                       const FeatureConfig& fc, uint64_t seed, int threads,
                       bool random_segments) {
    fc.spec.validate();
    if (!(fc.segment_s > 0.0))
        throw std::invalid_argument("build_features: segment duration must be positive");

    Dataset out(items.size());
    Rng master(seed);
    parallel_for(items.size(), threads, [&](size_t i) {
        const CorpusItem& item = items[i];
        AudioClip clip =
            load_wav((std::filesystem::path(corpus_root) / item.filename).string());
        if (clip.sample_rate != fc.spec.sample_rate)
            clip = resample(clip, fc.spec.sample_rate);
        AudioClip segment;
        if (random_segments) {
            Rng rng = master.fork(static_cast<uint64_t>(i));
            segment = random_segment(clip, fc.segment_s, rng);
        } else {
            segment = center_segment(clip, fc.segment_s);
        }
        const MelSpec spec = transform(z_normalize(segment), fc.spec);
        out[i] = {spec.values, one_hot(item.class_id),
                  item.class_id == 5 ? SourceTag::UnknownExternal : SourceTag::Known,
                  item.family, item.filename};
    });
    return out;
}

std::vector<CorpusItem> filter_split(const std::vector<CorpusItem>& items,
                                     const std::string& split) {
    std::vector<CorpusItem> out;
    for (const CorpusItem& item : items)
        if (item.split == split) out.push_back(item);
    return out;
}

}  // namespace vocattr

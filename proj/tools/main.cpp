#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vocattr/metrics.hpp"
#include "vocattr/pipeline.hpp"
#include "vocattr/run_config.hpp"

namespace fs = std::filesystem;
using namespace vocattr;

namespace {

std::string fmt_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string fmt_prob(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string metrics_text(const MetricsReport& r) {
    std::ostringstream os;
    os << "accuracy " << fmt_double(r.accuracy) << "\n"
       << "macro_precision " << fmt_double(r.macro_precision) << "\n"
       << "macro_recall " << fmt_double(r.macro_recall) << "\n"
       << "macro_f1 " << fmt_double(r.macro_f1) << "\n";
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cli: cannot write " + path.string());
    os << text;
}

void write_confusion_csv(const fs::path& path, const std::vector<std::vector<long>>& cm) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cli: cannot write " + path.string());
    os << "true\\predicted";
    for (size_t j = 0; j < cm.size(); ++j) os << "," << j;
    os << "\n";
    for (size_t i = 0; i < cm.size(); ++i) {
        os << i;
        for (size_t j = 0; j < cm[i].size(); ++j) os << "," << cm[i][j];
        os << "\n";
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CorpusItem> load_manifest_checked(const RunConfig& cfg) {
    const fs::path path = fs::path(cfg.corpus_dir) / "manifest.csv";
    if (!fs::exists(path))
        throw std::runtime_error("cli: corpus manifest not found: " + path.string() +
                                 " (run the gen command first)");
    return read_manifest(path.string());
}

std::vector<Cnn<float>> load_ensemble(const RunConfig& cfg, const std::string& model_dir) {
    std::vector<std::string> paths = cfg.ensemble;
    if (paths.empty()) {
        if (!fs::is_directory(model_dir))
            throw std::runtime_error("cli: model directory not found: " + model_dir);
        for (const auto& entry : fs::directory_iterator(model_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".bin")
                paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
    }
    if (paths.empty())
        throw std::runtime_error("cli: no model files (*.bin) in " + model_dir);
    std::vector<Cnn<float>> models;
    models.reserve(paths.size());
    for (const std::string& p : paths) models.push_back(load_model(p));
    return models;
}

void write_cv_outputs(const fs::path& out_dir, const std::vector<FoldResult>& results,
                      const std::string& model_prefix) {
    fs::create_directories(out_dir);
    std::vector<double> f1s, accs;
    std::ostringstream report;
    for (size_t f = 0; f < results.size(); ++f) {
        const fs::path model_path = out_dir / (model_prefix + std::to_string(f) + ".bin");
        save_model(model_path.string(), results[f].model);
        write_text(out_dir / (model_prefix + std::to_string(f) + "_metrics.txt"),
                   metrics_text(results[f].report));
        write_confusion_csv(out_dir / (model_prefix + std::to_string(f) + "_confusion.csv"),
                            results[f].report.confusion);
        f1s.push_back(results[f].report.macro_f1);
        accs.push_back(results[f].report.accuracy);
        report << "fold " << f << " macro_f1 " << fmt_double(results[f].report.macro_f1)
               << " accuracy " << fmt_double(results[f].report.accuracy) << "\n";
        std::cerr << "fold " << f << ": macro F1 " << fmt_double(results[f].report.macro_f1)
                  << ", accuracy " << fmt_double(results[f].report.accuracy) << "\n";
    }
    double mean_f1 = 0.0, mean_acc = 0.0;
    for (size_t f = 0; f < results.size(); ++f) {
        mean_f1 += f1s[f];
        mean_acc += accs[f];
    }
    mean_f1 /= static_cast<double>(results.size());
    mean_acc /= static_cast<double>(results.size());
    report << "mean_macro_f1 " << fmt_double(mean_f1) << "\n"
           << "median_macro_f1 " << fmt_double(median(f1s)) << "\n"
           << "mean_accuracy " << fmt_double(mean_acc) << "\n"
           << "median_accuracy " << fmt_double(median(accs)) << "\n";
    write_text(out_dir / "cv_report.txt", report.str());
    std::cerr << "mean macro F1 " << fmt_double(mean_f1) << "\n";
}

Dataset training_features(const RunConfig& cfg, const std::vector<CorpusItem>& manifest) {
    const std::vector<CorpusItem> items = filter_split(manifest, "train");
    if (items.empty()) throw std::runtime_error("cli: manifest has no train split");
    return build_features(cfg.corpus_dir, items, cfg.feature_config(), cfg.train.seed,
                          cfg.threads, /*random_segments=*/true);
}

void cmd_gen(const RunConfig& cfg) {
    const std::vector<CorpusItem> items = write_corpus(cfg.corpus_dir, cfg.corpus, cfg.threads);
    std::map<std::string, int> per_split;
    for (const CorpusItem& item : items) ++per_split[item.split];
    std::cerr << "wrote " << items.size() << " clips under " << cfg.corpus_dir << " (";
    bool first = true;
    for (const auto& [split, count] : per_split) {
        std::cerr << (first ? "" : ", ") << split << " " << count;
        first = false;
    }
    std::cerr << ")\n";
}

void cmd_train(const RunConfig& cfg) {
    const Dataset ds = training_features(cfg, load_manifest_checked(cfg));
    const std::vector<FoldResult> results =
        run_cv(ds, {}, cfg.train, cfg.augment, cfg.model, cfg.threads);
    fs::create_directories(cfg.run_dir);
    save_run_config((fs::path(cfg.run_dir) / "config.json").string(), cfg);
    write_cv_outputs(cfg.run_dir, results, "fold_");
}

void cmd_pseudo(const RunConfig& cfg) {
    const std::vector<CorpusItem> manifest = load_manifest_checked(cfg);
    std::vector<CorpusItem> items = filter_split(manifest, "eval1");
    const std::vector<CorpusItem> eval2 = filter_split(manifest, "eval2");
    items.insert(items.end(), eval2.begin(), eval2.end());
    if (items.empty()) throw std::runtime_error("cli: manifest has no eval splits");

    const std::vector<Cnn<float>> models = load_ensemble(cfg, cfg.run_dir);
    const Dataset unlabeled = build_features(cfg.corpus_dir, items, cfg.feature_config(), 0,
                                             cfg.threads, /*random_segments=*/false);
    const Dataset labeled = pseudo_label(models, unlabeled);

    const fs::path out = fs::path(cfg.run_dir) / "pseudo.csv";
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cli: cannot write " + out.string());
    os << "filename,p0,p1,p2,p3,p4,p5\n";
    for (const Example& ex : labeled) {
        os << ex.id;
        for (double p : ex.label) os << "," << fmt_prob(p);
        os << "\n";
    }
    std::cerr << "wrote " << labeled.size() << " soft labels to " << out.string() << "\n";
}

void cmd_retrain(const RunConfig& cfg) {
    const std::vector<CorpusItem> manifest = load_manifest_checked(cfg);
    const fs::path pseudo_path = fs::path(cfg.run_dir) / "pseudo.csv";
    std::ifstream is(pseudo_path);
    if (!is)
        throw std::runtime_error("cli: pseudo labels not found: " + pseudo_path.string() +
                                 " (run the pseudo command first)");

    std::map<std::string, const CorpusItem*> by_name;
    for (const CorpusItem& item : manifest) by_name[item.filename] = &item;

    std::string line;
    if (!std::getline(is, line) || line != "filename,p0,p1,p2,p3,p4,p5")
        throw std::runtime_error("cli: unexpected pseudo.csv header");
    std::vector<CorpusItem> items;
    std::vector<std::vector<double>> labels;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("cli: malformed pseudo.csv row: " + line);
        const auto it = by_name.find(fields[0]);
        if (it == by_name.end())
            throw std::runtime_error("cli: pseudo.csv row not in manifest: " + fields[0]);
        items.push_back(*it->second);
        std::vector<double> label(6);
        for (int c = 0; c < 6; ++c) label[c] = std::stod(fields[1 + c]);
        labels.push_back(std::move(label));
    }
    if (items.empty()) throw std::runtime_error("cli: pseudo.csv has no rows");

    Dataset pseudo = build_features(cfg.corpus_dir, items, cfg.feature_config(), 0, cfg.threads,
                                    /*random_segments=*/false);
    for (size_t i = 0; i < pseudo.size(); ++i) {
        pseudo[i].label = labels[i];
        pseudo[i].tag = SourceTag::Pseudo;
    }

    const Dataset ds = training_features(cfg, manifest);
    const std::vector<FoldResult> results =
        retrain_with_pseudo(ds, pseudo, cfg.train, cfg.augment, cfg.model, cfg.threads);
    write_cv_outputs(fs::path(cfg.run_dir) / "retrain", results, "fold_");
}

void cmd_infer(const RunConfig& cfg, const std::string& input, const std::string& model_dir) {
    const std::vector<Cnn<float>> models = load_ensemble(cfg, model_dir);

    std::vector<CorpusItem> items;
    std::string tag;
    if (input == "train" || input == "eval1" || input == "eval2") {
        items = filter_split(load_manifest_checked(cfg), input);
        if (items.empty()) throw std::runtime_error("cli: manifest has no split " + input);
        tag = input;
    } else {
        if (!fs::is_directory(input))
            throw std::runtime_error("cli: input is neither a split name nor a directory: " +
                                     input);
        for (const auto& entry : fs::directory_iterator(input))
            if (entry.is_regular_file() && entry.path().extension() == ".wav")
                items.push_back({entry.path().filename().string(), 0, "", "", ""});
        std::sort(items.begin(), items.end(),
                  [](const CorpusItem& a, const CorpusItem& b) { return a.filename < b.filename; });
        if (items.empty()) throw std::runtime_error("cli: no .wav files in " + input);
        tag = fs::path(input).filename().string();
    }

    const std::string root =
        (input == "train" || input == "eval1" || input == "eval2") ? cfg.corpus_dir : input;
    const Dataset ds = build_features(root, items, cfg.feature_config(), 0, cfg.threads,
                                      /*random_segments=*/false);
    const std::vector<std::vector<double>> probs = ensemble_predict_all(models, ds);

    fs::create_directories(cfg.run_dir);
    const fs::path out = fs::path(cfg.run_dir) / ("predictions_" + tag + ".csv");
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cli: cannot write " + out.string());
    os << "filename,predicted_class,p0,p1,p2,p3,p4,p5\n";
    for (size_t i = 0; i < ds.size(); ++i) {
        os << ds[i].id << "," << argmax_class(probs[i]);
        for (double p : probs[i]) os << "," << fmt_prob(p);
        os << "\n";
    }
    std::cerr << "wrote " << ds.size() << " predictions (" << models.size()
              << "-model ensemble) to " << out.string() << "\n";
}

void cmd_eval(const RunConfig& cfg, const std::string& predictions_path) {
    std::ifstream is(predictions_path);
    if (!is) throw std::runtime_error("cli: cannot open predictions: " + predictions_path);
    const std::vector<CorpusItem> manifest = load_manifest_checked(cfg);
    std::map<std::string, const CorpusItem*> by_name;
    for (const CorpusItem& item : manifest) by_name[item.filename] = &item;

    std::string line;
    if (!std::getline(is, line) || line.rfind("filename,predicted_class", 0) != 0)
        throw std::runtime_error("cli: unexpected predictions header");

    struct Row {
        const CorpusItem* item;
        int predicted;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 2)
            throw std::runtime_error("cli: malformed predictions row: " + line);
        const auto it = by_name.find(fields[0]);
        if (it == by_name.end())
            throw std::runtime_error("cli: prediction join mismatch, not in manifest: " +
                                     fields[0]);
        rows.push_back({it->second, std::stoi(fields[1])});
    }
    if (rows.empty()) throw std::runtime_error("cli: predictions file has no rows");

    std::map<std::string, std::vector<Row>> by_split;
    for (const Row& row : rows) by_split[row.item->split].push_back(row);

    std::ostringstream report;
    const std::string stem = fs::path(predictions_path).stem().string();
    fs::create_directories(cfg.run_dir);
    for (const auto& [split, split_rows] : by_split) {
        std::vector<int> truth, pred;
        for (const Row& row : split_rows) {
            truth.push_back(row.item->class_id);
            pred.push_back(row.predicted);
        }
        const MetricsReport r = compute_metrics(truth, pred, kNumClasses);
        report << "[" << split << "]\n" << metrics_text(r);
        write_confusion_csv(
            fs::path(cfg.run_dir) / ("eval_" + stem + "_" + split + "_confusion.csv"),
            r.confusion);

        // mild-vs-clean weighted score, defined on the eval1-style split
        std::vector<int> truth_clean, pred_clean, truth_pert, pred_pert;
        for (const Row& row : split_rows) {
            if (row.item->perturbations == "none") {
                truth_clean.push_back(row.item->class_id);
                pred_clean.push_back(row.predicted);
            } else {
                truth_pert.push_back(row.item->class_id);
                pred_pert.push_back(row.predicted);
            }
        }
        if (!truth_clean.empty() && !truth_pert.empty()) {
            const double acc_clean =
                compute_metrics(truth_clean, pred_clean, kNumClasses).accuracy;
            const double acc_pert = compute_metrics(truth_pert, pred_pert, kNumClasses).accuracy;
            report << "clean_accuracy " << fmt_double(acc_clean) << "\n"
                   << "perturbed_accuracy " << fmt_double(acc_pert) << "\n"
                   << "weighted_score " << fmt_double(weighted_eval(acc_clean, acc_pert))
                   << "\n";
        } else if (truth_clean.empty() != truth_pert.empty()) {
            std::cerr << "warning: split " << split
                      << " lacks a " << (truth_clean.empty() ? "clean" : "perturbed")
                      << " part; weighted score omitted\n";
        }
        report << "\n";
    }

    const fs::path out = fs::path(cfg.run_dir) / ("eval_" + stem + ".txt");
    write_text(out, report.str());
    std::cout << report.str();
    std::cerr << "wrote " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic voice attribution toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "run configuration (JSON)")->required();
    std::string run_dir_override;
    app.add_option("--run-dir", run_dir_override, "override the configured run directory");
    int64_t seed_override = -1;
    app.add_option("--seed", seed_override, "override corpus (gen) / training seed");
    int threads_override = 0;
    app.add_option("--threads", threads_override, "override worker thread count");

    CLI::App* gen = app.add_subcommand("gen", "synthesize the toy corpus");
    CLI::App* train = app.add_subcommand("train", "cross-validated training run");
    CLI::App* pseudo = app.add_subcommand("pseudo", "soft-label the evaluation splits");
    CLI::App* retrain =
        app.add_subcommand("retrain", "retrain with pseudo labels as extra training data");

    CLI::App* infer = app.add_subcommand("infer", "ensemble predictions for a split/directory");
    std::string infer_input = "eval1";
    infer->add_option("--input", infer_input, "split name (train/eval1/eval2) or WAV directory");
    std::string infer_models;
    infer->add_option("--models", infer_models,
                      "directory holding the *.bin ensemble (default: run dir)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a predictions CSV against the manifest");
    std::string predictions_path;
    eval_cmd->add_option("--predictions", predictions_path, "predictions CSV from infer")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_run_config(config_path);
        if (!run_dir_override.empty()) cfg.run_dir = run_dir_override;
        if (threads_override > 0) cfg.threads = threads_override;
        if (seed_override >= 0) {
            cfg.corpus.seed = static_cast<uint64_t>(seed_override);
            cfg.train.seed = static_cast<uint64_t>(seed_override);
        }

        if (gen->parsed()) cmd_gen(cfg);
        if (train->parsed()) cmd_train(cfg);
        if (pseudo->parsed()) cmd_pseudo(cfg);
        if (retrain->parsed()) cmd_retrain(cfg);
        if (infer->parsed())
            cmd_infer(cfg, infer_input, infer_models.empty() ? cfg.run_dir : infer_models);
        if (eval_cmd->parsed()) cmd_eval(cfg, predictions_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <string>

#include "vocattr/augment.hpp"
#include "vocattr/datagen.hpp"
#include "vocattr/nn.hpp"
#include "vocattr/pipeline.hpp"

namespace vocattr {

// Everything a run needs, loaded from one JSON file so a snapshot of the
// config reproduces the run. Unknown keys are rejected to catch typos.
struct RunConfig {
    std::string corpus_dir = "corpus";
    std::string run_dir = "run";
    int threads = 1;
    std::string preset = "toy";  // toy | standard | extended
    double segment_s = 1.5;
    CorpusConfig corpus;
    TrainConfig train;
    AugmentConfig augment;
    ModelConfig model;
    std::vector<std::string> ensemble;  // explicit model paths; empty = scan run_dir

    SpecConfig spec_config() const;
    FeatureConfig feature_config() const;
    void validate() const;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace vocattr

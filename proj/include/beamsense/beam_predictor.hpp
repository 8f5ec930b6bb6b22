#pragma once

#include <cstdint>
#include <vector>

#include "beamsense/dataset.hpp"
#include "beamsense/mlp.hpp"

namespace beamsense {

struct DnnConfig {
    std::vector<int> hidden_sizes{1024, 1024};
    double learning_rate = 0.01;
    int batch_size = 32;
    int epochs = 100;
    double train_fraction = 0.8;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

// Seeded shuffle of [0, n) followed by an 80/20 style cut. A fixed seed
// gives the same membership on every run.
SplitIndices shuffled_split(int n, double train_fraction, std::uint64_t seed);

// Mini-batch cross-entropy training of the position-to-beam classifier.
// curve, when given, receives one mean-loss entry per epoch.
MlpParams train_beam_predictor(const Dataset& ds, const std::vector<int>& train_indices,
                               int num_beams, const DnnConfig& cfg,
                               std::vector<double>* curve = nullptr);

// Index of the largest logit; ties resolve to the lowest beam index.
int predict_beam(const MlpParams& net, const Eigen::VectorXd& features);

// Position of `label` in the descending ordering of `scores` (0 = best).
// Ties count an equal-scored entry with a lower index as ranked ahead.
int label_rank(const Eigen::VectorXd& scores, int label);

struct TopkAccuracy {
    double top1 = 0.0;
    double top2 = 0.0;
    double top3 = 0.0;
    double average() const { return (top1 + top2 + top3) / 3.0; }
};

TopkAccuracy evaluate_topk(const MlpParams& net, const Dataset& ds,
                           const std::vector<int>& indices);

}  // namespace beamsense

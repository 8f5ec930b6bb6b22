#include "beamsense/beam_predictor.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "beamsense/common.hpp"

namespace beamsense {

void DnnConfig::validate() const {
    if (hidden_sizes.empty())
        throw std::invalid_argument("dnn: need at least one hidden layer");
    for (int h : hidden_sizes)
        if (h < 1)
            throw std::invalid_argument("dnn: hidden sizes must be >= 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("dnn: learning rate must be > 0");
    if (batch_size < 1)
        throw std::invalid_argument("dnn: batch size must be >= 1");
    if (epochs < 1)
        throw std::invalid_argument("dnn: epochs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("dnn: train fraction must lie in (0, 1)");
}

SplitIndices shuffled_split(int n, double train_fraction, std::uint64_t seed) {
    if (n < 2)
        throw std::invalid_argument("shuffled_split: need at least two samples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("shuffled_split: train fraction must lie in (0, 1)");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    int cut = static_cast<int>(train_fraction * n);
    cut = std::clamp(cut, 1, n - 1);
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + cut);
    split.test.assign(order.begin() + cut, order.end());
    return split;
}

MlpParams train_beam_predictor(const Dataset& ds, const std::vector<int>& train_indices,
                               int num_beams, const DnnConfig& cfg, std::vector<double>* curve) {
    cfg.validate();
    if (train_indices.empty())
        throw std::invalid_argument("train_beam_predictor: empty training set");
    if (num_beams < 2)
        throw std::invalid_argument("train_beam_predictor: need at least two beams");
    for (int idx : train_indices) {
        if (idx < 0 || idx >= ds.size())
            throw std::invalid_argument("train_beam_predictor: training index out of range");
        if (ds.records[idx].label < 0 || ds.records[idx].label >= num_beams)
            throw std::invalid_argument("train_beam_predictor: label outside codebook");
    }

    std::vector<int> arch;
    arch.push_back(ds.feature_dim());
    arch.insert(arch.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    arch.push_back(num_beams);

    MlpParams net = mlp_init(arch, mix_seed(cfg.seed, 0x6e6574));
    AdamState adam = adam_init(net);
    std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 0x736875));

    std::vector<int> order = train_indices;
    MlpGrads grads = grads_like(net);
    ForwardCache cache;
    if (curve) curve->clear();
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        const int n = static_cast<int>(order.size());
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int b = std::min(cfg.batch_size, n - start);
            Eigen::MatrixXd x(ds.feature_dim(), b);
            std::vector<int> labels(b);
            for (int i = 0; i < b; ++i) {
                const auto& rec = ds.records[order[start + i]];
                x.col(i) = rec.features;
                labels[i] = rec.label;
            }
            mlp_forward(net, x, &cache);
            zero_grads(grads);
            const double mean_loss = mlp_backward_cross_entropy(net, cache, labels, grads);
            adam_step(net, grads, adam, cfg.learning_rate);
            loss_sum += mean_loss * b;
        }
        if (curve) curve->push_back(loss_sum / n);
    }
    return net;
}

int predict_beam(const MlpParams& net, const Eigen::VectorXd& features) {
    const Eigen::VectorXd logits = mlp_forward_one(net, features);
    int best = 0;
    for (int m = 1; m < logits.size(); ++m)
        if (logits(m) > logits(best)) best = m;
    return best;
}

int label_rank(const Eigen::VectorXd& scores, int label) {
    if (label < 0 || label >= scores.size())
        throw std::invalid_argument("label_rank: label out of range");
    int rank = 0;
    for (int m = 0; m < scores.size(); ++m) {
        if (m == label) continue;
        if (scores(m) > scores(label) || (scores(m) == scores(label) && m < label)) ++rank;
    }
    return rank;
}

TopkAccuracy evaluate_topk(const MlpParams& net, const Dataset& ds,
                           const std::vector<int>& indices) {
    if (indices.empty())
        throw std::invalid_argument("evaluate_topk: empty index set");

    int hit1 = 0, hit2 = 0, hit3 = 0;
    for (int idx : indices) {
        if (idx < 0 || idx >= ds.size())
            throw std::invalid_argument("evaluate_topk: index out of range");
        const auto& rec = ds.records[idx];
        const Eigen::VectorXd logits = mlp_forward_one(net, rec.features);
        const int rank = label_rank(logits, rec.label);
        if (rank < 1) ++hit1;
        if (rank < 2) ++hit2;
        if (rank < 3) ++hit3;
    }
    const double n = static_cast<double>(indices.size());
    return {hit1 / n, hit2 / n, hit3 / n};
}

}  // namespace beamsense

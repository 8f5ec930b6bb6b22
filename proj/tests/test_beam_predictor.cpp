#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "beamsense/beam_predictor.hpp"

using namespace beamsense;

namespace {

Dataset clean_line_dataset(int slots, int beams) {
    TrajectoryConfig t;
    t.num_slots = slots;
    t.jitter_std = 0.0;
    const auto cb = make_dft_codebook(beams, beams);
    return generate_dataset(t, ChannelConfig{}, cb);
}

}  // namespace

TEST_SUITE("beam_predictor") {

TEST_CASE("shuffled split partitions the index range") {
    const auto split = shuffled_split(100, 0.8, 7);
    CHECK(split.train.size() == 80);
    CHECK(split.test.size() == 20);
    std::set<int> seen(split.train.begin(), split.train.end());
    seen.insert(split.test.begin(), split.test.end());
    CHECK(seen.size() == 100);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 99);
}

TEST_CASE("shuffled split is seeded and actually shuffles") {
    const auto a = shuffled_split(50, 0.5, 3);
    const auto b = shuffled_split(50, 0.5, 3);
    const auto c = shuffled_split(50, 0.5, 4);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.train != c.train);
    std::vector<int> sorted = a.train;
    std::sort(sorted.begin(), sorted.end());
    CHECK(a.train != sorted);  // astronomically unlikely to come out ordered
}

TEST_CASE("split keeps at least one sample on each side") {
    const auto lo = shuffled_split(10, 0.01, 1);
    CHECK(lo.train.size() == 1);
    CHECK(lo.test.size() == 9);
    const auto hi = shuffled_split(10, 0.999, 1);
    CHECK(hi.train.size() == 9);
    CHECK(hi.test.size() == 1);
    CHECK_THROWS_AS(shuffled_split(1, 0.8, 1), std::invalid_argument);
}

TEST_CASE("label rank counts strictly better and tied-lower entries") {
    Eigen::VectorXd s(4);
    s << 3.0, 1.0, 2.0, 0.5;
    CHECK(label_rank(s, 0) == 0);
    CHECK(label_rank(s, 2) == 1);
    CHECK(label_rank(s, 1) == 2);
    CHECK(label_rank(s, 3) == 3);

    Eigen::VectorXd tied(3);
    tied << 2.0, 2.0, 1.0;
    CHECK(label_rank(tied, 0) == 0);
    CHECK(label_rank(tied, 1) == 1);  // the equal score at index 0 ranks ahead
    CHECK(label_rank(tied, 2) == 2);
}

TEST_CASE("predict beam picks the largest logit with low-index ties") {
    MlpParams net;
    net.layer_sizes = {2, 3};
    net.weights = {Eigen::MatrixXd::Zero(3, 2)};
    net.biases = {Eigen::VectorXd::Zero(3)};
    net.biases[0] << 1.0, 5.0, 5.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    CHECK(predict_beam(net, x) == 1);
}

TEST_CASE("training overfits a small clean dataset") {
    const auto ds = clean_line_dataset(120, 8);
    std::vector<int> all(ds.size());
    std::iota(all.begin(), all.end(), 0);

    DnnConfig cfg;
    cfg.hidden_sizes = {64};
    cfg.learning_rate = 0.01;
    cfg.batch_size = 16;
    cfg.epochs = 300;
    cfg.seed = 5;

    std::vector<double> curve;
    const auto net = train_beam_predictor(ds, all, 8, cfg, &curve);
    REQUIRE(curve.size() == 300);
    CHECK(curve.back() < 0.2 * curve.front());

    const auto acc = evaluate_topk(net, ds, all);
    CHECK(acc.top1 >= 0.95);
    CHECK(acc.top1 <= acc.top2);
    CHECK(acc.top2 <= acc.top3);
    CHECK(acc.average() == doctest::Approx((acc.top1 + acc.top2 + acc.top3) / 3.0));
}

TEST_CASE("training is reproducible for a fixed seed") {
    const auto ds = clean_line_dataset(60, 4);
    std::vector<int> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    DnnConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.epochs = 5;
    cfg.batch_size = 8;

    const auto a = train_beam_predictor(ds, all, 4, cfg);
    const auto b = train_beam_predictor(ds, all, 4, cfg);
    for (int l = 0; l < a.num_layers(); ++l) CHECK(a.weights[l] == b.weights[l]);
}

TEST_CASE("topk evaluation on a degenerate index list") {
    const auto ds = clean_line_dataset(30, 4);
    const auto net = mlp_init({2, 8, 4}, 2);
    const std::vector<int> one{17};
    const auto acc = evaluate_topk(net, ds, one);
    for (double v : {acc.top1, acc.top2, acc.top3}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(evaluate_topk(net, ds, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("config validation") {
    DnnConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DnnConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DnnConfig{};
    cfg.train_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = DnnConfig{};
    cfg.epochs = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "beamsense/experiment.hpp"
#include "beamsense/lyapunov.hpp"

using namespace beamsense;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

struct Fixture {
    Dataset ds;
    MlpParams net;
    EnvConfig env_cfg;

    Fixture() {
        TrajectoryConfig t;
        t.num_slots = 200;
        t.jitter_std = 2.0;
        t.jitter_corr_slots = 5.0;
        t.seed = 19;
        ds = generate_dataset(t, ChannelConfig{}, make_dft_codebook(8, 8));
        net = mlp_init({2, 16, 8}, 20);
        env_cfg.alpha = 0.5;
        env_cfg.horizon = 20;
        env_cfg.seed = 21;
    }
};

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("policy names round trip") {
    for (auto kind : {PolicyKind::Dqn, PolicyKind::DqnNoAge, PolicyKind::Random, PolicyKind::Full})
        CHECK(parse_policy(policy_name(kind)) == kind);
    CHECK_THROWS_AS(parse_policy("greedy"), std::invalid_argument);
}

TEST_CASE("chronological cut and head") {
    CHECK(chronological_cut(10, 0.8) == 8);
    CHECK(chronological_cut(10, 0.05) == 1);   // clamped away from empty
    CHECK(chronological_cut(10, 0.999) == 9);  // clamped away from full
    CHECK_THROWS_AS(chronological_cut(1, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(chronological_cut(10, 1.0), std::invalid_argument);

    Fixture f;
    const Dataset head = chronological_head(f.ds, 0.8);
    REQUIRE(head.size() == 160);
    for (int i = 0; i < head.size(); ++i) CHECK(head.records[i].slot == f.ds.records[i].slot);
}

TEST_CASE("full sensing senses every slot with age one") {
    Fixture f;
    const auto out = evaluate_policy(PolicyKind::Full, f.ds, f.net, nullptr, f.env_cfg, 160, 35, 1);
    REQUIRE(out.trace.size() == 35);
    CHECK(out.report.sense_rate == 1.0);
    for (const auto& row : out.trace) {
        CHECK(row.sensed == 1);
        CHECK(row.age == 1);
    }
}

TEST_CASE("randomized sensing tracks the budget and is seeded") {
    Fixture f;
    const auto a = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 40, 7);
    const auto b = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 40, 7);
    const auto c = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 40, 8);
    CHECK(a.report.sense_rate == b.report.sense_rate);
    for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].sensed == b.trace[i].sensed);
    CHECK(a.report.sense_rate > 0.2);
    CHECK(a.report.sense_rate < 0.8);
    // a different seed should flip at least one decision over 40 slots
    bool same = true;
    for (size_t i = 0; i < a.trace.size(); ++i)
        if (a.trace[i].sensed != c.trace[i].sensed) same = false;
    CHECK_FALSE(same);
}

TEST_CASE("queue trace replays the queue recursion across episode windows") {
    Fixture f;
    const auto out = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 37, 5);
    double q = 0.0;
    for (const auto& row : out.trace) {
        q = queue_update(q, row.sensed, f.env_cfg.alpha);
        CHECK(row.queue == q);
    }
    CHECK(out.report.final_queue == q);
}

TEST_CASE("report statistics are consistent with the trace") {
    Fixture f;
    const auto out = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 40, 3);
    int senses = 0, hits = 0;
    double queue_sum = 0.0;
    for (const auto& row : out.trace) {
        senses += row.sensed;
        hits += row.top1_hit ? 1 : 0;
        queue_sum += row.queue;
    }
    CHECK(out.report.sense_rate == doctest::Approx(senses / 40.0));
    CHECK(out.report.top1 == doctest::Approx(hits / 40.0));
    CHECK(out.report.mean_queue == doctest::Approx(queue_sum / 40.0));
    CHECK(out.report.top1 <= out.report.top2);
    CHECK(out.report.top2 <= out.report.top3);
}

TEST_CASE("learned policies require an agent with a matching encoding") {
    Fixture f;
    CHECK_THROWS_AS(
        evaluate_policy(PolicyKind::Dqn, f.ds, f.net, nullptr, f.env_cfg, 160, 10, 1),
        std::invalid_argument);

    DqnConfig cfg;
    cfg.hidden_sizes = {8};
    cfg.batch_size = 4;
    cfg.replay_capacity = 16;
    DqnAgent agent = make_agent(3, cfg);  // wrong input width for an age-bearing state
    CHECK_THROWS_AS(
        evaluate_policy(PolicyKind::Dqn, f.ds, f.net, &agent, f.env_cfg, 160, 10, 1),
        std::invalid_argument);

    // the no-age policy drops one entry and accepts the same agent
    const auto out =
        evaluate_policy(PolicyKind::DqnNoAge, f.ds, f.net, &agent, f.env_cfg, 160, 10, 1);
    CHECK(out.trace.size() == 10);
}

TEST_CASE("evaluation region must hold one full episode") {
    Fixture f;
    CHECK_THROWS_AS(
        evaluate_policy(PolicyKind::Full, f.ds, f.net, nullptr, f.env_cfg, 190, 10, 1),
        std::invalid_argument);
}

TEST_CASE("csv writers emit the documented headers") {
    Fixture f;
    const auto out = evaluate_policy(PolicyKind::Random, f.ds, f.net, nullptr, f.env_cfg, 160, 25, 2);

    const auto trace_path = temp_path("beamsense_trace.csv");
    const auto report_path = temp_path("beamsense_report.csv");
    const auto queue_path = temp_path("beamsense_queue.csv");
    save_trace_csv(out.trace, trace_path);
    save_report_csv(out.report, report_path);
    save_queue_trace_csv(out.trace, queue_path);

    CHECK(first_line(slurp(trace_path)) == "t,x,Q,theta,loss,cost,top1_hit");
    CHECK(first_line(slurp(report_path)) == "top1,top2,top3,avg_accuracy,sense_rate,final_Q,mean_Q");
    CHECK(first_line(slurp(queue_path)) == "t,running_sense_rate,Q");

    std::istringstream trace_in(slurp(trace_path));
    std::string line;
    int rows = 0;
    while (std::getline(trace_in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 26);  // header plus one row per step

    std::remove(trace_path.c_str());
    std::remove(report_path.c_str());
    std::remove(queue_path.c_str());
}

TEST_CASE("queue trace running rate is cumulative") {
    Fixture f;
    const auto out = evaluate_policy(PolicyKind::Full, f.ds, f.net, nullptr, f.env_cfg, 160, 12, 2);
    const auto queue_path = temp_path("beamsense_queue_rate.csv");
    save_queue_trace_csv(out.trace, queue_path);
    std::istringstream in(slurp(queue_path));
    std::string line;
    std::getline(in, line);  // header
    int t = 0;
    while (std::getline(in, line)) {
        // full sensing keeps the running rate pinned at 1
        std::istringstream row(line);
        std::string t_field, rate_field;
        std::getline(row, t_field, ',');
        std::getline(row, rate_field, ',');
        CHECK(t_field == std::to_string(t));
        CHECK(rate_field == "1");
        ++t;
    }
    CHECK(t == 12);
    std::remove(queue_path.c_str());
}

TEST_CASE("sweep and history writers") {
    const auto sweep_path = temp_path("beamsense_sweep.csv");
    save_sweep_csv({{0.5, "dqn", 0.97, 0.49}, {0.5, "random", 0.95, 0.51}}, sweep_path);
    const auto text = slurp(sweep_path);
    CHECK(first_line(text) == "alpha,policy,avg_accuracy,sense_rate");
    CHECK(text.find("0.5,dqn,0.97,0.49") != std::string::npos);

    const auto hist_path = temp_path("beamsense_hist.csv");
    EpochStats ep;
    ep.mean_cost = 1.5;
    ep.sense_rate = 0.25;
    ep.mean_queue = 2.0;
    save_dqn_history_csv({ep}, hist_path);
    CHECK(first_line(slurp(hist_path)) == "epoch,mean_cost,sense_rate,mean_Q");

    const auto curve_path = temp_path("beamsense_curve.csv");
    save_loss_curve_csv({0.5, 0.25}, curve_path);
    CHECK(slurp(curve_path) == "epoch,mean_loss\n0,0.5\n1,0.25\n");

    std::remove(sweep_path.c_str());
    std::remove(hist_path.c_str());
    std::remove(curve_path.c_str());
}

TEST_CASE("non-finite parameter guard") {
    auto net = mlp_init({2, 4, 2}, 1);
    CHECK(all_finite(net));
    net.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(net));
}

}

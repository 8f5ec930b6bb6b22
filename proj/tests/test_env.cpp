#include <doctest.h>

#include <stdexcept>

#include "beamsense/env.hpp"
#include "beamsense/errors.hpp"
#include "beamsense/lyapunov.hpp"

using namespace beamsense;

namespace {

struct Fixture {
    Dataset ds;
    MlpParams net;

    Fixture() {
        TrajectoryConfig t;
        t.num_slots = 24;
        t.jitter_std = 2.0;
        t.jitter_corr_slots = 3.0;
        t.seed = 13;
        ds = generate_dataset(t, ChannelConfig{}, make_dft_codebook(4, 4));
        net = mlp_init({2, 8, 4}, 17);
    }

    EnvConfig cfg() const {
        EnvConfig c;
        c.alpha = 0.5;
        c.penalty_weight = 100.0;
        c.horizon = 6;
        c.persist_queue = false;
        return c;
    }
};

}  // namespace

TEST_SUITE("env") {

TEST_CASE("reset provides a free fresh sense of the start slot") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    const DqnState s = env.reset_at(3);
    CHECK(s.input == f.ds.records[3].features);
    CHECK(s.age == 1);
    CHECK(s.queue == 0.0);
    CHECK(env.current_slot() == 3);
    CHECK_FALSE(env.terminal());
}

TEST_CASE("skipping keeps the input and ages it") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    env.reset_at(0);
    const auto r1 = env.step(0);
    CHECK(r1.next.input == f.ds.records[0].features);
    CHECK(r1.next.age == 2);
    const auto r2 = env.step(0);
    CHECK(r2.next.input == f.ds.records[0].features);
    CHECK(r2.next.age == 3);
}

TEST_CASE("sensing refreshes the input from the scored slot") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    env.reset_at(0);
    env.step(0);
    const auto r = env.step(1);  // senses slot 1
    CHECK(r.next.input == f.ds.records[1].features);
    CHECK(r.next.age == 1);
    CHECK(r.sensed == 1);
}

TEST_CASE("queue and cost follow the drift-plus-penalty arithmetic") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    env.reset_at(2);
    double q = 0.0;
    for (int t = 0; t < 6; ++t) {
        const int action = t % 2;
        const double q_before = q;
        const auto r = env.step(action);
        CHECK(r.cost == dpp_cost(r.loss, action, q_before, 0.5, 100.0));
        q = queue_update(q_before, action, 0.5);
        CHECK(r.next.queue == q);
    }
}

TEST_CASE("prediction loss is scored against the current slot") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    env.reset_at(4);
    // stale step: logits still come from slot 4 features, label from slot 4
    const Eigen::VectorXd logits = mlp_forward_one(f.net, f.ds.records[4].features);
    const auto r0 = env.step(0);
    CHECK(r0.loss == cross_entropy_from_logits(logits, f.ds.records[4].label));
    // the next slot is scored with the same stale logits but its own label
    const auto r1 = env.step(0);
    CHECK(r1.loss == cross_entropy_from_logits(logits, f.ds.records[5].label));
    // sensing refreshes before scoring
    const Eigen::VectorXd fresh = mlp_forward_one(f.net, f.ds.records[6].features);
    const auto r2 = env.step(1);
    CHECK(r2.loss == cross_entropy_from_logits(fresh, f.ds.records[6].label));
}

TEST_CASE("episode terminates after the horizon and refuses further steps") {
    Fixture f;
    SensingEnv env(f.ds, f.net, f.cfg());
    env.reset_at(0);
    for (int t = 0; t < 5; ++t) CHECK_FALSE(env.step(1).terminal);
    CHECK(env.step(1).terminal);
    CHECK(env.terminal());
    CHECK_THROWS_AS(env.step(0), StateError);
}

TEST_CASE("state encoding is features, scaled queue, scaled age") {
    Fixture f;
    auto cfg = f.cfg();
    cfg.queue_norm = 10.0;
    cfg.age_norm = 20.0;
    SensingEnv env(f.ds, f.net, cfg);
    CHECK(env.encoded_dim() == 4);
    DqnState s;
    s.input = f.ds.records[7].features;
    s.queue = 2.5;
    s.age = 4;
    const Eigen::VectorXd v = env.encode(s);
    REQUIRE(v.size() == 4);
    CHECK(v(0) == s.input(0));
    CHECK(v(1) == s.input(1));
    CHECK(v(2) == 0.25);
    CHECK(v(3) == 0.2);
}

TEST_CASE("dropping the age entry shortens the encoding") {
    Fixture f;
    auto cfg = f.cfg();
    cfg.include_age = false;
    SensingEnv env(f.ds, f.net, cfg);
    CHECK(env.encoded_dim() == 3);
    DqnState s;
    s.input = f.ds.records[0].features;
    s.queue = 5.0;
    s.age = 9;
    const Eigen::VectorXd v = env.encode(s);
    REQUIRE(v.size() == 3);
    CHECK(v(2) == 0.5);
}

TEST_CASE("queue persists across episodes only when configured") {
    Fixture f;
    auto cfg = f.cfg();
    cfg.persist_queue = true;
    SensingEnv env(f.ds, f.net, cfg);
    env.reset_at(0);
    for (int t = 0; t < 6; ++t) env.step(1);
    const double carried = env.queue();
    CHECK(carried == 3.0);  // six senses at alpha 0.5
    CHECK(env.reset_at(0).queue == carried);

    cfg.persist_queue = false;
    SensingEnv fresh_env(f.ds, f.net, cfg);
    fresh_env.reset_at(0);
    for (int t = 0; t < 6; ++t) fresh_env.step(1);
    CHECK(fresh_env.reset_at(0).queue == 0.0);
}

TEST_CASE("random resets are seeded and stay in range") {
    Fixture f;
    SensingEnv a(f.ds, f.net, f.cfg());
    SensingEnv b(f.ds, f.net, f.cfg());
    for (int i = 0; i < 10; ++i) {
        a.reset();
        b.reset();
        CHECK(a.current_slot() == b.current_slot());
        CHECK(a.current_slot() >= 0);
        CHECK(a.current_slot() <= a.max_start_slot());
    }
}

TEST_CASE("construction and action validation") {
    Fixture f;
    auto cfg = f.cfg();
    cfg.horizon = 1000;  // longer than the dataset
    CHECK_THROWS_AS(SensingEnv(f.ds, f.net, cfg), std::invalid_argument);

    SensingEnv env(f.ds, f.net, f.cfg());
    CHECK_THROWS_AS(env.reset_at(-1), std::invalid_argument);
    CHECK_THROWS_AS(env.reset_at(f.ds.size()), std::invalid_argument);
    env.reset_at(0);
    CHECK_THROWS_AS(env.step(2), std::invalid_argument);
    CHECK_THROWS_AS(env.set_queue(-1.0), std::invalid_argument);

    const auto wrong_net = mlp_init({3, 4, 4}, 1);
    CHECK_THROWS_AS(SensingEnv(f.ds, wrong_net, f.cfg()), std::invalid_argument);
}

}

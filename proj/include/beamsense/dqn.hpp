#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "beamsense/env.hpp"
#include "beamsense/mlp.hpp"

namespace beamsense {

struct DqnConfig {
    std::vector<int> hidden_sizes{128, 128};
    double gamma = 0.99999;
    double learning_rate = 0.001;
    int batch_size = 64;
    int replay_capacity = 50000;
    int epochs = 300;
    int steps_per_epoch = 400;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    // Epsilon ramps linearly over this fraction of the planned steps, then
    // stays at epsilon_end.
    double anneal_fraction = 0.5;
    int target_sync_interval = 1000;  // 0 keeps the target frozen at init
    // Episodes end by truncation, not task completion, so by default the TD
    // target still bootstraps at the horizon. True switches to y = C there.
    bool terminal_at_horizon = false;
    std::uint64_t seed = 1;

    void validate() const;
    std::int64_t planned_steps() const {
        return static_cast<std::int64_t>(epochs) * steps_per_epoch;
    }
};

struct Transition {
    Eigen::VectorXd state;
    int action = 0;
    double cost = 0.0;
    Eigen::VectorXd next_state;
    bool terminal = false;
};

// Fixed-capacity ring; the oldest transition is overwritten first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity);

    void push(Transition t);
    int size() const { return static_cast<int>(data_.size()); }
    int capacity() const { return capacity_; }
    // i = 0 addresses the oldest stored transition.
    const Transition& oldest_first(int i) const;
    const Transition& storage(int i) const { return data_[i]; }
    int cursor() const { return cursor_; }

    // Uniform sample with replacement; returns storage indices.
    std::vector<int> sample_indices(int batch, std::mt19937_64& rng) const;

    // Rebuilds a buffer with exact storage layout and write cursor, as
    // recorded in a checkpoint.
    static ReplayBuffer restore(int capacity, int cursor, std::vector<Transition> data);

private:
    std::vector<Transition> data_;
    int capacity_;
    int cursor_ = 0;
};

struct DqnAgent {
    DqnConfig config;
    MlpParams online;
    MlpParams target;
    AdamState adam;
    ReplayBuffer replay;
    std::mt19937_64 rng;
    std::int64_t global_step = 0;

    double epsilon() const;
    int greedy_action(const Eigen::VectorXd& encoded_state) const;
};

// Builds the online value network [state_dim, hidden..., 2] and a target
// initialized as an exact copy. The two outputs estimate the discounted
// cost of acting 0 (skip) or 1 (sense).
DqnAgent make_agent(int state_dim, const DqnConfig& cfg);

double epsilon_for_step(const DqnConfig& cfg, std::int64_t step);

// With probability epsilon a uniform action, otherwise the cheaper of the
// two predicted costs; exact ties pick action 0.
int epsilon_greedy(const MlpParams& qnet, const Eigen::VectorXd& encoded_state, double epsilon,
                   std::mt19937_64& rng);

// TD targets y_i = C_i + gamma * min_a Qt(S'_i, a), or y_i = C_i when the
// transition is terminal and terminal_at_horizon is set.
Eigen::VectorXd td_targets(const MlpParams& target_net, const std::vector<const Transition*>& batch,
                           double gamma, bool terminal_at_horizon);

// One Adam step on the mean squared TD error of the batch; gradients flow
// only through the taken action's output. Returns the mean TD loss.
double q_update(DqnAgent& agent, const std::vector<const Transition*>& batch);

// Hard-copies online into target when step is a multiple of interval.
void target_sync(const MlpParams& online, MlpParams& target, std::int64_t step, int interval);

struct EpochStats {
    double mean_cost = 0.0;
    double sense_rate = 0.0;
    double mean_queue = 0.0;
    double mean_td_loss = 0.0;
    double epsilon = 0.0;
};

// Runs the full interaction loop (act, step, store, sample, update) for
// cfg.epochs episodes of cfg.steps_per_epoch slots each. Episode starts come
// from the environment's own seeded RNG, so exploration noise and data
// order stay decoupled.
std::vector<EpochStats> train_dqn(DqnAgent& agent, SensingEnv& env);

// Full-state checkpoint (networks, optimizer, replay, RNG, step counter) so
// training resumes bit-exactly.
void save_agent_json(const DqnAgent& agent, const std::string& path);
DqnAgent load_agent_json(const std::string& path);

}  // namespace beamsense

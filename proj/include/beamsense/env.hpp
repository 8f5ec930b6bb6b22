#pragma once

#include <cstdint>
#include <random>

#include "beamsense/dataset.hpp"
#include "beamsense/mlp.hpp"

namespace beamsense {

struct EnvConfig {
    double alpha = 0.5;            // average sensing budget
    double penalty_weight = 100.0; // accuracy/constraint tradeoff weight
    int horizon = 400;             // slots per episode
    bool include_age = true;       // false drops the age entry from the state
    double queue_norm = 10.0;
    double age_norm = 20.0;
    bool persist_queue = true;     // carry the queue across episode resets
    std::uint64_t seed = 1;

    void validate() const;
};

// Agent-visible state: the most recent features fed to the beam predictor,
// the virtual queue, and the age (in slots) of those features.
struct DqnState {
    Eigen::VectorXd input;
    double queue = 0.0;
    int age = 1;
};

struct StepResult {
    DqnState next;
    double cost = 0.0;      // drift-plus-penalty slot cost
    double loss = 0.0;      // cross-entropy of the predictor on this slot
    int rank = 0;           // rank of the true beam among predicted scores
    bool top1_hit = false;
    int sensed = 0;
    bool terminal = false;
};

// Replays a recorded trajectory slot by slot. Each step the agent either
// senses (refreshing the predictor input from the current slot) or reuses
// the stale input; either way the slot's beam prediction is scored against
// the true label and charged via the drift-plus-penalty cost.
class SensingEnv {
public:
    SensingEnv(const Dataset& dataset, const MlpParams& predictor, EnvConfig cfg);

    // Starts an episode at a seeded random offset; the first input is a free
    // sense of the start slot (not charged to the queue).
    DqnState reset();
    // Deterministic variant used by evaluation rollouts.
    DqnState reset_at(int start_slot);

    StepResult step(int action);

    Eigen::VectorXd encode(const DqnState& s) const;
    int encoded_dim() const;

    const DqnState& state() const { return state_; }
    bool terminal() const { return terminal_; }
    int current_slot() const { return slot_; }
    double queue() const;
    void set_queue(double q);
    const EnvConfig& config() const { return cfg_; }
    int max_start_slot() const;

private:
    const Dataset* dataset_;
    const MlpParams* predictor_;
    EnvConfig cfg_;
    std::mt19937_64 rng_;
    DqnState state_;
    Eigen::VectorXd cached_logits_;  // predictor output for state_.input
    int slot_ = 0;                   // absolute dataset index of the next slot to score
    int steps_done_ = 0;
    bool terminal_ = true;
    double carried_queue_ = 0.0;
};

}  // namespace beamsense

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamsense/dataset.hpp"
#include "beamsense/dqn.hpp"
#include "beamsense/env.hpp"
#include "beamsense/mlp.hpp"

namespace beamsense {

enum class PolicyKind {
    Dqn,       // greedy learned policy, age in the state
    DqnNoAge,  // greedy learned policy trained without the age entry
    Random,    // senses i.i.d. with probability alpha
    Full,      // senses every slot
};

std::string policy_name(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

struct TraceRow {
    int t = 0;     // step counter within the evaluation run
    int slot = 0;  // absolute dataset slot (not written to CSV)
    int sensed = 0;
    double queue = 0.0;  // queue after the step
    int age = 0;         // age after the step
    double loss = 0.0;
    double cost = 0.0;
    bool top1_hit = false;
};

struct EvalReport {
    double top1 = 0.0;
    double top2 = 0.0;
    double top3 = 0.0;
    double sense_rate = 0.0;
    double final_queue = 0.0;
    double mean_queue = 0.0;

    double average() const { return (top1 + top2 + top3) / 3.0; }
};

struct EvalOutput {
    EvalReport report;
    std::vector<TraceRow> trace;
};

// Index where the chronological training region ends (first eval slot).
int chronological_cut(int n, double fraction);

// Copy of the first records, used as the policy-training stream so that
// evaluation can run on the untouched chronological tail.
Dataset chronological_head(const Dataset& ds, double fraction);

// Rolls a frozen policy for eval_horizon slots over episode windows tiling
// [eval_start, end) cyclically; the virtual queue persists across windows.
// `agent` is required for the two learned policies, ignored otherwise.
// policy_seed only feeds the randomized baseline.
EvalOutput evaluate_policy(PolicyKind kind, const Dataset& ds, const MlpParams& predictor,
                           const DqnAgent* agent, EnvConfig env_cfg, int eval_start,
                           int eval_horizon, std::uint64_t policy_seed);

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);
void save_report_csv(const EvalReport& report, const std::string& path);
// Running sensing frequency and queue per step, for constraint plots.
void save_queue_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);
void save_loss_curve_csv(const std::vector<double>& epoch_mean_loss, const std::string& path);
void save_dqn_history_csv(const std::vector<EpochStats>& history, const std::string& path);

struct SweepRow {
    double alpha = 0.0;
    std::string policy;
    double avg_accuracy = 0.0;
    double sense_rate = 0.0;
};
void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Guards against silently persisting a diverged model.
bool all_finite(const MlpParams& params);

}  // namespace beamsense

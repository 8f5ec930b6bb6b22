#include "beamsense/experiment.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "beamsense/common.hpp"
#include "beamsense/errors.hpp"

namespace beamsense {

std::string policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Dqn: return "dqn";
        case PolicyKind::DqnNoAge: return "dqn_no_age";
        case PolicyKind::Random: return "random";
        case PolicyKind::Full: return "full";
    }
    throw std::invalid_argument("policy_name: unknown policy");
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "dqn") return PolicyKind::Dqn;
    if (name == "dqn_no_age") return PolicyKind::DqnNoAge;
    if (name == "random") return PolicyKind::Random;
    if (name == "full") return PolicyKind::Full;
    throw std::invalid_argument("unknown policy '" + name +
                                "' (expected dqn, dqn_no_age, random, or full)");
}

int chronological_cut(int n, double fraction) {
    if (n < 2)
        throw std::invalid_argument("chronological_cut: need at least two slots");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("chronological_cut: fraction must lie in (0, 1)");
    int cut = static_cast<int>(fraction * n);
    return std::clamp(cut, 1, n - 1);
}

Dataset chronological_head(const Dataset& ds, double fraction) {
    const int cut = chronological_cut(ds.size(), fraction);
    Dataset head;
    head.records.assign(ds.records.begin(), ds.records.begin() + cut);
    return head;
}

EvalOutput evaluate_policy(PolicyKind kind, const Dataset& ds, const MlpParams& predictor,
                           const DqnAgent* agent, EnvConfig env_cfg, int eval_start,
                           int eval_horizon, std::uint64_t policy_seed) {
    if (eval_horizon < 1)
        throw std::invalid_argument("evaluate_policy: horizon must be >= 1");
    if (eval_start < 0 || eval_start >= ds.size())
        throw std::invalid_argument("evaluate_policy: eval start out of range");

    const bool learned = kind == PolicyKind::Dqn || kind == PolicyKind::DqnNoAge;
    if (learned && agent == nullptr)
        throw std::invalid_argument("evaluate_policy: learned policy needs an agent");
    env_cfg.include_age = kind == PolicyKind::DqnNoAge ? false : env_cfg.include_age;
    env_cfg.persist_queue = true;

    SensingEnv env(ds, predictor, env_cfg);
    if (learned && agent->online.input_size() != env.encoded_dim())
        throw std::invalid_argument("evaluate_policy: agent input size does not match state encoding");

    const int H = env_cfg.horizon;
    const int span = ds.size() - eval_start;
    if (span < H)
        throw std::invalid_argument("evaluate_policy: evaluation region shorter than one episode");
    const int windows = span / H;

    std::mt19937_64 rng(mix_seed(policy_seed, 0x6576616c));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    EvalOutput out;
    out.trace.reserve(eval_horizon);
    int hit1 = 0, hit2 = 0, hit3 = 0, senses = 0;
    double queue_sum = 0.0;

    int t = 0;
    for (int episode = 0; t < eval_horizon; ++episode) {
        const int start = eval_start + (episode % windows) * H;
        env.reset_at(start);
        while (!env.terminal() && t < eval_horizon) {
            int action = 0;
            switch (kind) {
                case PolicyKind::Dqn:
                case PolicyKind::DqnNoAge:
                    action = agent->greedy_action(env.encode(env.state()));
                    break;
                case PolicyKind::Random:
                    action = uni(rng) < env_cfg.alpha ? 1 : 0;
                    break;
                case PolicyKind::Full:
                    action = 1;
                    break;
            }
            const int slot = env.current_slot();
            const StepResult res = env.step(action);

            TraceRow row;
            row.t = t;
            row.slot = slot;
            row.sensed = action;
            row.queue = res.next.queue;
            row.age = res.next.age;
            row.loss = res.loss;
            row.cost = res.cost;
            row.top1_hit = res.top1_hit;
            out.trace.push_back(row);

            if (res.rank < 1) ++hit1;
            if (res.rank < 2) ++hit2;
            if (res.rank < 3) ++hit3;
            senses += action;
            queue_sum += res.next.queue;
            ++t;
        }
    }

    const double n = static_cast<double>(eval_horizon);
    out.report.top1 = hit1 / n;
    out.report.top2 = hit2 / n;
    out.report.top3 = hit3 / n;
    out.report.sense_rate = senses / n;
    out.report.final_queue = out.trace.back().queue;
    out.report.mean_queue = queue_sum / n;
    return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
    if (!out)
        throw IoError("write failed: " + path);
}

}  // namespace

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    auto out = open_out(path);
    out << "t,x,Q,theta,loss,cost,top1_hit\n";
    for (const auto& r : trace) {
        out << r.t << ',' << r.sensed << ',' << format_double(r.queue) << ',' << r.age << ','
            << format_double(r.loss) << ',' << format_double(r.cost) << ',' << (r.top1_hit ? 1 : 0)
            << '\n';
    }
    finish_out(out, path);
}

void save_report_csv(const EvalReport& report, const std::string& path) {
    auto out = open_out(path);
    out << "top1,top2,top3,avg_accuracy,sense_rate,final_Q,mean_Q\n";
    out << format_double(report.top1) << ',' << format_double(report.top2) << ','
        << format_double(report.top3) << ',' << format_double(report.average()) << ','
        << format_double(report.sense_rate) << ',' << format_double(report.final_queue) << ','
        << format_double(report.mean_queue) << '\n';
    finish_out(out, path);
}

void save_queue_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    auto out = open_out(path);
    out << "t,running_sense_rate,Q\n";
    long long senses = 0;
    for (const auto& r : trace) {
        senses += r.sensed;
        out << r.t << ',' << format_double(static_cast<double>(senses) / (r.t + 1)) << ','
            << format_double(r.queue) << '\n';
    }
    finish_out(out, path);
}

void save_loss_curve_csv(const std::vector<double>& epoch_mean_loss, const std::string& path) {
    auto out = open_out(path);
    out << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < epoch_mean_loss.size(); ++e)
        out << e << ',' << format_double(epoch_mean_loss[e]) << '\n';
    finish_out(out, path);
}

void save_dqn_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    auto out = open_out(path);
    out << "epoch,mean_cost,sense_rate,mean_Q\n";
    for (std::size_t e = 0; e < history.size(); ++e)
        out << e << ',' << format_double(history[e].mean_cost) << ','
            << format_double(history[e].sense_rate) << ',' << format_double(history[e].mean_queue)
            << '\n';
    finish_out(out, path);
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "alpha,policy,avg_accuracy,sense_rate\n";
    for (const auto& r : rows)
        out << format_double(r.alpha) << ',' << r.policy << ',' << format_double(r.avg_accuracy)
            << ',' << format_double(r.sense_rate) << '\n';
    finish_out(out, path);
}

bool all_finite(const MlpParams& params) {
    for (const auto& w : params.weights)
        if (!w.allFinite()) return false;
    for (const auto& b : params.biases)
        if (!b.allFinite()) return false;
    return true;
}

}  // namespace beamsense

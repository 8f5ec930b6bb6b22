#include <charconv>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "beamsense/beam_predictor.hpp"
#include "beamsense/codebook.hpp"
#include "beamsense/common.hpp"
#include "beamsense/config.hpp"
#include "beamsense/dataset.hpp"
#include "beamsense/dqn.hpp"
#include "beamsense/env.hpp"
#include "beamsense/errors.hpp"
#include "beamsense/experiment.hpp"
#include "beamsense/mlp.hpp"

namespace bs = beamsense;
namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw bs::IoError("cannot create output directory '" + dir + "': " + ec.message());
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item =
            comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
        double v = 0.0;
        const char* first = item.data();
        const char* last = first + item.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw bs::ConfigError(flag + ": bad number '" + item + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty())
        throw bs::ConfigError(flag + ": empty list");
    return out;
}

std::string agent_tag(double alpha, double penalty_weight, bool include_age) {
    std::string tag = "a" + bs::format_double(alpha) + "_V" + bs::format_double(penalty_weight);
    if (!include_age) tag += "_noage";
    return tag;
}

bs::Dataset load_dataset(const bs::ExperimentConfig& cfg) {
    return bs::load_dataset_csv(cfg.out_dir + "/dataset.csv", cfg.num_beams);
}

bs::MlpParams load_predictor(const bs::ExperimentConfig& cfg) {
    return bs::load_mlp_json(cfg.out_dir + "/dnn.json");
}

std::uint64_t eval_policy_seed(const bs::ExperimentConfig& cfg) {
    return bs::mix_seed(cfg.seed, 0x65766170);
}

void run_generate(const bs::ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    const bs::BeamCodebook cb = bs::make_dft_codebook(cfg.num_antennas, cfg.num_beams);
    const bs::Dataset ds = bs::generate_dataset(cfg.trajectory, cfg.channel, cb);
    bs::save_dataset_csv(ds, cfg.out_dir + "/dataset.csv");
    bs::save_gains_csv(ds, cfg.out_dir + "/dataset_gains.csv");
    std::cout << "wrote " << cfg.out_dir << "/dataset.csv (" << ds.size() << " slots, "
              << cfg.num_beams << " beams) and dataset_gains.csv\n";
}

void run_train_dnn(const bs::ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    const bs::Dataset ds = load_dataset(cfg);
    const bs::SplitIndices split =
        bs::shuffled_split(ds.size(), cfg.dnn.train_fraction, bs::mix_seed(cfg.dnn.seed, 0x73706c));

    std::vector<double> curve;
    const bs::MlpParams net =
        bs::train_beam_predictor(ds, split.train, cfg.num_beams, cfg.dnn, &curve);
    if (!bs::all_finite(net))
        throw bs::NumericalError("beam predictor diverged (non-finite parameters)");

    bs::save_mlp_json(net, cfg.out_dir + "/dnn.json");
    bs::save_loss_curve_csv(curve, cfg.out_dir + "/dnn_loss.csv");

    const bs::TopkAccuracy acc = bs::evaluate_topk(net, ds, split.test);
    std::cout << "trained predictor: test top1=" << bs::format_double(acc.top1)
              << " top2=" << bs::format_double(acc.top2) << " top3=" << bs::format_double(acc.top3)
              << " avg=" << bs::format_double(acc.average()) << "\n";
    std::cout << "wrote " << cfg.out_dir << "/dnn.json and dnn_loss.csv\n";
}

// Trains the sensing agent for the config's (alpha, V, include_age) on the
// chronological head of the dataset; writes checkpoint and diagnostics.
bs::DqnAgent train_agent(const bs::ExperimentConfig& cfg, const bs::Dataset& ds,
                         const bs::MlpParams& predictor, bool verbose) {
    const bs::Dataset head = bs::chronological_head(ds, cfg.policy_train_fraction);
    bs::SensingEnv env(head, predictor, cfg.env);
    bs::DqnAgent agent = bs::make_agent(env.encoded_dim(), cfg.dqn);
    const std::vector<bs::EpochStats> history = bs::train_dqn(agent, env);
    if (!bs::all_finite(agent.online) || !bs::all_finite(agent.target))
        throw bs::NumericalError("sensing agent diverged (non-finite parameters)");

    const std::string tag = agent_tag(cfg.env.alpha, cfg.env.penalty_weight, cfg.env.include_age);
    bs::save_agent_json(agent, cfg.out_dir + "/dqn_" + tag + ".json");
    bs::save_dqn_history_csv(history, cfg.out_dir + "/dqn_train_" + tag + ".csv");
    if (verbose) {
        const bs::EpochStats& last = history.back();
        std::cout << "trained agent " << tag
                  << ": final epoch mean_cost=" << bs::format_double(last.mean_cost)
                  << " sense_rate=" << bs::format_double(last.sense_rate)
                  << " mean_Q=" << bs::format_double(last.mean_queue) << "\n";
        std::cout << "wrote " << cfg.out_dir << "/dqn_" << tag << ".json and dqn_train_" << tag
                  << ".csv\n";
    }
    return agent;
}

bs::DqnAgent load_or_train_agent(const bs::ExperimentConfig& cfg, const bs::Dataset& ds,
                                 const bs::MlpParams& predictor) {
    const std::string tag = agent_tag(cfg.env.alpha, cfg.env.penalty_weight, cfg.env.include_age);
    const std::string path = cfg.out_dir + "/dqn_" + tag + ".json";
    if (fs::exists(path)) return bs::load_agent_json(path);
    return train_agent(cfg, ds, predictor, false);
}

void print_report(const std::string& name, const bs::EvalReport& r) {
    std::cout << name << ": top1=" << bs::format_double(r.top1)
              << " top2=" << bs::format_double(r.top2) << " top3=" << bs::format_double(r.top3)
              << " avg=" << bs::format_double(r.average())
              << " sense_rate=" << bs::format_double(r.sense_rate)
              << " mean_Q=" << bs::format_double(r.mean_queue) << "\n";
}

void run_train_dqn(const bs::ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    const bs::Dataset ds = load_dataset(cfg);
    const bs::MlpParams predictor = load_predictor(cfg);
    train_agent(cfg, ds, predictor, true);
}

void run_evaluate(const bs::ExperimentConfig& cfg, const std::string& policy) {
    ensure_out_dir(cfg.out_dir);
    const bs::PolicyKind kind = bs::parse_policy(policy);
    const bs::Dataset ds = load_dataset(cfg);
    const bs::MlpParams predictor = load_predictor(cfg);

    bs::DqnAgent agent = bs::make_agent(1, bs::DqnConfig{});  // placeholder, replaced below
    const bs::DqnAgent* agent_ptr = nullptr;
    if (kind == bs::PolicyKind::Dqn || kind == bs::PolicyKind::DqnNoAge) {
        const bool with_age = kind == bs::PolicyKind::Dqn;
        const std::string path =
            cfg.out_dir + "/dqn_" + agent_tag(cfg.env.alpha, cfg.env.penalty_weight, with_age) +
            ".json";
        if (!fs::exists(path))
            throw bs::IoError("missing agent checkpoint: " + path);
        agent = bs::load_agent_json(path);
        agent_ptr = &agent;
    }

    const int cut = bs::chronological_cut(ds.size(), cfg.policy_train_fraction);
    const bs::EvalOutput out = bs::evaluate_policy(kind, ds, predictor, agent_ptr, cfg.env, cut,
                                                   cfg.eval_horizon, eval_policy_seed(cfg));
    bs::save_report_csv(out.report, cfg.out_dir + "/eval_" + policy + "_report.csv");
    bs::save_trace_csv(out.trace, cfg.out_dir + "/eval_" + policy + "_trace.csv");
    print_report(policy, out.report);
    std::cout << "wrote " << cfg.out_dir << "/eval_" << policy << "_report.csv and eval_" << policy
              << "_trace.csv\n";
}

void run_sweep_alpha(bs::ExperimentConfig cfg, const std::string& alphas_text,
                     const std::string& policies_text) {
    ensure_out_dir(cfg.out_dir);
    const std::vector<double> alphas = parse_double_list(alphas_text, "--alphas");
    std::vector<bs::PolicyKind> kinds;
    {
        std::size_t start = 0;
        while (start <= policies_text.size()) {
            const std::size_t comma = policies_text.find(',', start);
            const std::string item = comma == std::string::npos
                                         ? policies_text.substr(start)
                                         : policies_text.substr(start, comma - start);
            kinds.push_back(bs::parse_policy(item));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }

    const bs::Dataset ds = load_dataset(cfg);
    const bs::MlpParams predictor = load_predictor(cfg);
    const int cut = bs::chronological_cut(ds.size(), cfg.policy_train_fraction);

    std::vector<bs::SweepRow> rows;
    for (double alpha : alphas) {
        cfg.env.alpha = alpha;
        for (bs::PolicyKind kind : kinds) {
            bs::ExperimentConfig run_cfg = cfg;
            run_cfg.env.include_age = kind != bs::PolicyKind::DqnNoAge;
            bs::DqnAgent agent = bs::make_agent(1, bs::DqnConfig{});
            const bs::DqnAgent* agent_ptr = nullptr;
            if (kind == bs::PolicyKind::Dqn || kind == bs::PolicyKind::DqnNoAge) {
                agent = load_or_train_agent(run_cfg, ds, predictor);
                agent_ptr = &agent;
            }
            const bs::EvalOutput out =
                bs::evaluate_policy(kind, ds, predictor, agent_ptr, run_cfg.env, cut,
                                    cfg.eval_horizon, eval_policy_seed(cfg));
            rows.push_back({alpha, bs::policy_name(kind), out.report.average(),
                            out.report.sense_rate});
            std::cout << "alpha=" << bs::format_double(alpha) << " " << bs::policy_name(kind)
                      << ": avg=" << bs::format_double(out.report.average())
                      << " sense_rate=" << bs::format_double(out.report.sense_rate) << "\n";
        }
    }
    bs::save_sweep_csv(rows, cfg.out_dir + "/sweep_alpha.csv");
    std::cout << "wrote " << cfg.out_dir << "/sweep_alpha.csv\n";
}

void run_queue_trace(bs::ExperimentConfig cfg, const std::string& alphas_text,
                     const std::string& weights_text) {
    ensure_out_dir(cfg.out_dir);
    const std::vector<double> alphas = parse_double_list(alphas_text, "--alphas");
    const std::vector<double> weights = parse_double_list(weights_text, "--penalty-weights");

    const bs::Dataset ds = load_dataset(cfg);
    const bs::MlpParams predictor = load_predictor(cfg);
    const int cut = bs::chronological_cut(ds.size(), cfg.policy_train_fraction);

    for (double v : weights) {
        for (double alpha : alphas) {
            cfg.env.alpha = alpha;
            cfg.env.penalty_weight = v;
            cfg.env.include_age = true;
            const bs::DqnAgent agent = load_or_train_agent(cfg, ds, predictor);
            const bs::EvalOutput out =
                bs::evaluate_policy(bs::PolicyKind::Dqn, ds, predictor, &agent, cfg.env, cut,
                                    cfg.eval_horizon, eval_policy_seed(cfg));
            const std::string path = cfg.out_dir + "/queue_trace_V" + bs::format_double(v) +
                                     "_alpha" + bs::format_double(alpha) + ".csv";
            bs::save_queue_trace_csv(out.trace, path);
            std::cout << "V=" << bs::format_double(v) << " alpha=" << bs::format_double(alpha)
                      << ": final running_sense_rate="
                      << bs::format_double(out.report.sense_rate)
                      << " final_Q=" << bs::format_double(out.report.final_queue) << " -> " << path
                      << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    bs::ExperimentConfig cfg;
    const std::vector<bs::ConfigBinding> bindings = bs::config_bindings(cfg);

    CLI::App app{"Joint sensing and beam selection experiments"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Config file (INI-style key = value)");

    struct FlagSlot {
        const bs::ConfigBinding* binding;
        std::string value;
        CLI::Option* opt;
    };
    std::deque<FlagSlot> slots;
    for (const auto& b : bindings) {
        slots.push_back({&b, "", nullptr});
        std::string name = "--" + b.key;
        if (b.key == "out_dir") name += ",--out";
        slots.back().opt = app.add_option(name, slots.back().value);
    }

    auto* gen = app.add_subcommand("generate", "Generate the synthetic trajectory dataset");
    auto* tdnn = app.add_subcommand("train-dnn", "Train the beam-prediction network");
    auto* tdqn = app.add_subcommand("train-dqn", "Train the sensing agent");
    auto* eval = app.add_subcommand("evaluate", "Evaluate a sensing policy on the held-out tail");
    auto* sweep = app.add_subcommand("sweep-alpha", "Accuracy vs sensing budget sweep");
    auto* qtrace = app.add_subcommand("queue-trace", "Constraint-convergence traces per (V, alpha)");
    for (auto* sub : {gen, tdnn, tdqn, eval, sweep, qtrace}) sub->fallthrough();

    std::string policy = "dqn";
    eval->add_option("--policy", policy, "dqn | dqn_no_age | random | full");

    std::string alphas = "0.2,0.4,0.6,0.8,1.0";
    std::string policies = "dqn,random,full";
    sweep->add_option("--alphas", alphas, "Comma-separated sensing budgets");
    sweep->add_option("--policies", policies, "Comma-separated policy list");

    std::string trace_alphas = "0.3,0.5,0.8";
    std::string trace_weights = "100";
    qtrace->add_option("--alphas", trace_alphas, "Comma-separated sensing budgets");
    qtrace->add_option("--penalty-weights", trace_weights, "Comma-separated tradeoff weights");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (!config_path.empty()) bs::load_config_file(cfg, config_path);
        for (const auto& slot : slots)
            if (slot.opt->count() > 0) bs::apply_config_value(*slot.binding, slot.value);
        cfg.derive_seeds();
        cfg.validate();

        if (app.got_subcommand(gen)) run_generate(cfg);
        if (app.got_subcommand(tdnn)) run_train_dnn(cfg);
        if (app.got_subcommand(tdqn)) run_train_dqn(cfg);
        if (app.got_subcommand(eval)) run_evaluate(cfg, policy);
        if (app.got_subcommand(sweep)) run_sweep_alpha(cfg, alphas, policies);
        if (app.got_subcommand(qtrace)) run_queue_trace(cfg, trace_alphas, trace_weights);
        return 0;
    } catch (const bs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const bs::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const bs::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const bs::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#include "beamsense/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "beamsense/common.hpp"
#include "beamsense/errors.hpp"

namespace beamsense {

void ExperimentConfig::validate() const {
    try {
        trajectory.validate();
        channel.validate();
        dnn.validate();
        dqn.validate();
        env.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (num_antennas < 1)
        throw ConfigError("codebook: num_antennas must be >= 1");
    if (num_beams < 2)
        throw ConfigError("codebook: num_beams must be >= 2");
    if (eval_horizon < 1)
        throw ConfigError("eval: horizon must be >= 1");
    if (!(policy_train_fraction > 0.0 && policy_train_fraction < 1.0))
        throw ConfigError("eval: train_fraction must lie in (0, 1)");
    if (env.horizon > trajectory.num_slots)
        throw ConfigError("env: episode horizon exceeds the dataset length");
}

void ExperimentConfig::derive_seeds() {
    trajectory.seed = mix_seed(seed, 0x7472616a);
    dnn.seed = mix_seed(seed, 0x646e6e);
    dqn.seed = mix_seed(seed, 0x64716e);
    env.seed = mix_seed(seed, 0x73656e73);
}

std::vector<ConfigBinding> config_bindings(ExperimentConfig& cfg) {
    using K = ConfigBinding::Kind;
    return {
        {"seed", K::Uint64, &cfg.seed},
        {"out_dir", K::String, &cfg.out_dir},
        {"eval.horizon", K::Int, &cfg.eval_horizon},
        {"eval.train_fraction", K::Double, &cfg.policy_train_fraction},

        {"trajectory.start_x", K::Double, &cfg.trajectory.start.x},
        {"trajectory.start_y", K::Double, &cfg.trajectory.start.y},
        {"trajectory.end_x", K::Double, &cfg.trajectory.end.x},
        {"trajectory.end_y", K::Double, &cfg.trajectory.end.y},
        {"trajectory.num_slots", K::Int, &cfg.trajectory.num_slots},
        {"trajectory.jitter_std", K::Double, &cfg.trajectory.jitter_std},
        {"trajectory.jitter_corr_slots", K::Double, &cfg.trajectory.jitter_corr_slots},

        {"channel.bs_x", K::Double, &cfg.channel.bs_position.x},
        {"channel.bs_y", K::Double, &cfg.channel.bs_position.y},
        {"channel.path_gain_ref", K::Double, &cfg.channel.path_gain_ref},
        {"channel.path_loss_exponent", K::Double, &cfg.channel.path_loss_exponent},
        {"channel.transmit_power", K::Double, &cfg.channel.transmit_power},
        {"channel.noise_variance", K::Double, &cfg.channel.noise_variance},

        {"codebook.num_antennas", K::Int, &cfg.num_antennas},
        {"codebook.num_beams", K::Int, &cfg.num_beams},

        {"dnn.hidden", K::IntList, &cfg.dnn.hidden_sizes},
        {"dnn.learning_rate", K::Double, &cfg.dnn.learning_rate},
        {"dnn.batch_size", K::Int, &cfg.dnn.batch_size},
        {"dnn.epochs", K::Int, &cfg.dnn.epochs},
        {"dnn.train_fraction", K::Double, &cfg.dnn.train_fraction},

        {"dqn.hidden", K::IntList, &cfg.dqn.hidden_sizes},
        {"dqn.gamma", K::Double, &cfg.dqn.gamma},
        {"dqn.learning_rate", K::Double, &cfg.dqn.learning_rate},
        {"dqn.batch_size", K::Int, &cfg.dqn.batch_size},
        {"dqn.replay_capacity", K::Int, &cfg.dqn.replay_capacity},
        {"dqn.epochs", K::Int, &cfg.dqn.epochs},
        {"dqn.steps_per_epoch", K::Int, &cfg.dqn.steps_per_epoch},
        {"dqn.epsilon_start", K::Double, &cfg.dqn.epsilon_start},
        {"dqn.epsilon_end", K::Double, &cfg.dqn.epsilon_end},
        {"dqn.anneal_fraction", K::Double, &cfg.dqn.anneal_fraction},
        {"dqn.target_sync_interval", K::Int, &cfg.dqn.target_sync_interval},
        {"dqn.terminal_at_horizon", K::Bool, &cfg.dqn.terminal_at_horizon},

        {"env.alpha", K::Double, &cfg.env.alpha},
        {"env.penalty_weight", K::Double, &cfg.env.penalty_weight},
        {"env.horizon", K::Int, &cfg.env.horizon},
        {"env.include_age", K::Bool, &cfg.env.include_age},
        {"env.queue_norm", K::Double, &cfg.env.queue_norm},
        {"env.age_norm", K::Double, &cfg.env.age_norm},
        {"env.persist_queue", K::Bool, &cfg.env.persist_queue},
    };
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const std::string v = trim(value);
    const char* first = v.data();
    const char* last = first + v.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: bad boolean '" + value + "' for key '" + key + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::size_t start = 0;
    const std::string v = trim(value);
    while (start <= v.size()) {
        const std::size_t comma = v.find(',', start);
        const std::string item =
            comma == std::string::npos ? v.substr(start) : v.substr(start, comma - start);
        out.push_back(parse_number<int>(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty())
        throw ConfigError("config: empty list for key '" + key + "'");
    return out;
}

}  // namespace

void apply_config_value(const ConfigBinding& binding, const std::string& value) {
    using K = ConfigBinding::Kind;
    switch (binding.kind) {
        case K::Int:
            *static_cast<int*>(binding.target) = parse_number<int>(binding.key, value);
            break;
        case K::Double:
            *static_cast<double*>(binding.target) = parse_number<double>(binding.key, value);
            break;
        case K::Bool:
            *static_cast<bool*>(binding.target) = parse_bool(binding.key, value);
            break;
        case K::Uint64:
            *static_cast<std::uint64_t*>(binding.target) =
                parse_number<std::uint64_t>(binding.key, value);
            break;
        case K::String:
            *static_cast<std::string*>(binding.target) = trim(value);
            break;
        case K::IntList:
            *static_cast<std::vector<int>*>(binding.target) = parse_int_list(binding.key, value);
            break;
    }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path);

    const auto bindings = config_bindings(cfg);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = line.substr(eq + 1);
        if (!section.empty() && key.find('.') == std::string::npos)
            key = section + "." + key;

        const auto it = std::find_if(bindings.begin(), bindings.end(),
                                     [&](const ConfigBinding& b) { return b.key == key; });
        if (it == bindings.end())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        apply_config_value(*it, value);
    }
}

}  // namespace beamsense

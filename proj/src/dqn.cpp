#include "beamsense/dqn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "beamsense/common.hpp"
#include "beamsense/errors.hpp"

namespace beamsense {

void DqnConfig::validate() const {
    if (hidden_sizes.empty())
        throw std::invalid_argument("dqn: need at least one hidden layer");
    for (int h : hidden_sizes)
        if (h < 1)
            throw std::invalid_argument("dqn: hidden sizes must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("dqn: gamma must lie in [0, 1)");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("dqn: learning rate must be > 0");
    if (batch_size < 1)
        throw std::invalid_argument("dqn: batch size must be >= 1");
    if (replay_capacity < batch_size)
        throw std::invalid_argument("dqn: replay capacity must hold at least one batch");
    if (epochs < 1 || steps_per_epoch < 1)
        throw std::invalid_argument("dqn: epochs and steps per epoch must be >= 1");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) ||
        !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
        throw std::invalid_argument("dqn: epsilon bounds must lie in [0, 1]");
    if (!(anneal_fraction >= 0.0 && anneal_fraction <= 1.0))
        throw std::invalid_argument("dqn: anneal fraction must lie in [0, 1]");
    if (target_sync_interval < 0)
        throw std::invalid_argument("dqn: target sync interval must be >= 0");
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1)
        throw std::invalid_argument("replay buffer: capacity must be >= 1");
    data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::oldest_first(int i) const {
    if (i < 0 || i >= size())
        throw std::invalid_argument("replay buffer: index out of range");
    if (size() < capacity_) return data_[i];
    return data_[(cursor_ + i) % capacity_];
}

ReplayBuffer ReplayBuffer::restore(int capacity, int cursor, std::vector<Transition> data) {
    ReplayBuffer buf(capacity);
    if (static_cast<int>(data.size()) > capacity)
        throw std::invalid_argument("replay buffer: more transitions than capacity");
    if (cursor < 0 || cursor >= capacity)
        throw std::invalid_argument("replay buffer: cursor out of range");
    if (static_cast<int>(data.size()) < capacity && cursor != static_cast<int>(data.size()))
        throw std::invalid_argument("replay buffer: cursor inconsistent with partial fill");
    buf.data_ = std::move(data);
    buf.cursor_ = cursor;
    return buf;
}

std::vector<int> ReplayBuffer::sample_indices(int batch, std::mt19937_64& rng) const {
    if (batch < 1)
        throw std::invalid_argument("replay buffer: batch must be >= 1");
    if (size() < batch)
        throw std::invalid_argument("replay buffer: not enough transitions to sample");
    std::uniform_int_distribution<int> pick(0, size() - 1);
    std::vector<int> idx(batch);
    for (int& i : idx) i = pick(rng);
    return idx;
}

DqnAgent make_agent(int state_dim, const DqnConfig& cfg) {
    cfg.validate();
    if (state_dim < 1)
        throw std::invalid_argument("dqn: state dimension must be >= 1");

    std::vector<int> arch;
    arch.push_back(state_dim);
    arch.insert(arch.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
    arch.push_back(2);

    MlpParams online = mlp_init(arch, mix_seed(cfg.seed, 0x716e6574));
    MlpParams target = online;
    AdamState adam = adam_init(online);
    return DqnAgent{cfg, std::move(online), std::move(target), std::move(adam),
                    ReplayBuffer(cfg.replay_capacity),
                    std::mt19937_64(mix_seed(cfg.seed, 0x616374)), 0};
}

double epsilon_for_step(const DqnConfig& cfg, std::int64_t step) {
    const double anneal_steps = cfg.anneal_fraction * static_cast<double>(cfg.planned_steps());
    if (anneal_steps <= 0.0 || step >= anneal_steps) return cfg.epsilon_end;
    const double frac = static_cast<double>(step) / anneal_steps;
    return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
}

double DqnAgent::epsilon() const { return epsilon_for_step(config, global_step); }

namespace {

int argmin_of_two(const Eigen::VectorXd& values) {
    return values(1) < values(0) ? 1 : 0;
}

}  // namespace

int DqnAgent::greedy_action(const Eigen::VectorXd& encoded_state) const {
    return argmin_of_two(mlp_forward_one(online, encoded_state));
}

int epsilon_greedy(const MlpParams& qnet, const Eigen::VectorXd& encoded_state, double epsilon,
                   std::mt19937_64& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon_greedy: epsilon must lie in [0, 1]");
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng) < epsilon) {
        std::uniform_int_distribution<int> coin(0, 1);
        return coin(rng);
    }
    return argmin_of_two(mlp_forward_one(qnet, encoded_state));
}

Eigen::VectorXd td_targets(const MlpParams& target_net, const std::vector<const Transition*>& batch,
                           double gamma, bool terminal_at_horizon) {
    if (batch.empty())
        throw std::invalid_argument("td_targets: empty batch");

    const int B = static_cast<int>(batch.size());
    Eigen::MatrixXd next_states(target_net.input_size(), B);
    for (int i = 0; i < B; ++i) next_states.col(i) = batch[i]->next_state;
    const Eigen::MatrixXd next_q = mlp_forward(target_net, next_states);

    Eigen::VectorXd y(B);
    for (int i = 0; i < B; ++i) {
        if (batch[i]->terminal && terminal_at_horizon)
            y(i) = batch[i]->cost;
        else
            y(i) = batch[i]->cost + gamma * next_q.col(i).minCoeff();
    }
    return y;
}

double q_update(DqnAgent& agent, const std::vector<const Transition*>& batch) {
    if (batch.empty())
        throw std::invalid_argument("q_update: empty batch");

    const Eigen::VectorXd y =
        td_targets(agent.target, batch, agent.config.gamma, agent.config.terminal_at_horizon);

    const int B = static_cast<int>(batch.size());
    Eigen::MatrixXd states(agent.online.input_size(), B);
    std::vector<int> actions(B);
    for (int i = 0; i < B; ++i) {
        states.col(i) = batch[i]->state;
        actions[i] = batch[i]->action;
    }

    ForwardCache cache;
    mlp_forward(agent.online, states, &cache);
    MlpGrads grads = grads_like(agent.online);
    const double loss = mlp_backward_selected_squared(agent.online, cache, actions, y, grads);
    adam_step(agent.online, grads, agent.adam, agent.config.learning_rate);
    return loss;
}

void target_sync(const MlpParams& online, MlpParams& target, std::int64_t step, int interval) {
    if (interval < 1) return;
    if (step % interval == 0) target = online;
}

std::vector<EpochStats> train_dqn(DqnAgent& agent, SensingEnv& env) {
    const DqnConfig& cfg = agent.config;
    if (env.encoded_dim() != agent.online.input_size())
        throw std::invalid_argument("train_dqn: agent input size does not match environment encoding");

    std::vector<EpochStats> history;
    history.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        DqnState raw = env.reset();
        Eigen::VectorXd s = env.encode(raw);

        EpochStats stats;
        double cost_sum = 0.0, queue_sum = 0.0, td_sum = 0.0;
        int sense_count = 0, td_count = 0, steps_taken = 0;
        for (int t = 0; t < cfg.steps_per_epoch; ++t) {
            const double eps = epsilon_for_step(cfg, agent.global_step);
            const int action = epsilon_greedy(agent.online, s, eps, agent.rng);
            const StepResult res = env.step(action);
            Eigen::VectorXd s_next = env.encode(res.next);
            agent.replay.push({s, action, res.cost, s_next, res.terminal});

            if (agent.replay.size() >= cfg.batch_size) {
                const std::vector<int> idx = agent.replay.sample_indices(cfg.batch_size, agent.rng);
                std::vector<const Transition*> batch;
                batch.reserve(idx.size());
                for (int i : idx) batch.push_back(&agent.replay.storage(i));
                td_sum += q_update(agent, batch);
                ++td_count;
            }

            agent.global_step += 1;
            target_sync(agent.online, agent.target, agent.global_step, cfg.target_sync_interval);

            cost_sum += res.cost;
            queue_sum += res.next.queue;
            sense_count += action;
            ++steps_taken;
            s = std::move(s_next);
            stats.epsilon = eps;

            if (res.terminal) break;
        }

        stats.mean_cost = cost_sum / steps_taken;
        stats.sense_rate = static_cast<double>(sense_count) / steps_taken;
        stats.mean_queue = queue_sum / steps_taken;
        stats.mean_td_loss = td_count > 0 ? td_sum / td_count : 0.0;
        history.push_back(stats);
    }
    return history;
}

namespace {

nlohmann::json mlp_json_obj(const MlpParams& p) { return nlohmann::json::parse(mlp_to_json(p)); }

MlpParams mlp_from_obj(const nlohmann::json& j) { return mlp_from_json(j.dump()); }

nlohmann::json adam_json_obj(const AdamState& s) {
    nlohmann::json j;
    j["step"] = s.step;
    j["beta1"] = s.beta1;
    j["beta2"] = s.beta2;
    j["epsilon"] = s.epsilon;
    auto dump_mats = [](const std::vector<Eigen::MatrixXd>& mats) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& m : mats) {
            std::vector<double> flat;
            flat.reserve(m.size());
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
            arr.push_back(flat);
        }
        return arr;
    };
    auto dump_vecs = [](const std::vector<Eigen::VectorXd>& vecs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : vecs)
            arr.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        return arr;
    };
    j["m_w"] = dump_mats(s.m_w);
    j["v_w"] = dump_mats(s.v_w);
    j["m_b"] = dump_vecs(s.m_b);
    j["v_b"] = dump_vecs(s.v_b);
    return j;
}

AdamState adam_from_obj(const nlohmann::json& j, const MlpParams& shape) {
    AdamState s = adam_init(shape);
    s.step = j.at("step").get<std::int64_t>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    const auto& mw = j.at("m_w");
    const auto& vw = j.at("v_w");
    const auto& mb = j.at("m_b");
    const auto& vb = j.at("v_b");
    if (mw.size() != s.m_w.size() || vw.size() != s.v_w.size() || mb.size() != s.m_b.size() ||
        vb.size() != s.v_b.size())
        throw ParseError("agent checkpoint: optimizer layer count mismatch");
    auto load_mat = [](Eigen::MatrixXd& m, const nlohmann::json& src) {
        const auto flat = src.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != m.size())
            throw ParseError("agent checkpoint: optimizer tensor size mismatch");
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[k++];
    };
    auto load_vec = [](Eigen::VectorXd& v, const nlohmann::json& src) {
        const auto flat = src.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(flat.size()) != v.size())
            throw ParseError("agent checkpoint: optimizer tensor size mismatch");
        for (std::size_t k = 0; k < flat.size(); ++k) v(static_cast<Eigen::Index>(k)) = flat[k];
    };
    for (std::size_t l = 0; l < s.m_w.size(); ++l) {
        load_mat(s.m_w[l], mw[l]);
        load_mat(s.v_w[l], vw[l]);
        load_vec(s.m_b[l], mb[l]);
        load_vec(s.v_b[l], vb[l]);
    }
    return s;
}

nlohmann::json config_json_obj(const DqnConfig& c) {
    nlohmann::json j;
    j["hidden_sizes"] = c.hidden_sizes;
    j["gamma"] = c.gamma;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["replay_capacity"] = c.replay_capacity;
    j["epochs"] = c.epochs;
    j["steps_per_epoch"] = c.steps_per_epoch;
    j["epsilon_start"] = c.epsilon_start;
    j["epsilon_end"] = c.epsilon_end;
    j["anneal_fraction"] = c.anneal_fraction;
    j["target_sync_interval"] = c.target_sync_interval;
    j["terminal_at_horizon"] = c.terminal_at_horizon;
    j["seed"] = c.seed;
    return j;
}

DqnConfig config_from_obj(const nlohmann::json& j) {
    DqnConfig c;
    c.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    c.gamma = j.at("gamma").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.replay_capacity = j.at("replay_capacity").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.steps_per_epoch = j.at("steps_per_epoch").get<int>();
    c.epsilon_start = j.at("epsilon_start").get<double>();
    c.epsilon_end = j.at("epsilon_end").get<double>();
    c.anneal_fraction = j.at("anneal_fraction").get<double>();
    c.target_sync_interval = j.at("target_sync_interval").get<int>();
    c.terminal_at_horizon = j.at("terminal_at_horizon").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd std_to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_agent_json(const DqnAgent& agent, const std::string& path) {
    nlohmann::json j;
    j["format"] = "beamsense-dqn";
    j["version"] = 1;
    j["config"] = config_json_obj(agent.config);
    j["online"] = mlp_json_obj(agent.online);
    j["target"] = mlp_json_obj(agent.target);
    j["adam"] = adam_json_obj(agent.adam);
    j["global_step"] = agent.global_step;

    std::ostringstream rng_stream;
    rng_stream << agent.rng;
    j["rng"] = rng_stream.str();

    nlohmann::json replay;
    replay["capacity"] = agent.replay.capacity();
    replay["cursor"] = agent.replay.cursor();
    nlohmann::json items = nlohmann::json::array();
    for (int i = 0; i < agent.replay.size(); ++i) {
        const Transition& t = agent.replay.storage(i);
        items.push_back({{"s", vec_to_std(t.state)},
                         {"a", t.action},
                         {"c", t.cost},
                         {"n", vec_to_std(t.next_state)},
                         {"d", t.terminal}});
    }
    replay["transitions"] = std::move(items);
    j["replay"] = std::move(replay);

    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << j.dump() << '\n';
    if (!out)
        throw IoError("write failed: " + path);
}

DqnAgent load_agent_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("agent checkpoint: invalid json: ") + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != "beamsense-dqn")
            throw ParseError("agent checkpoint: unrecognized format tag");
        DqnConfig cfg = config_from_obj(j.at("config"));
        MlpParams online = mlp_from_obj(j.at("online"));
        MlpParams target = mlp_from_obj(j.at("target"));
        AdamState adam = adam_from_obj(j.at("adam"), online);

        const auto& jr = j.at("replay");
        std::vector<Transition> items;
        for (const auto& item : jr.at("transitions")) {
            Transition t;
            t.state = std_to_vec(item.at("s").get<std::vector<double>>());
            t.action = item.at("a").get<int>();
            t.cost = item.at("c").get<double>();
            t.next_state = std_to_vec(item.at("n").get<std::vector<double>>());
            t.terminal = item.at("d").get<bool>();
            items.push_back(std::move(t));
        }
        ReplayBuffer replay = ReplayBuffer::restore(jr.at("capacity").get<int>(),
                                                    jr.at("cursor").get<int>(), std::move(items));

        DqnAgent agent{std::move(cfg), std::move(online), std::move(target), std::move(adam),
                       std::move(replay), std::mt19937_64(), j.at("global_step").get<std::int64_t>()};
        std::istringstream rng_stream(j.at("rng").get<std::string>());
        rng_stream >> agent.rng;
        if (rng_stream.fail())
            throw ParseError("agent checkpoint: bad rng state");
        return agent;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("agent checkpoint: ") + e.what());
    }
}

}  // namespace beamsense

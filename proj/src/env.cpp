#include "beamsense/env.hpp"

#include <cmath>
#include <stdexcept>

#include "beamsense/beam_predictor.hpp"
#include "beamsense/common.hpp"
#include "beamsense/errors.hpp"
#include "beamsense/lyapunov.hpp"

namespace beamsense {

void EnvConfig::validate() const {
    check_budget(alpha);
    if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight))
        throw std::invalid_argument("env: penalty weight must be finite and >= 0");
    if (horizon < 1)
        throw std::invalid_argument("env: horizon must be >= 1");
    if (!(queue_norm > 0.0) || !(age_norm > 0.0))
        throw std::invalid_argument("env: normalizers must be > 0");
}

SensingEnv::SensingEnv(const Dataset& dataset, const MlpParams& predictor, EnvConfig cfg)
    : dataset_(&dataset), predictor_(&predictor), cfg_(cfg), rng_(mix_seed(cfg.seed, 0x656e76)) {
    cfg_.validate();
    if (dataset.size() < cfg_.horizon)
        throw std::invalid_argument("env: dataset shorter than the episode horizon");
    if (dataset.feature_dim() != predictor.input_size())
        throw std::invalid_argument("env: predictor input size does not match dataset features");
}

int SensingEnv::max_start_slot() const { return dataset_->size() - cfg_.horizon; }

DqnState SensingEnv::reset() {
    std::uniform_int_distribution<int> pick(0, max_start_slot());
    return reset_at(pick(rng_));
}

DqnState SensingEnv::reset_at(int start_slot) {
    if (start_slot < 0 || start_slot > max_start_slot())
        throw std::invalid_argument("env: episode start out of range");

    slot_ = start_slot;
    steps_done_ = 0;
    terminal_ = false;
    state_.input = dataset_->records[start_slot].features;
    state_.age = 1;
    state_.queue = cfg_.persist_queue ? carried_queue_ : 0.0;
    cached_logits_ = mlp_forward_one(*predictor_, state_.input);
    return state_;
}

StepResult SensingEnv::step(int action) {
    if (terminal_)
        throw StateError("env: step on a terminal episode");
    if (action != 0 && action != 1)
        throw std::invalid_argument("env: action must be 0 or 1");

    const DatasetRecord& rec = dataset_->records[slot_];
    if (action == 1) {
        state_.input = rec.features;
        cached_logits_ = mlp_forward_one(*predictor_, state_.input);
    }

    const double loss = cross_entropy_from_logits(cached_logits_, rec.label);
    if (!std::isfinite(loss))
        throw NumericalError("env: prediction loss is not finite");

    StepResult out;
    out.loss = loss;
    out.rank = label_rank(cached_logits_, rec.label);
    out.top1_hit = out.rank == 0;
    out.sensed = action;
    out.cost = dpp_cost(loss, action, state_.queue, cfg_.alpha, cfg_.penalty_weight);

    state_.queue = queue_update(state_.queue, action, cfg_.alpha);
    state_.age = action == 1 ? 1 : state_.age + 1;
    carried_queue_ = state_.queue;

    ++slot_;
    ++steps_done_;
    terminal_ = steps_done_ >= cfg_.horizon;
    out.terminal = terminal_;
    out.next = state_;
    return out;
}

Eigen::VectorXd SensingEnv::encode(const DqnState& s) const {
    const int d = static_cast<int>(s.input.size());
    Eigen::VectorXd v(encoded_dim());
    v.head(d) = s.input;
    v(d) = s.queue / cfg_.queue_norm;
    if (cfg_.include_age)
        v(d + 1) = s.age / cfg_.age_norm;
    return v;
}

int SensingEnv::encoded_dim() const {
    return dataset_->feature_dim() + (cfg_.include_age ? 2 : 1);
}

double SensingEnv::queue() const { return terminal_ ? carried_queue_ : state_.queue; }

void SensingEnv::set_queue(double q) {
    if (!(q >= 0.0) || !std::isfinite(q))
        throw std::invalid_argument("env: queue must be finite and >= 0");
    carried_queue_ = q;
    if (!terminal_) state_.queue = q;
}

}  // namespace beamsense

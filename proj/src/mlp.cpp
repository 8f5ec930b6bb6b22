#include "beamsense/mlp.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "beamsense/errors.hpp"

namespace beamsense {

namespace {

void check_architecture(const std::vector<int>& layer_sizes) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("mlp: need at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1)
            throw std::invalid_argument("mlp: every layer needs at least one unit");
}

}  // namespace

MlpParams mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    check_architecture(layer_sizes);

    MlpParams p;
    p.layer_sizes = layer_sizes;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> uni(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                w(r, c) = uni(rng);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return p;
}

MlpGrads grads_like(const MlpParams& params) {
    MlpGrads g;
    for (int l = 0; l < params.num_layers(); ++l) {
        g.weights.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    }
    return g;
}

void zero_grads(MlpGrads& grads) {
    for (auto& w : grads.weights) w.setZero();
    for (auto& b : grads.biases) b.setZero();
}

AdamState adam_init(const MlpParams& params) {
    AdamState s;
    for (int l = 0; l < params.num_layers(); ++l) {
        s.m_w.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
        s.v_w.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
        s.m_b.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
        s.v_b.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
    }
    return s;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& input,
                            ForwardCache* cache) {
    if (input.rows() != params.input_size())
        throw std::invalid_argument("mlp_forward: input dimension mismatch");

    if (cache) {
        // resize, not assign: keeps prior allocations alive for reuse
        cache->pre.resize(params.num_layers());
        cache->post.resize(params.num_layers() + 1);
        cache->post[0] = input;
    }

    Eigen::MatrixXd a = input;
    const int L = params.num_layers();
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd z = (params.weights[l] * a).colwise() + params.biases[l];
        if (cache) cache->pre[l] = z;
        if (l + 1 < L)
            a = z.cwiseMax(0.0);
        else
            a = std::move(z);
        if (cache) cache->post[l + 1] = a;
    }
    return a;
}

Eigen::VectorXd mlp_forward_one(const MlpParams& params, const Eigen::VectorXd& input,
                                ForwardCache* cache) {
    return mlp_forward(params, Eigen::MatrixXd(input), cache).col(0);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
        out.col(c) = softmax(logits.col(c));
    return out;
}

double cross_entropy_from_logits(const Eigen::VectorXd& logits, int label) {
    if (label < 0 || label >= logits.size())
        throw std::invalid_argument("cross_entropy_from_logits: label out of range");
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return lse - logits(label);
}

void mlp_backward_from_output_delta(const MlpParams& params, const ForwardCache& cache,
                                    const Eigen::MatrixXd& output_delta, MlpGrads& grads) {
    const int L = params.num_layers();
    Eigen::MatrixXd delta = output_delta;
    for (int l = L - 1; l >= 0; --l) {
        grads.weights[l].noalias() += delta * cache.post[l].transpose();
        grads.biases[l] += delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = params.weights[l].transpose() * delta;
            delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
}

double mlp_backward_cross_entropy(const MlpParams& params, const ForwardCache& cache,
                                  const std::vector<int>& labels, MlpGrads& grads) {
    const Eigen::MatrixXd& logits = cache.post.back();
    const int B = static_cast<int>(logits.cols());
    if (static_cast<int>(labels.size()) != B)
        throw std::invalid_argument("mlp_backward_cross_entropy: label count mismatch");

    double loss = 0.0;
    Eigen::MatrixXd delta = softmax_columns(logits);
    for (int i = 0; i < B; ++i) {
        loss += cross_entropy_from_logits(logits.col(i), labels[i]);
        delta(labels[i], i) -= 1.0;
    }
    delta /= B;
    mlp_backward_from_output_delta(params, cache, delta, grads);
    return loss / B;
}

double mlp_backward_selected_squared(const MlpParams& params, const ForwardCache& cache,
                                     const std::vector<int>& selected,
                                     const Eigen::VectorXd& targets, MlpGrads& grads) {
    const Eigen::MatrixXd& out = cache.post.back();
    const int B = static_cast<int>(out.cols());
    if (static_cast<int>(selected.size()) != B || targets.size() != B)
        throw std::invalid_argument("mlp_backward_selected_squared: batch size mismatch");

    double loss = 0.0;
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    for (int i = 0; i < B; ++i) {
        if (selected[i] < 0 || selected[i] >= out.rows())
            throw std::invalid_argument("mlp_backward_selected_squared: selected index out of range");
        const double diff = out(selected[i], i) - targets(i);
        loss += 0.5 * diff * diff;
        delta(selected[i], i) = diff / B;
    }
    mlp_backward_from_output_delta(params, cache, delta, grads);
    return loss / B;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr) {
    if (!std::isfinite(lr) || lr == 0.0)
        throw std::invalid_argument("adam_step: learning rate must be finite and nonzero");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    // Elementwise expressions throughout; no per-step temporaries.
    for (int l = 0; l < params.num_layers(); ++l) {
        state.m_w[l].array() =
            state.beta1 * state.m_w[l].array() + (1.0 - state.beta1) * grads.weights[l].array();
        state.v_w[l].array() = state.beta2 * state.v_w[l].array() +
                               (1.0 - state.beta2) * grads.weights[l].array().square();
        params.weights[l].array() -=
            lr * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + state.epsilon);

        state.m_b[l].array() =
            state.beta1 * state.m_b[l].array() + (1.0 - state.beta1) * grads.biases[l].array();
        state.v_b[l].array() = state.beta2 * state.v_b[l].array() +
                               (1.0 - state.beta2) * grads.biases[l].array().square();
        params.biases[l].array() -=
            lr * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + state.epsilon);
    }
}

namespace {

// Walks every scalar parameter, applying fn(ref to value, analytic grad).
template <typename Fn>
void for_each_param(MlpParams& params, const MlpGrads& grads, Fn&& fn) {
    for (int l = 0; l < params.num_layers(); ++l) {
        for (Eigen::Index r = 0; r < params.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < params.weights[l].cols(); ++c)
                fn(params.weights[l](r, c), grads.weights[l](r, c));
        for (Eigen::Index r = 0; r < params.biases[l].size(); ++r)
            fn(params.biases[l](r), grads.biases[l](r));
    }
}

template <typename LossFn>
double finite_diff_max_rel_error(const MlpParams& params, LossFn&& loss_of, MlpGrads& analytic,
                                 double eps) {
    MlpParams work = params;
    double worst = 0.0;
    for_each_param(work, analytic, [&](double& value, const double& grad) {
        const double saved = value;
        value = saved + eps;
        const double lp = loss_of(work);
        value = saved - eps;
        const double lm = loss_of(work);
        value = saved;
        const double fd = (lp - lm) / (2.0 * eps);
        const double rel = std::abs(grad - fd) / std::max(1e-12, std::abs(grad) + std::abs(fd));
        worst = std::max(worst, rel);
    });
    return worst;
}

}  // namespace

double finite_diff_max_rel_error_cross_entropy(const MlpParams& params,
                                               const Eigen::MatrixXd& input,
                                               const std::vector<int>& labels, double eps) {
    ForwardCache cache;
    mlp_forward(params, input, &cache);
    MlpGrads analytic = grads_like(params);
    mlp_backward_cross_entropy(params, cache, labels, analytic);

    auto loss_of = [&](const MlpParams& p) {
        const Eigen::MatrixXd logits = mlp_forward(p, input);
        double loss = 0.0;
        for (int i = 0; i < static_cast<int>(labels.size()); ++i)
            loss += cross_entropy_from_logits(logits.col(i), labels[i]);
        return loss / static_cast<double>(labels.size());
    };
    return finite_diff_max_rel_error(params, loss_of, analytic, eps);
}

double finite_diff_max_rel_error_selected_squared(const MlpParams& params,
                                                  const Eigen::MatrixXd& input,
                                                  const std::vector<int>& selected,
                                                  const Eigen::VectorXd& targets, double eps) {
    ForwardCache cache;
    mlp_forward(params, input, &cache);
    MlpGrads analytic = grads_like(params);
    mlp_backward_selected_squared(params, cache, selected, targets, analytic);

    auto loss_of = [&](const MlpParams& p) {
        const Eigen::MatrixXd out = mlp_forward(p, input);
        double loss = 0.0;
        for (int i = 0; i < static_cast<int>(selected.size()); ++i) {
            const double diff = out(selected[i], i) - targets(i);
            loss += 0.5 * diff * diff;
        }
        return loss / static_cast<double>(selected.size());
    };
    return finite_diff_max_rel_error(params, loss_of, analytic, eps);
}

std::string mlp_to_json(const MlpParams& params) {
    nlohmann::json j;
    j["format"] = "beamsense-mlp";
    j["version"] = 1;
    j["layer_sizes"] = params.layer_sizes;
    auto& jw = j["weights"] = nlohmann::json::array();
    auto& jb = j["biases"] = nlohmann::json::array();
    for (int l = 0; l < params.num_layers(); ++l) {
        std::vector<double> flat;
        flat.reserve(params.weights[l].size());
        for (Eigen::Index r = 0; r < params.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < params.weights[l].cols(); ++c)
                flat.push_back(params.weights[l](r, c));
        jw.push_back(flat);
        jb.push_back(std::vector<double>(params.biases[l].data(),
                                         params.biases[l].data() + params.biases[l].size()));
    }
    return j.dump();
}

MlpParams mlp_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mlp checkpoint: invalid json: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "beamsense-mlp")
            throw ParseError("mlp checkpoint: unrecognized format tag");
        MlpParams p;
        p.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        check_architecture(p.layer_sizes);
        const auto& jw = j.at("weights");
        const auto& jb = j.at("biases");
        if (jw.size() + 1 != p.layer_sizes.size() || jb.size() + 1 != p.layer_sizes.size())
            throw ParseError("mlp checkpoint: layer count mismatch");
        for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
            const int rows = p.layer_sizes[l + 1];
            const int cols = p.layer_sizes[l];
            const auto flat = jw[l].get<std::vector<double>>();
            if (static_cast<int>(flat.size()) != rows * cols)
                throw ParseError("mlp checkpoint: weight size mismatch at layer " + std::to_string(l));
            Eigen::MatrixXd w(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    w(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
            p.weights.push_back(std::move(w));
            const auto bias = jb[l].get<std::vector<double>>();
            if (static_cast<int>(bias.size()) != rows)
                throw ParseError("mlp checkpoint: bias size mismatch at layer " + std::to_string(l));
            p.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mlp checkpoint: ") + e.what());
    }
}

void save_mlp_json(const MlpParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << mlp_to_json(params) << '\n';
    if (!out)
        throw IoError("write failed: " + path);
}

MlpParams load_mlp_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return mlp_from_json(buf.str());
}

}  // namespace beamsense

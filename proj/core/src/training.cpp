#include "sonn/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sonn/errors.hpp"
#include "sonn/rng.hpp"

namespace sonn {

AdamState make_adam(const std::vector<Tensor*>& params, double lr) {
    AdamState state;
    state.lr = lr;
    for (const Tensor* p : params) {
        state.m.emplace_back(p->shape());
        state.v.emplace_back(p->shape());
    }
    return state;
}

void adam_step(AdamState& state, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw DimensionError("adam_step: parameter/gradient list mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& param = *params[p];
        const Tensor& grad = *grads[p];
        if (!param.same_shape(grad) || !param.same_shape(state.m[p]))
            throw DimensionError("adam_step: shape mismatch in parameter " + std::to_string(p));
        Tensor& m = state.m[p];
        Tensor& v = state.v[p];
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double g = grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            param[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

MseResult mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw DimensionError("mse_loss: shape mismatch");
    if (pred.empty()) throw ParameterError("mse_loss: empty tensors");
    MseResult result;
    result.grad = Tensor(pred.shape());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        loss += d * d;
        result.grad[i] = 2.0 * d * inv_n;
    }
    result.loss = loss * inv_n;
    return result;
}

namespace {

// [C,P,P] patches -> one [B,C,P,P] batch mapped into the [-1,1] domain.
Tensor assemble_batch(const PatchSet& dataset, const std::vector<std::size_t>& indices,
                      std::size_t begin, std::size_t end, bool noisy_side) {
    const Tensor& first = dataset.pairs[indices[begin]].first;
    const std::size_t c = first.extent(0), h = first.extent(1), w = first.extent(2);
    Tensor batch({end - begin, c, h, w});
    for (std::size_t b = begin; b < end; ++b) {
        const auto& pair = dataset.pairs[indices[b]];
        const Tensor& patch = noisy_side ? pair.first : pair.second;
        if (patch.extent(0) != c || patch.extent(1) != h || patch.extent(2) != w)
            throw DimensionError("train: inconsistent patch shapes in the dataset");
        double* dst = batch.data() + (b - begin) * patch.size();
        for (std::size_t i = 0; i < patch.size(); ++i) dst[i] = 2.0 * patch[i] - 1.0;
    }
    return batch;
}

double validation_psnr(const NetworkConfig& config, const NetworkState& state,
                       const PatchSet& dataset, const std::vector<std::size_t>& val_indices) {
    double sum = 0.0;
    for (std::size_t idx : val_indices) {
        const auto& [noisy, clean] = dataset.pairs[idx];
        sum += psnr(clean, denoise_image(config, state, noisy));
    }
    return sum / static_cast<double>(val_indices.size());
}

std::vector<Tensor*> parameter_list(NetworkState& state) {
    std::vector<Tensor*> params;
    for (LayerState& layer : state) {
        params.push_back(&layer.weight);
        params.push_back(&layer.bias);
    }
    return params;
}

}  // namespace

TrainResult train(const NetworkConfig& config, const PatchSet& dataset, const TrainPlan& plan) {
    if (dataset.pairs.empty()) throw ParameterError("train: empty dataset");
    if (plan.batch_size < 1) throw ParameterError("train: batch_size must be >= 1");
    if (plan.split_ratio <= 0.0 || plan.split_ratio >= 1.0)
        throw ParameterError("train: split_ratio must lie in (0,1)");

    NetworkState state = init_network(config, plan.seed);

    // Deterministic shuffle, then a train/validation split. With a single
    // pair the training patch doubles as the validation patch.
    std::vector<std::size_t> order(dataset.pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(plan.seed, 0x5p1i7));
    for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.next_u64() % (i + 1)]);
    std::size_t n_train = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(plan.split_ratio *
                                              static_cast<double>(order.size()))),
        1, order.size());
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
    std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());
    if (val_idx.empty()) val_idx = train_idx;

    std::vector<Tensor*> params = parameter_list(state);
    AdamState adam = make_adam(params, plan.lr);

    TrainResult result;
    double best_psnr = validation_psnr(config, state, dataset, val_idx);
    NetworkState best_state = state;
    int best_epoch = 0;

    Rng epoch_rng(mix_seed(plan.seed, 0xba7c4));
    for (int epoch = 1; epoch <= plan.epochs; ++epoch) {
        if (plan.lr_step_decay)
            adam.lr = plan.lr * std::pow(0.5, static_cast<double>((epoch - 1) / 30));
        for (std::size_t i = train_idx.size() - 1; i > 0; --i)
            std::swap(train_idx[i], train_idx[epoch_rng.next_u64() % (i + 1)]);

        double epoch_loss = 0.0;
        std::size_t samples = 0;
        const std::size_t bs = static_cast<std::size_t>(plan.batch_size);
        for (std::size_t begin = 0; begin < train_idx.size(); begin += bs) {
            const std::size_t end = std::min(begin + bs, train_idx.size());
            const Tensor input = assemble_batch(dataset, train_idx, begin, end, true);
            const Tensor target = assemble_batch(dataset, train_idx, begin, end, false);

            std::vector<LayerCache> caches;
            const Tensor output = network_forward(config, state, input, &caches);
            const MseResult mse = mse_loss(output, target);
            if (!std::isfinite(mse.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(begin / bs));
            epoch_loss += mse.loss * static_cast<double>(end - begin);
            samples += end - begin;

            const std::vector<LayerGrads> grads =
                network_backward(config, state, caches, mse.grad);
            std::vector<const Tensor*> grad_list;
            for (const LayerGrads& g : grads) {
                grad_list.push_back(&g.weight);
                grad_list.push_back(&g.bias);
            }
            adam_step(adam, params, grad_list);
        }

        const double val = validation_psnr(config, state, dataset, val_idx);
        result.log.push_back({epoch, epoch_loss / static_cast<double>(samples), val});
        if (val > best_psnr) {
            best_psnr = val;
            best_state = state;
            best_epoch = epoch;
        }
    }

    if (!plan.log_path.empty()) {
        std::ofstream os(plan.log_path);
        if (!os) throw IoError("cannot open '" + plan.log_path.string() + "' for writing");
        write_train_log_csv(os, result.log);
    }
    result.best = make_checkpoint(config, best_state, best_epoch, best_psnr);
    return result;
}

void write_train_log_csv(std::ostream& os, const std::vector<EpochLog>& log) {
    os << "epoch,train_loss,val_psnr\n";
    os.precision(12);
    for (const EpochLog& row : log)
        os << row.epoch << "," << row.train_loss << "," << row.val_psnr << "\n";
}

GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed, double tolerance) {
    constexpr std::size_t kExtent = 8;  // small spatial size keeps the probing tractable
    constexpr double kStep = 1e-5;

    NetworkState state = init_network(config, seed);
    Rng rng(mix_seed(seed, 0xf00d));
    const std::size_t channels = config.layers.front().in_channels;
    Tensor input({2, channels, kExtent, kExtent});
    for (std::size_t i = 0; i < input.size(); ++i) input[i] = rng.uniform(-0.9, 0.9);
    Tensor target({2, static_cast<std::size_t>(config.layers.back().out_channels), kExtent,
                   kExtent});
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = rng.uniform(-0.9, 0.9);

    const auto loss_value = [&]() {
        return mse_loss(network_forward(config, state, input), target).loss;
    };

    std::vector<LayerCache> caches;
    const Tensor output = network_forward(config, state, input, &caches);
    const std::vector<LayerGrads> analytic =
        network_backward(config, state, caches, mse_loss(output, target).grad);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (std::size_t l = 0; l < state.size(); ++l) {
        for (const bool weight_side : {true, false}) {
            Tensor& param = weight_side ? state[l].weight : state[l].bias;
            const Tensor& grad = weight_side ? analytic[l].weight : analytic[l].bias;
            Tensor numeric(param.shape());
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double saved = param[i];
                param[i] = saved + kStep;
                const double up = loss_value();
                param[i] = saved - kStep;
                const double down = loss_value();
                param[i] = saved;
                numeric[i] = (up - down) / (2.0 * kStep);
            }
            const double scale = std::max(max_abs(grad), max_abs(numeric));
            const double floor = std::max(1e-3 * scale, 1e-12);
            double max_rel = 0.0;
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double denom =
                    std::max({std::abs(grad[i]), std::abs(numeric[i]), floor});
                max_rel = std::max(max_rel, std::abs(grad[i] - numeric[i]) / denom);
            }
            report.rows.push_back({"layer" + std::to_string(l) +
                                       (weight_side ? "/weight" : "/bias"),
                                   max_rel});
            report.max_rel_err = std::max(report.max_rel_err, max_rel);
        }
    }
    report.passed = report.max_rel_err < tolerance;
    return report;
}

}  // namespace sonn

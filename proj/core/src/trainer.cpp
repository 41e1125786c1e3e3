#include "mtoc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mtoc/channel.hpp"
#include "mtoc/errors.hpp"

namespace mtoc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint8_t> gather_labels(const std::vector<std::uint8_t>& all,
                                        std::span<const int> idx) {
    std::vector<std::uint8_t> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = all[static_cast<std::size_t>(idx[k])];
    return out;
}

constexpr int kEvalBatch = 250;

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (max_train_samples < 0) throw ConfigError("TrainConfig: max_train_samples must be >= 0");
}

double joint_loss(std::span<const double> task_losses, std::span<const double> weights) {
    if (task_losses.size() != weights.size())
        throw ValueError("joint_loss: " + std::to_string(task_losses.size()) + " losses vs " +
                         std::to_string(weights.size()) + " weights");
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0 && weights[i] <= 1.0))
            throw ConfigError("joint_loss: weight " + std::to_string(weights[i]) +
                              " outside [0,1]");
        sum += weights[i] * task_losses[i];
    }
    return sum;
}

TrainResult train(MtocSystem& sys, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (sys.receivers.empty()) throw ConfigError("train: system has no receivers");
    if (dataset_for(sys.config) != data.id)
        throw ConfigError("train: system config " + config_name(sys.config) +
                          " does not match dataset " + dataset_name(data.id));
    if (cfg.mode == TrainMode::STOC) {
        int nonzero = 0;
        for (const auto& r : sys.receivers) nonzero += (r.weight > 0.0) ? 1 : 0;
        if (nonzero != 1)
            throw ConfigError("train: STOC mode requires exactly one nonzero-weight path, got " +
                              std::to_string(nonzero));
    }

    const auto t0 = Clock::now();
    const int n = sys.n();

    // Per-receiver binary labels over the (possibly truncated) train split.
    std::int64_t total = data.train_count();
    if (cfg.max_train_samples > 0) total = std::min(total, cfg.max_train_samples);
    std::vector<std::vector<std::uint8_t>> task_labels;
    task_labels.reserve(static_cast<std::size_t>(n));
    for (const auto& r : sys.receivers)
        task_labels.push_back(relabel(data, r.task, Split::Train));

    // Independent streams: shuffle + encoder dropout from the train seed,
    // one channel stream per receiver slot from its assembled seed.
    Batcher batcher(total, cfg.batch_size, derive_seed(cfg.seed, "shuffle"));
    Rng dropout_rng(derive_seed(cfg.seed, "dropout"));
    std::vector<Rng> channel_rngs;
    channel_rngs.reserve(static_cast<std::size_t>(n));
    for (const auto& r : sys.receivers) channel_rngs.emplace_back(r.channel.seed);

    AdamState enc_opt(sys.encoder, cfg.adam);
    std::vector<AdamState> dec_opts;
    dec_opts.reserve(static_cast<std::size_t>(n));
    for (auto& r : sys.receivers) dec_opts.emplace_back(r.decoder, cfg.adam);

    TrainResult result;
    result.loss_trajectory.reserve(static_cast<std::size_t>(cfg.epochs) * batcher.num_batches());

    std::vector<double> losses(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) weights[static_cast<std::size_t>(i)] = sys.receivers[i].weight;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        batcher.begin_epoch(epoch);
        for (int bi = 0; bi < batcher.num_batches(); ++bi) {
            const auto idx = batcher.batch(bi);
            const Tensor batch = data.train_images.gather_rows(idx);
            const int B = batch.dim(0);

            const Tensor z_raw = sys.encoder.forward(batch, &dropout_rng);
            const Tensor z = power_normalize(z_raw);

            Tensor dz_sum({B, sys.n_c});
            for (int i = 0; i < n; ++i) {
                auto& r = sys.receivers[static_cast<std::size_t>(i)];
                const auto labels =
                    gather_labels(task_labels[static_cast<std::size_t>(i)], idx);
                auto ch = channel_forward(z, r.channel, channel_rngs[static_cast<std::size_t>(i)]);
                const Tensor logits = r.decoder.forward(ch.y);
                auto ce = softmax_cross_entropy(logits, labels);
                losses[static_cast<std::size_t>(i)] = ce.loss;

                if (r.weight == 0.0) continue;  // zero gradient everywhere on this path
                Tensor upstream = ce.grad;
                if (r.weight != 1.0) {
                    double* g = upstream.data();
                    for (std::int64_t k = 0; k < upstream.size(); ++k) g[k] *= r.weight;
                }
                const Tensor dy = r.decoder.backward(upstream);
                const Tensor dz = channel_backward(dy, ch.realization);
                double* acc = dz_sum.data();
                const double* src = dz.data();
                for (std::int64_t k = 0; k < dz_sum.size(); ++k) acc[k] += src[k];
                dec_opts[static_cast<std::size_t>(i)].step(r.decoder);
            }

            const double joint = joint_loss(losses, weights);
            if (!std::isfinite(joint))
                throw DivergenceError("loss diverged at epoch " + std::to_string(epoch) +
                                      " batch " + std::to_string(bi) + " (value " +
                                      std::to_string(joint) + ")");
            result.loss_trajectory.push_back(joint);

            const Tensor dz_raw = power_normalize_backward(dz_sum, z_raw);
            sys.encoder.backward(dz_raw);
            enc_opt.step(sys.encoder);
        }
    }
    result.wall_seconds = seconds_since(t0);
    return result;
}

namespace {

struct TaskTally {
    std::int64_t correct = 0;
    std::int64_t graded = 0;
    double loss_sum = 0.0;  // batch-size weighted
};

/// Shared eval loop: one channel stream per receiver; per receiver either
/// its own task (MTOC) or every serve task graded off the same predictions.
EvalReport run_eval(const MtocSystem& sys, const Dataset& data, int trials, std::uint64_t seed,
                    std::span<const TaskSpec> serve_tasks) {
    if (trials < 1) throw ConfigError("evaluate: trials must be >= 1");
    if (dataset_for(sys.config) != data.id)
        throw ConfigError("evaluate: system/dataset mismatch");
    const bool serving = !serve_tasks.empty();
    if (serving && sys.n() != 1)
        throw ConfigError("evaluate_serving: expected a single-receiver system");

    const auto t0 = Clock::now();
    const std::int64_t N = data.test_count();
    const int n_paths = sys.n();
    const std::size_t n_tasks =
        serving ? serve_tasks.size() : static_cast<std::size_t>(n_paths);

    std::vector<std::vector<std::uint8_t>> truth(n_tasks);
    for (std::size_t t = 0; t < n_tasks; ++t)
        truth[t] = relabel(data, serving ? serve_tasks[t] : sys.receivers[t].task, Split::Test);

    std::vector<Rng> rngs;
    rngs.reserve(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i)
        rngs.emplace_back(derive_seed(seed, "eval-channel", static_cast<std::uint64_t>(i)));

    std::vector<TaskTally> tally(n_tasks);
    std::vector<int> idx(kEvalBatch);
    // batches outer, trials inner: the encoder output is trial-invariant and
    // dominates the cost, so it is computed once per batch
    for (std::int64_t start = 0; start < N; start += kEvalBatch) {
        const int B = static_cast<int>(std::min<std::int64_t>(kEvalBatch, N - start));
        idx.resize(static_cast<std::size_t>(B));
        for (int k = 0; k < B; ++k) idx[static_cast<std::size_t>(k)] = static_cast<int>(start + k);
        const Tensor batch = data.test_images.gather_rows(idx);
        const Tensor z = power_normalize(sys.encoder.infer_logits(batch));

        for (int trial = 0; trial < trials; ++trial) {
            for (int i = 0; i < n_paths; ++i) {
                const auto& r = sys.receivers[static_cast<std::size_t>(i)];
                auto ch = channel_forward(z, r.channel, rngs[static_cast<std::size_t>(i)]);
                const Tensor logits = r.decoder.infer_logits(ch.y);
                // argmax over the 2-way output; ties resolve to class 0
                std::vector<std::uint8_t> pred(static_cast<std::size_t>(B));
                for (int b = 0; b < B; ++b)
                    pred[static_cast<std::size_t>(b)] =
                        logits.at(b, 1) > logits.at(b, 0) ? 1 : 0;

                if (serving) {
                    for (std::size_t t = 0; t < n_tasks; ++t) {
                        auto ce = softmax_cross_entropy(
                            logits, std::span<const std::uint8_t>(truth[t]).subspan(
                                        static_cast<std::size_t>(start),
                                        static_cast<std::size_t>(B)));
                        tally[t].loss_sum += ce.loss * B;
                        tally[t].graded += B;
                        for (int b = 0; b < B; ++b)
                            tally[t].correct +=
                                pred[static_cast<std::size_t>(b)] ==
                                truth[t][static_cast<std::size_t>(start + b)];
                    }
                } else {
                    const std::size_t t = static_cast<std::size_t>(i);
                    auto ce = softmax_cross_entropy(
                        logits, std::span<const std::uint8_t>(truth[t]).subspan(
                                    static_cast<std::size_t>(start),
                                    static_cast<std::size_t>(B)));
                    tally[t].loss_sum += ce.loss * B;
                    tally[t].graded += B;
                    for (int b = 0; b < B; ++b)
                        tally[t].correct += pred[static_cast<std::size_t>(b)] ==
                                            truth[t][static_cast<std::size_t>(start + b)];
                }
            }
        }
    }

    EvalReport report;
    report.channel_uses_per_image =
        serving ? static_cast<int>(n_tasks) * sys.n_c : sys.n_c;
    for (std::size_t t = 0; t < n_tasks; ++t) {
        TaskReport tr;
        tr.task_id = serving ? serve_tasks[t].id : sys.receivers[t].task.id;
        tr.accuracy = static_cast<double>(tally[t].correct) / static_cast<double>(tally[t].graded);
        tr.mean_loss = tally[t].loss_sum / static_cast<double>(tally[t].graded);
        report.tasks.push_back(std::move(tr));
    }
    report.wall_seconds = seconds_since(t0);
    return report;
}

}  // namespace

EvalReport evaluate(const MtocSystem& sys, const Dataset& data, int trials, std::uint64_t seed) {
    return run_eval(sys, data, trials, seed, {});
}

EvalReport evaluate_serving(const MtocSystem& sys, const Dataset& data, int trials,
                            std::uint64_t seed, std::span<const TaskSpec> serve_tasks) {
    if (serve_tasks.empty()) throw ConfigError("evaluate_serving: no tasks to serve");
    return run_eval(sys, data, trials, seed, serve_tasks);
}

std::pair<MtocSystem, TrainResult> train_stoc_baseline(ConfigId cfg, int n_c,
                                                       const TaskSpec& task,
                                                       const ChannelConfig& channel,
                                                       const Dataset& data,
                                                       const TrainConfig& train_cfg,
                                                       std::uint64_t system_seed) {
    MtocSystem sys = assemble(cfg, n_c, {{channel, task, 1.0}}, system_seed);
    TrainConfig stoc_cfg = train_cfg;
    stoc_cfg.mode = TrainMode::STOC;
    TrainResult result = train(sys, data, stoc_cfg);
    return {std::move(sys), std::move(result)};
}

}  // namespace mtoc

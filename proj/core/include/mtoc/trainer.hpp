#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtoc/data.hpp"
#include "mtoc/model.hpp"
#include "mtoc/nn.hpp"
#include "mtoc/tasks.hpp"

namespace mtoc {

enum class TrainMode : std::uint8_t { MTOC, STOC };

struct TrainConfig {
    int epochs = 10;
    int batch_size = 64;
    AdamConfig adam{};
    std::uint64_t seed = 0;             // shuffle/dropout streams derive from this
    std::int64_t max_train_samples = 0; // 0 = full split; desk preset truncates
    TrainMode mode = TrainMode::MTOC;   // STOC asserts a single nonzero-weight path

    void validate() const;
};

struct TrainResult {
    std::vector<double> loss_trajectory;  // joint loss, one entry per batch
    double wall_seconds = 0.0;
};

/// L_joint = Σ w_i · L_i.
double joint_loss(std::span<const double> task_losses, std::span<const double> weights);

/// Joint training: per batch, one encoder pass + power normalization, a
/// fresh channel realization and decoder pass per receiver, fused
/// softmax-CE per task, then Adam on the encoder (w_i-weighted gradient
/// sum through the channels) and on every nonzero-weight decoder.
/// Zero-weight paths are never stepped, so their decoders stay bit-equal
/// to initialization.
TrainResult train(MtocSystem& sys, const Dataset& data, const TrainConfig& cfg);

struct TaskReport {
    std::string task_id;
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

struct EvalReport {
    std::vector<TaskReport> tasks;
    int channel_uses_per_image = 0;
    double wall_seconds = 0.0;
};

/// Inference-mode accuracy/loss on the test split, averaged over `trials`
/// independent channel draws per sample. Never mutates parameters.
EvalReport evaluate(const MtocSystem& sys, const Dataset& data, int trials,
                    std::uint64_t seed);

/// Grades a single-receiver (STOC) system against each of `serve_tasks`,
/// reusing the one trained decoder's predictions; channel accounting is
/// n_c per task served, i.e. |serve_tasks|·n_c per image.
EvalReport evaluate_serving(const MtocSystem& sys, const Dataset& data, int trials,
                            std::uint64_t seed, std::span<const TaskSpec> serve_tasks);

/// Independent encoder+decoder trained end-to-end for one task. With the
/// same base seed, a 2-receiver MTOC system with w=(1,0) and this baseline
/// for task 1 share their encoder parameter trajectory bit-for-bit.
std::pair<MtocSystem, TrainResult> train_stoc_baseline(ConfigId cfg, int n_c,
                                                       const TaskSpec& task,
                                                       const ChannelConfig& channel,
                                                       const Dataset& data,
                                                       const TrainConfig& train_cfg,
                                                       std::uint64_t system_seed);

}  // namespace mtoc

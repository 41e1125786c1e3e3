#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtoc/data.hpp"
#include "mtoc/trainer.hpp"

namespace mtoc {

enum class Preset : std::uint8_t { Desk, Full };

Preset parse_preset(std::string_view name);  // "desk" | "full"
std::string preset_name(Preset p);

/// One fully resolved experiment description; the unit every sweep row is
/// derived from. Call resolve() once after filling it in.
struct ExperimentConfig {
    DatasetId dataset = DatasetId::MNIST;
    int n_c = 20;                     // paper default
    std::vector<double> snr_db;       // per receiver; size-1 broadcasts; default {3.0}
    std::vector<double> weights;      // per receiver; default equal split
    int receivers = 2;
    TrainMode mode = TrainMode::MTOC;
    std::vector<std::string> tasks;   // task tokens; empty = dataset defaults / windows
    int epochs = 0;                   // 0 = preset default
    int batch_size = 64;
    int eval_trials = 10;
    std::uint64_t seed = 1;
    Preset preset = Preset::Desk;
    std::filesystem::path data_dir;

    /// Fills defaults (SNR broadcast, weights, window tasks for n>2, preset
    /// epochs/sample cap) and validates the result.
    void resolve();

    bool resolved = false;
    std::int64_t max_train_samples = 0;  // set by resolve() from preset
};

/// One sweep row flattened for the CSV: per-task outputs plus the resolved
/// inputs that produced them.
struct RunRow {
    std::string dataset;
    std::string mode;
    int n = 0;
    int n_c = 0;
    std::string snr_db_list;  // ';'-joined
    std::string weight_list;  // ';'-joined
    std::uint64_t seed = 0;
    int epochs = 0;
    std::vector<TaskReport> tasks;
    int channel_uses = 0;
    double wall_s = 0.0;
    std::string error;  // nonempty = failed row (kept, marked, never dropped)
};

struct SweepResult {
    std::vector<RunRow> rows;
};

/// Trains + evaluates one row at `row_seed`. MTOC: one joint system. STOC:
/// one independent encoder+decoder per task, each reported with the
/// all-tasks channel cost n·n_c.
RunRow run_single(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t row_seed);

SweepResult sweep_snr(const ExperimentConfig& base, const Dataset& data,
                      std::span<const double> snr_list);
SweepResult sweep_nc(const ExperimentConfig& base, const Dataset& data,
                     std::span<const int> nc_list);
/// Receiver 2 pinned at 3 dB, receiver 1 swept.
SweepResult sweep_asymmetric(const ExperimentConfig& base, const Dataset& data,
                             std::span<const double> varying_snr);
/// w = (w1, 1−w1).
SweepResult sweep_weights(const ExperimentConfig& base, const Dataset& data,
                          std::span<const double> w1_list);
/// Per n: MTOC over window tasks 1..n at equal weights, and an STOC row
/// trained on window 1 but graded on all n windows; both carry an "avg"
/// pseudo-task with the receiver-averaged accuracy.
SweepResult sweep_receivers(const ExperimentConfig& base, const Dataset& data,
                            std::span<const int> n_list);

inline constexpr const char* kCsvHeader =
    "dataset,mode,n,n_c,snr_db_list,weights,task_id,accuracy,loss,channel_uses,seed,epochs,"
    "wall_s";

/// Writes the CSV (one line per task per row) next to a JSON manifest
/// (same path, ".manifest.json" extension) recording version, resolved
/// config, a config hash, and dataset file hashes.
void emit(const SweepResult& results, const ExperimentConfig& base,
          const std::filesystem::path& csv_path);

/// Shortest round-trip decimal formatting (std::to_chars), so equal doubles
/// always print identically.
std::string format_double(double v);

}  // namespace mtoc

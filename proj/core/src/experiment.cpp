#include "mtoc/experiment.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mtoc/errors.hpp"
#include "mtoc/version.hpp"

namespace mtoc {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string format_fixed3(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    return std::string(buf, res.ptr);
}

std::string join(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += format_double(values[i]);
    }
    return out;
}

std::string mode_name(TrainMode m) { return m == TrainMode::MTOC ? "mtoc" : "stoc"; }

ChannelConfig channel_at(double snr_db) {
    ChannelConfig cfg;
    cfg.snr_db = snr_db;
    return cfg;
}

TrainConfig train_config(const ExperimentConfig& cfg, std::uint64_t row_seed) {
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.seed = row_seed;
    tc.max_train_samples = cfg.max_train_samples;
    tc.mode = cfg.mode;
    return tc;
}

std::vector<TaskSpec> resolve_tasks(const ExperimentConfig& cfg) {
    std::vector<TaskSpec> tasks;
    tasks.reserve(cfg.tasks.size());
    for (const auto& token : cfg.tasks) tasks.push_back(parse_task(cfg.dataset, token));
    return tasks;
}

TaskReport average_report(std::span<const TaskReport> tasks) {
    TaskReport avg;
    avg.task_id = "avg";
    for (const auto& t : tasks) {
        avg.accuracy += t.accuracy;
        avg.mean_loss += t.mean_loss;
    }
    avg.accuracy /= static_cast<double>(tasks.size());
    avg.mean_loss /= static_cast<double>(tasks.size());
    return avg;
}

std::string sanitize_cell(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

std::uint32_t crc32_of(const std::string& s) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(s.data()),
              static_cast<uInt>(s.size())));
}

std::vector<std::string> dataset_file_names(DatasetId id) {
    if (id == DatasetId::CIFAR10)
        return {"data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin",
                "data_batch_4.bin", "data_batch_5.bin", "test_batch.bin"};
    return {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
            "t10k-labels-idx1-ubyte"};
}

}  // namespace

Preset parse_preset(std::string_view name) {
    if (name == "desk") return Preset::Desk;
    if (name == "full") return Preset::Full;
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk|full)");
}

std::string preset_name(Preset p) { return p == Preset::Desk ? "desk" : "full"; }

void ExperimentConfig::resolve() {
    if (receivers < 1) throw ConfigError("config: receivers must be >= 1");
    if (n_c < 2) throw ConfigError("config: n_c must be >= 2");
    if (batch_size < 1) throw ConfigError("config: batch must be >= 1");
    if (eval_trials < 1) throw ConfigError("config: eval trials must be >= 1");

    if (snr_db.empty()) snr_db = {3.0};
    if (snr_db.size() == 1 && receivers > 1)
        snr_db.assign(static_cast<std::size_t>(receivers), snr_db[0]);
    if (snr_db.size() != static_cast<std::size_t>(receivers))
        throw ConfigError("config: " + std::to_string(snr_db.size()) + " SNR values for " +
                          std::to_string(receivers) + " receivers");

    if (weights.empty())
        weights.assign(static_cast<std::size_t>(receivers), 1.0 / receivers);
    if (weights.size() != static_cast<std::size_t>(receivers))
        throw ConfigError("config: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(receivers) + " receivers");
    for (double w : weights)
        if (!(w >= 0.0 && w <= 1.0))
            throw ConfigError("config: weight " + format_double(w) + " outside [0,1]");

    if (tasks.empty()) {
        if (receivers == 2) {
            for (const auto& t : default_tasks(dataset)) tasks.push_back(t.id);
        } else {
            for (int i = 1; i <= receivers; ++i) tasks.push_back("window:" + std::to_string(i));
        }
    }
    if (tasks.size() != static_cast<std::size_t>(receivers))
        throw ConfigError("config: " + std::to_string(tasks.size()) + " tasks for " +
                          std::to_string(receivers) + " receivers");
    for (const auto& t : tasks) parse_task(dataset, t);  // validate tokens now

    if (epochs == 0)
        epochs = (preset == Preset::Desk) ? 3 : (dataset == DatasetId::CIFAR10 ? 20 : 10);
    if (epochs < 1) throw ConfigError("config: epochs must be >= 1");
    max_train_samples = (preset == Preset::Desk) ? 10000 : 0;
    resolved = true;
}

RunRow run_single(const ExperimentConfig& cfg, const Dataset& data, std::uint64_t row_seed) {
    if (!cfg.resolved) throw StateError("run_single: config not resolved");
    if (data.id != cfg.dataset)
        throw ConfigError("run_single: dataset mismatch (config " + dataset_name(cfg.dataset) +
                          ", loaded " + dataset_name(data.id) + ")");

    RunRow row;
    row.dataset = dataset_name(cfg.dataset);
    row.mode = mode_name(cfg.mode);
    row.n = cfg.receivers;
    row.n_c = cfg.n_c;
    row.snr_db_list = join(cfg.snr_db);
    row.weight_list = join(cfg.weights);
    row.seed = row_seed;
    row.epochs = cfg.epochs;

    try {
        const auto tasks = resolve_tasks(cfg);
        const ConfigId model_cfg = config_for(cfg.dataset);
        if (cfg.mode == TrainMode::MTOC) {
            std::vector<ReceiverSpec> specs;
            specs.reserve(tasks.size());
            for (std::size_t i = 0; i < tasks.size(); ++i)
                specs.push_back({channel_at(cfg.snr_db[i]), tasks[i], cfg.weights[i]});
            MtocSystem sys = assemble(model_cfg, cfg.n_c, specs, row_seed);
            const TrainResult tr = train(sys, data, train_config(cfg, row_seed));
            const EvalReport ev =
                evaluate(sys, data, cfg.eval_trials, derive_seed(row_seed, "eval"));
            row.tasks = ev.tasks;
            row.channel_uses = ev.channel_uses_per_image;
            row.wall_s = tr.wall_seconds + ev.wall_seconds;
        } else {
            // STOC: an independent system per task; the reported channel cost
            // is what serving all n receivers would take.
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                auto [sys, tr] = train_stoc_baseline(model_cfg, cfg.n_c, tasks[i],
                                                     channel_at(cfg.snr_db[i]), data,
                                                     train_config(cfg, row_seed), row_seed);
                const EvalReport ev = evaluate(sys, data, cfg.eval_trials,
                                               derive_seed(row_seed, "eval", i));
                row.tasks.push_back(ev.tasks.at(0));
                row.wall_s += tr.wall_seconds + ev.wall_seconds;
            }
            row.channel_uses = cfg.receivers * cfg.n_c;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

SweepResult sweep_snr(const ExperimentConfig& base, const Dataset& data,
                      std::span<const double> snr_list) {
    if (snr_list.empty()) throw ConfigError("sweep_snr: empty SNR list");
    SweepResult out;
    for (std::size_t r = 0; r < snr_list.size(); ++r) {
        ExperimentConfig cfg = base;
        cfg.snr_db = {snr_list[r]};
        cfg.resolved = false;
        cfg.resolve();
        out.rows.push_back(run_single(cfg, data, base.seed ^ r));
    }
    return out;
}

SweepResult sweep_nc(const ExperimentConfig& base, const Dataset& data,
                     std::span<const int> nc_list) {
    if (nc_list.empty()) throw ConfigError("sweep_nc: empty n_c list");
    SweepResult out;
    for (std::size_t r = 0; r < nc_list.size(); ++r) {
        if (nc_list[r] < 2) throw ConfigError("sweep_nc: n_c must be >= 2");
        ExperimentConfig cfg = base;
        cfg.n_c = nc_list[r];
        cfg.resolved = false;
        cfg.resolve();
        out.rows.push_back(run_single(cfg, data, base.seed ^ r));
    }
    return out;
}

SweepResult sweep_asymmetric(const ExperimentConfig& base, const Dataset& data,
                             std::span<const double> varying_snr) {
    if (varying_snr.empty()) throw ConfigError("sweep_asymmetric: empty SNR list");
    if (base.receivers != 2)
        throw ConfigError("sweep_asymmetric: exactly 2 receivers required");
    SweepResult out;
    for (std::size_t r = 0; r < varying_snr.size(); ++r) {
        ExperimentConfig cfg = base;
        cfg.snr_db = {varying_snr[r], 3.0};
        cfg.resolved = false;
        cfg.resolve();
        out.rows.push_back(run_single(cfg, data, base.seed ^ r));
    }
    return out;
}

SweepResult sweep_weights(const ExperimentConfig& base, const Dataset& data,
                          std::span<const double> w1_list) {
    if (w1_list.empty()) throw ConfigError("sweep_weights: empty weight list");
    if (base.receivers != 2) throw ConfigError("sweep_weights: exactly 2 receivers required");
    SweepResult out;
    for (std::size_t r = 0; r < w1_list.size(); ++r) {
        const double w1 = w1_list[r];
        if (!(w1 >= 0.0 && w1 <= 1.0))
            throw ConfigError("sweep_weights: w1 " + format_double(w1) + " outside [0,1]");
        ExperimentConfig cfg = base;
        cfg.weights = {w1, 1.0 - w1};
        cfg.resolved = false;
        cfg.resolve();
        out.rows.push_back(run_single(cfg, data, base.seed ^ r));
    }
    return out;
}

SweepResult sweep_receivers(const ExperimentConfig& base, const Dataset& data,
                            std::span<const int> n_list) {
    if (n_list.empty()) throw ConfigError("sweep_receivers: empty receiver list");
    SweepResult out;
    std::size_t row_index = 0;
    for (const int n : n_list) {
        if (n < 2) throw ConfigError("sweep_receivers: n must be >= 2");

        ExperimentConfig mtoc = base;
        mtoc.receivers = n;
        mtoc.mode = TrainMode::MTOC;
        mtoc.tasks.clear();
        mtoc.weights.clear();
        mtoc.snr_db = {base.snr_db.empty() ? 3.0 : base.snr_db[0]};
        mtoc.resolved = false;
        mtoc.resolve();
        // force window tasks even at n=2, where resolve() defaults to the
        // named pair
        mtoc.tasks.clear();
        for (int i = 1; i <= n; ++i) mtoc.tasks.push_back("window:" + std::to_string(i));
        RunRow mrow = run_single(mtoc, data, base.seed ^ row_index);
        if (mrow.error.empty()) mrow.tasks.push_back(average_report(mrow.tasks));
        out.rows.push_back(std::move(mrow));
        ++row_index;

        // STOC: train window 1 only, grade it on every receiver's window.
        const std::uint64_t row_seed = base.seed ^ row_index;
        RunRow srow;
        srow.dataset = dataset_name(base.dataset);
        srow.mode = "stoc";
        srow.n = n;
        srow.n_c = mtoc.n_c;
        srow.snr_db_list = format_double(mtoc.snr_db[0]);
        srow.weight_list = "1";
        srow.seed = row_seed;
        srow.epochs = mtoc.epochs;
        try {
            std::vector<TaskSpec> windows;
            windows.reserve(static_cast<std::size_t>(n));
            for (int i = 1; i <= n; ++i) windows.push_back(window_task(base.dataset, i));
            TrainConfig tc = train_config(mtoc, row_seed);
            tc.mode = TrainMode::STOC;
            auto [sys, tr] =
                train_stoc_baseline(config_for(base.dataset), mtoc.n_c, windows[0],
                                    channel_at(mtoc.snr_db[0]), data, tc, row_seed);
            const EvalReport ev = evaluate_serving(sys, data, mtoc.eval_trials,
                                                   derive_seed(row_seed, "eval"), windows);
            srow.tasks = ev.tasks;
            srow.tasks.push_back(average_report(ev.tasks));
            srow.channel_uses = ev.channel_uses_per_image;
            srow.wall_s = tr.wall_seconds + ev.wall_seconds;
        } catch (const std::exception& e) {
            srow.error = e.what();
        }
        out.rows.push_back(std::move(srow));
        ++row_index;
    }
    return out;
}

void emit(const SweepResult& results, const ExperimentConfig& base, const fs::path& csv_path) {
    if (!csv_path.parent_path().empty()) fs::create_directories(csv_path.parent_path());
    std::ofstream os(csv_path, std::ios::trunc);
    if (!os) throw IoError("cannot write " + csv_path.string());
    os << kCsvHeader << '\n';
    for (const auto& row : results.rows) {
        const std::string prefix = row.dataset + "," + row.mode + "," + std::to_string(row.n) +
                                   "," + std::to_string(row.n_c) + "," + row.snr_db_list + "," +
                                   row.weight_list + ",";
        const std::string suffix = "," + std::to_string(row.seed) + "," +
                                   std::to_string(row.epochs) + "," + format_fixed3(row.wall_s);
        if (!row.error.empty()) {
            os << prefix << "error: " << sanitize_cell(row.error) << ",,," << suffix << '\n';
            continue;
        }
        for (const auto& t : row.tasks)
            os << prefix << t.task_id << "," << format_double(t.accuracy) << ","
               << format_double(t.mean_loss) << "," << row.channel_uses << suffix << '\n';
    }
    if (!os) throw IoError("write failed for " + csv_path.string());
    os.close();

    nlohmann::json cfg_json;
    cfg_json["dataset"] = dataset_name(base.dataset);
    cfg_json["mode"] = mode_name(base.mode);
    cfg_json["n_c"] = base.n_c;
    cfg_json["receivers"] = base.receivers;
    cfg_json["snr_db"] = base.snr_db;
    cfg_json["weights"] = base.weights;
    cfg_json["tasks"] = base.tasks;
    cfg_json["epochs"] = base.epochs;
    cfg_json["batch_size"] = base.batch_size;
    cfg_json["eval_trials"] = base.eval_trials;
    cfg_json["seed"] = base.seed;
    cfg_json["preset"] = preset_name(base.preset);
    cfg_json["max_train_samples"] = base.max_train_samples;

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["csv"] = csv_path.filename().string();
    manifest["config"] = cfg_json;
    manifest["config_crc32"] = crc32_of(cfg_json.dump());
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : results.rows) {
        nlohmann::json r;
        r["seed"] = row.seed;
        r["mode"] = row.mode;
        r["n"] = row.n;
        r["n_c"] = row.n_c;
        if (!row.error.empty()) r["error"] = row.error;
        rows.push_back(std::move(r));
    }
    manifest["rows"] = std::move(rows);

    nlohmann::json files = nlohmann::json::object();
    if (!base.data_dir.empty()) {
        for (const auto& name : dataset_file_names(base.dataset)) {
            fs::path p = base.data_dir / name;
            if (!fs::exists(p)) {
                fs::path gz = p;
                gz += ".gz";
                if (!fs::exists(gz)) continue;
                p = gz;
            }
            nlohmann::json f;
            f["crc32"] = file_crc32(p);
            f["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
            files[p.filename().string()] = std::move(f);
        }
    }
    manifest["dataset_files"] = std::move(files);

    fs::path mpath = csv_path;
    mpath.replace_extension(".manifest.json");
    std::ofstream ms(mpath, std::ios::trunc);
    if (!ms) throw IoError("cannot write " + mpath.string());
    ms << manifest.dump(2) << '\n';
}

}  // namespace mtoc

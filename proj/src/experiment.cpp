#include "binbias/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "binbias/binning.hpp"
#include "binbias/csv.hpp"
#include "binbias/datagen.hpp"
#include "binbias/rng.hpp"

namespace binbias {

namespace {

namespace fs = std::filesystem;

struct TaskData {
    std::size_t input_dim = 1;
    Batch reg_train, reg_val;
    Batch cls_train, cls_val;
    std::vector<double> decode_midpoints;
    SeedData snapshot;
    std::vector<double> r_reg, r_class;
};

Batch to_batch_1d(const SortedDataset& data) {
    Batch batch;
    batch.inputs = Matrix(data.n(), 1);
    batch.targets = Matrix(data.n(), 1);
    for (std::size_t i = 0; i < data.n(); ++i) {
        batch.inputs(i, 0) = data.xs[i];
        batch.targets(i, 0) = data.ys[i];
    }
    batch.real_values = data.ys;
    return batch;
}

void attach_class_labels(Batch& batch, const std::vector<double>& ys, const BinSpec& bins) {
    batch.targets = Matrix();
    batch.labels.clear();
    for (double y : ys) batch.labels.push_back(encode(y, bins));
}

TaskData make_task_1d(const ExperimentConfig& config, const SortedDataset& train,
                      const SortedDataset& val) {
    TaskData task;
    task.input_dim = 1;
    const BinSpec bins = make_uniform_bins(config.k);
    task.decode_midpoints = bins.midpoints;

    task.reg_train = to_batch_1d(train);
    task.reg_val = to_batch_1d(val);
    task.cls_train = task.reg_train;
    task.cls_val = task.reg_val;
    attach_class_labels(task.cls_train, train.ys, bins);
    attach_class_labels(task.cls_val, val.ys, bins);

    task.r_reg = compute_r_reg(train).points;
    SortedDataset binned{train.xs, {}};
    for (int label : task.cls_train.labels) binned.ys.push_back(label);
    task.r_class = compute_r_class(binned).points;

    task.snapshot.columns = {"x", "y"};
    for (std::size_t i = 0; i < train.n(); ++i)
        task.snapshot.train_rows.push_back({train.xs[i], train.ys[i]});
    for (std::size_t i = 0; i < val.n(); ++i)
        task.snapshot.val_rows.push_back({val.xs[i], val.ys[i]});
    return task;
}

TaskData make_task_data(const ExperimentConfig& config, std::uint64_t seed) {
    switch (config.task) {
        case TaskKind::Triangles1d: {
            const TeacherSpec teacher = default_triangle_teacher();
            const auto train = sample_stratified_1d(teacher, config.n, config.k,
                                                    derive_seed(seed, "train"));
            const auto val = sample_stratified_1d(teacher, config.n, config.k,
                                                  derive_seed(seed, "val"));
            return make_task_1d(config, train, val);
        }
        case TaskKind::CustomCsv: {
            const auto table = read_csv(config.custom_data);
            const int cx = table.column("x");
            const int cy = table.column("y");
            if (cx < 0 || cy < 0)
                throw std::runtime_error("experiment: custom csv needs x,y columns");
            std::vector<double> xs, ys;
            for (const auto& row : table.rows) {
                xs.push_back(row[cx]);
                ys.push_back(row[cy]);
            }
            const auto nd = normalize_domain(xs, ys);
            return make_task_1d(config, nd.data, nd.data);
        }
        case TaskKind::Grid2d: {
            const TeacherSpec teacher =
                random_network_teacher(config.teacher_hidden, config.teacher_seed);
            const auto grid = sample_grid_2d(teacher, config.grid_side, config.k);
            TaskData task;
            task.input_dim = 2;
            const BinSpec bins = make_uniform_bins(config.k);
            task.decode_midpoints = bins.midpoints;

            Batch train;
            train.inputs = grid.inputs;
            train.targets = Matrix(grid.ys.size(), 1);
            for (std::size_t i = 0; i < grid.ys.size(); ++i) train.targets(i, 0) = grid.ys[i];
            train.real_values = grid.ys;

            // validation: uniform random points labelled by the teacher,
            // normalized with the training grid's min-max record
            Batch val;
            Rng rng(derive_seed(seed, "val2d"));
            const std::size_t n_val = grid.ys.size();
            val.inputs = Matrix(n_val, 2);
            val.targets = Matrix(n_val, 1);
            for (std::size_t i = 0; i < n_val; ++i) {
                const double x1 = rng.uniform(-1.0, 1.0);
                const double x2 = rng.uniform(-1.0, 1.0);
                val.inputs(i, 0) = x1;
                val.inputs(i, 1) = x2;
                double y = teacher.eval2d_raw(x1, x2);
                y = grid.y_span == 0.0 ? 0.0 : (y - grid.y_lo) / grid.y_span;
                y = std::clamp(y, 0.0, 1.0);
                val.targets(i, 0) = y;
                val.real_values.push_back(y);
            }

            task.reg_train = train;
            task.reg_val = val;
            task.cls_train = train;
            task.cls_val = val;
            attach_class_labels(task.cls_train, train.real_values, bins);
            attach_class_labels(task.cls_val, val.real_values, bins);

            task.snapshot.columns = {"x1", "x2", "y"};
            for (std::size_t i = 0; i < train.inputs.rows; ++i)
                task.snapshot.train_rows.push_back(
                    {train.inputs(i, 0), train.inputs(i, 1), train.real_values[i]});
            for (std::size_t i = 0; i < val.inputs.rows; ++i)
                task.snapshot.val_rows.push_back(
                    {val.inputs(i, 0), val.inputs(i, 1), val.real_values[i]});
            return task;
        }
    }
    throw std::logic_error("experiment: unknown task kind");
}

SeedArmResult run_arm(const ExperimentConfig& config, const TaskData& task,
                      std::uint64_t seed, const ArmSpec& arm, LossKind loss) {
    SeedArmResult result;
    result.seed = seed;
    const bool is_class = loss == LossKind::CrossEntropy;
    std::vector<std::size_t> widths;
    widths.push_back(task.input_dim);
    for (std::size_t h : arm.hidden) widths.push_back(h);
    widths.push_back(is_class ? static_cast<std::size_t>(config.k) : 1);

    const Mlp model = init_he(widths, derive_seed(seed, is_class ? "class-init" : "reg-init"));

    TrainConfig tc;
    tc.loss = loss;
    tc.lr_grid = arm.lr_grid;
    tc.seed = seed;
    tc.patience = config.patience;
    tc.max_epochs = config.max_epochs;
    tc.record_gradients = config.record_gradients;
    if (is_class) tc.decode_midpoints = task.decode_midpoints;

    const Batch& train_set = is_class ? task.cls_train : task.reg_train;
    const Batch& val_set = is_class ? task.cls_val : task.reg_val;
    TrainResult tr = train(model, train_set, val_set, tc);

    result.rmse = tr.best_val_rmse;
    result.selected_lr = tr.selected_lr;
    result.epochs = tr.epochs;
    result.best_epoch = tr.best_epoch;
    if (tr.recorded_gradients.size() >= 2) {
        result.max_grad_angle = max_gradient_angle(tr.recorded_gradients);
        if (config.write_angle_csv) {
            const int stride = tr.recorded_gradients.size() > 200 ? 10 : 1;
            const Matrix full = gradient_angles(tr.recorded_gradients);
            Matrix down((full.rows + stride - 1) / stride, (full.cols + stride - 1) / stride);
            for (std::size_t i = 0; i < down.rows; ++i)
                for (std::size_t j = 0; j < down.cols; ++j)
                    down(i, j) = full(i * stride, j * stride);
            result.angles = std::move(down);
        }
    } else {
        result.max_grad_angle = std::nan("");
    }
    tr.recorded_gradients.clear();
    tr.recorded_gradients.shrink_to_fit();

    if (task.input_dim == 1 && tr.best_model.layers.size() == 2)
        result.kinks = extract_kinks(tr.best_model, config.mass_threshold);
    if (task.input_dim == 2 && tr.best_model.layers.size() == 2)
        result.lines = critical_lines(tr.best_model, config.mass_threshold);
    return result;
}

void finalize_arm(ArmReport& arm) {
    const auto rmses = arm.ok_rmses();
    if (!rmses.empty()) arm.stats = rmse_stats(rmses);
}

} // namespace

std::vector<double> ArmReport::ok_rmses() const {
    std::vector<double> out;
    for (const auto& r : per_seed)
        if (r.ok()) out.push_back(r.rmse);
    return out;
}

int ArmReport::worst_seed_index() const {
    int worst = -1;
    for (std::size_t i = 0; i < per_seed.size(); ++i) {
        if (!per_seed[i].ok()) continue;
        if (worst < 0 || per_seed[i].rmse > per_seed[worst].rmse)
            worst = static_cast<int>(i);
    }
    return worst;
}

ExperimentConfig desk_preset() {
    ExperimentConfig config;
    config.name = "desk";
    config.reg_arm = {{2000}, {0.003, 0.01, 0.03}};
    config.class_arm = {{100}, {0.03, 0.1, 0.3}};
    config.patience = 300;
    config.max_epochs = 30000;
    return config;
}

ExperimentConfig paper_preset() {
    ExperimentConfig config;
    config.name = "paper";
    config.reg_arm = {{10000}, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1}};
    config.class_arm = {{500}, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1}};
    config.patience = 1000;
    config.max_epochs = 200000;
    config.seeds.clear();
    for (std::uint64_t s = 1; s <= 30; ++s) config.seeds.push_back(s);
    return config;
}

ExperimentConfig depth3_preset() {
    ExperimentConfig config;
    config.name = "depth3";
    config.reg_arm = {{1000, 250}, {0.01, 0.03}};
    config.class_arm = {};
    config.patience = 300;
    config.max_epochs = 6000;
    config.record_gradients = 0;
    return config;
}

ExperimentConfig grid2d_preset() {
    ExperimentConfig config;
    config.name = "grid2d";
    config.task = TaskKind::Grid2d;
    config.n = 625;
    config.k = 25;
    config.grid_side = 25;
    config.seeds = {1, 2, 3, 4, 5};
    config.reg_arm = {{500}, {0.01, 0.03}};
    config.class_arm = {{500}, {0.03, 0.1}};
    config.patience = 300;
    config.max_epochs = 8000;
    config.record_gradients = 0;
    return config;
}

ExperimentConfig config_from_flat(const FlatConfig& flat) {
    const std::string preset = flat.get_string("preset", "desk");
    ExperimentConfig config;
    if (preset == "desk")
        config = desk_preset();
    else if (preset == "paper")
        config = paper_preset();
    else if (preset == "depth3")
        config = depth3_preset();
    else if (preset == "grid2d")
        config = grid2d_preset();
    else
        throw std::runtime_error("experiment: unknown preset '" + preset + "'");

    const std::string task = flat.get_string("task", "");
    if (task == "triangles-1d")
        config.task = TaskKind::Triangles1d;
    else if (task == "grid-2d")
        config.task = TaskKind::Grid2d;
    else if (task == "custom")
        config.task = TaskKind::CustomCsv;
    else if (!task.empty())
        throw std::runtime_error("experiment: unknown task '" + task + "'");

    config.custom_data = flat.get_string("custom_data", config.custom_data);
    config.n = static_cast<int>(flat.get_long("n", config.n));
    config.k = static_cast<int>(flat.get_long("k", config.k));
    config.grid_side = static_cast<int>(flat.get_long("grid_side", config.grid_side));
    config.teacher_hidden =
        static_cast<int>(flat.get_long("teacher_hidden", config.teacher_hidden));
    config.teacher_seed = flat.get_u64("teacher_seed", config.teacher_seed);
    config.seeds = flat.get_u64s("seeds", config.seeds);
    const auto to_widths = [](const std::vector<double>& vals) {
        std::vector<std::size_t> out;
        for (double v : vals) out.push_back(static_cast<std::size_t>(v));
        return out;
    };
    if (flat.has("reg_hidden"))
        config.reg_arm.hidden = to_widths(flat.get_doubles("reg_hidden", {}));
    if (flat.has("class_hidden"))
        config.class_arm.hidden = to_widths(flat.get_doubles("class_hidden", {}));
    config.reg_arm.lr_grid = flat.get_doubles("reg_lr_grid", config.reg_arm.lr_grid);
    config.class_arm.lr_grid = flat.get_doubles("class_lr_grid", config.class_arm.lr_grid);
    config.patience = flat.get_long("patience", config.patience);
    config.max_epochs = flat.get_long("max_epochs", config.max_epochs);
    config.record_gradients =
        static_cast<int>(flat.get_long("record_gradients", config.record_gradients));
    config.workers = static_cast<int>(flat.get_long("workers", config.workers));
    config.mass_threshold = flat.get_double("mass_threshold", config.mass_threshold);
    config.out_dir = flat.get_string("out", config.out_dir);
    config.write_data_csv = flat.get_bool("write_data_csv", config.write_data_csv);
    config.write_angle_csv = flat.get_bool("write_angle_csv", config.write_angle_csv);
    return config;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.seeds.empty()) throw std::invalid_argument("experiment: no seeds");
    const bool run_reg = !config.reg_arm.hidden.empty();
    const bool run_cls = !config.class_arm.hidden.empty();
    if (run_reg && config.reg_arm.lr_grid.empty())
        throw std::invalid_argument("experiment: empty regression sweep grid");
    if (run_cls && config.class_arm.lr_grid.empty())
        throw std::invalid_argument("experiment: empty classification sweep grid");

    ExperimentReport report;
    report.config = config;
    report.regression.loss = "square";
    report.classification.loss = "cross-entropy";
    const std::size_t n_seeds = config.seeds.size();
    report.seed_data.resize(n_seeds);
    report.r_reg_points.resize(n_seeds);
    report.r_class_points.resize(n_seeds);
    if (run_reg) report.regression.per_seed.resize(n_seeds);
    if (run_cls) report.classification.per_seed.resize(n_seeds);

    struct Job {
        std::size_t seed_idx;
        bool classification;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < n_seeds; ++i) {
        if (run_reg) jobs.push_back({i, false});
        if (run_cls) jobs.push_back({i, true});
    }

    const auto run_job = [&](const Job& job) {
        const std::uint64_t seed = config.seeds[job.seed_idx];
        SeedArmResult& slot = job.classification
                                  ? report.classification.per_seed[job.seed_idx]
                                  : report.regression.per_seed[job.seed_idx];
        slot.seed = seed;
        try {
            const TaskData task = make_task_data(config, seed);
            if (!job.classification || !run_reg) {
                // first arm for this seed records the shared data artifacts
                report.seed_data[job.seed_idx] = task.snapshot;
                report.r_reg_points[job.seed_idx] = task.r_reg;
                report.r_class_points[job.seed_idx] = task.r_class;
            }
            const ArmSpec& arm = job.classification ? config.class_arm : config.reg_arm;
            const LossKind loss =
                job.classification ? LossKind::CrossEntropy : LossKind::Square;
            slot = run_arm(config, task, seed, arm, loss);
        } catch (const std::exception& err) {
            slot.status = err.what();
        }
    };

    unsigned workers = config.workers > 0
                           ? static_cast<unsigned>(config.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, jobs.size());
    if (workers <= 1) {
        for (const auto& job : jobs) run_job(job);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs.size()) break;
                    run_job(jobs[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    if (run_reg) finalize_arm(report.regression);
    if (run_cls) finalize_arm(report.classification);

    const auto reg_rmses = report.regression.ok_rmses();
    const auto cls_rmses = report.classification.ok_rmses();
    if (run_reg && run_cls && !reg_rmses.empty() && !cls_rmses.empty()) {
        report.has_verdict = true;
        report.best_reg_rmse = *std::min_element(reg_rmses.begin(), reg_rmses.end());
        report.worst_class_rmse = *std::max_element(cls_rmses.begin(), cls_rmses.end());
        report.binning_phenomenon = report.worst_class_rmse < report.best_reg_rmse;
        report.mean_ratio = report.classification.stats.mean > 0.0
                                ? report.regression.stats.mean / report.classification.stats.mean
                                : std::numeric_limits<double>::infinity();
    }
    return report;
}

namespace {

nlohmann::json arm_to_json(const ArmReport& arm, const std::string& arm_dir) {
    nlohmann::json j;
    j["loss"] = arm.loss;
    j["per_seed"] = nlohmann::json::array();
    for (std::size_t i = 0; i < arm.per_seed.size(); ++i) {
        const auto& r = arm.per_seed[i];
        nlohmann::json s;
        s["seed"] = r.seed;
        s["status"] = r.status;
        if (r.ok()) {
            s["rmse"] = r.rmse;
            s["selected_lr"] = r.selected_lr;
            s["epochs"] = r.epochs;
            s["best_epoch"] = r.best_epoch;
            if (std::isfinite(r.max_grad_angle)) s["max_grad_angle"] = r.max_grad_angle;
            if (!r.kinks.neurons.empty())
                s["kinks_csv"] = arm_dir + "/seed" + std::to_string(r.seed) + "_kinks.csv";
            if (!r.lines.empty())
                s["lines_csv"] = arm_dir + "/seed" + std::to_string(r.seed) + "_lines.csv";
            if (r.angles.rows > 0)
                s["angles_csv"] = arm_dir + "/seed" + std::to_string(r.seed) + "_angles.csv";
        }
        j["per_seed"].push_back(s);
    }
    if (!arm.per_seed.empty()) {
        const auto rmses = arm.ok_rmses();
        if (!rmses.empty()) {
            j["stats"] = {{"best", arm.stats.best},
                          {"worst", arm.stats.worst},
                          {"mean", arm.stats.mean},
                          {"stddev", arm.stats.stddev},
                          {"count", rmses.size()}};
        }
    }
    return j;
}

nlohmann::json verdict_to_json(const ExperimentReport& report) {
    nlohmann::json v;
    v["defined"] = report.has_verdict;
    if (report.has_verdict) {
        v["worst_class_rmse"] = report.worst_class_rmse;
        v["best_reg_rmse"] = report.best_reg_rmse;
        v["binning_phenomenon"] = report.binning_phenomenon;
        v["mean_ratio"] = report.mean_ratio;
    }
    return v;
}

} // namespace

std::string report_to_json(const ExperimentReport& report) {
    const auto& config = report.config;
    nlohmann::json j;
    j["preset"] = config.name;
    j["task"] = config.task == TaskKind::Triangles1d
                    ? "triangles-1d"
                    : (config.task == TaskKind::Grid2d ? "grid-2d" : "custom");
    j["n"] = config.n;
    j["k"] = config.k;
    j["seeds"] = config.seeds;
    j["patience"] = config.patience;
    j["max_epochs"] = config.max_epochs;
    j["record_gradients"] = config.record_gradients;
    j["mass_threshold"] = config.mass_threshold;
    j["reg_hidden"] = config.reg_arm.hidden;
    j["reg_lr_grid"] = config.reg_arm.lr_grid;
    j["class_hidden"] = config.class_arm.hidden;
    j["class_lr_grid"] = config.class_arm.lr_grid;
    if (config.task == TaskKind::Grid2d) {
        j["grid_side"] = config.grid_side;
        j["teacher_hidden"] = config.teacher_hidden;
        j["teacher_seed"] = config.teacher_seed;
    }
    if (!config.reg_arm.hidden.empty()) j["regression"] = arm_to_json(report.regression, "reg");
    if (!config.class_arm.hidden.empty())
        j["classification"] = arm_to_json(report.classification, "class");
    j["verdict"] = verdict_to_json(report);
    return j.dump(2);
}

void emit_report(const ExperimentReport& report, const std::string& dir) {
    fs::create_directories(dir);
    write_text_file(dir + "/report.json", report_to_json(report));

    nlohmann::json stats;
    const auto arm_stats = [](const ArmReport& arm) {
        nlohmann::json s;
        s["best"] = arm.stats.best;
        s["worst"] = arm.stats.worst;
        s["mean"] = arm.stats.mean;
        s["stddev"] = arm.stats.stddev;
        return s;
    };
    if (!report.regression.per_seed.empty() && !report.regression.ok_rmses().empty())
        stats["regression"] = arm_stats(report.regression);
    if (!report.classification.per_seed.empty() && !report.classification.ok_rmses().empty())
        stats["classification"] = arm_stats(report.classification);
    stats["verdict"] = verdict_to_json(report);
    write_text_file(dir + "/stats.json", stats.dump(2));

    if (report.config.write_data_csv && !report.seed_data.empty()) {
        fs::create_directories(dir + "/data");
        for (std::size_t i = 0; i < report.seed_data.size(); ++i) {
            const auto& sd = report.seed_data[i];
            if (sd.train_rows.empty()) continue;
            const std::string tag = std::to_string(report.config.seeds[i]);
            write_csv(dir + "/data/seed" + tag + "_train.csv", sd.columns, sd.train_rows);
            write_csv(dir + "/data/seed" + tag + "_val.csv", sd.columns, sd.val_rows);
        }
    }

    const auto emit_arm = [&](const ArmReport& arm, const std::string& sub) {
        if (arm.per_seed.empty()) return;
        fs::create_directories(dir + "/" + sub);
        for (const auto& r : arm.per_seed) {
            if (!r.ok()) continue;
            const std::string base = dir + "/" + sub + "/seed" + std::to_string(r.seed);
            if (!r.kinks.neurons.empty()) write_kinks_csv(base + "_kinks.csv", r.kinks);
            if (!r.lines.empty()) write_lines_csv(base + "_lines.csv", r.lines);
            if (r.angles.rows > 0) write_angles_csv(base + "_angles.csv", r.angles);
        }
    };
    emit_arm(report.regression, "reg");
    emit_arm(report.classification, "class");
}

} // namespace binbias

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "binbias/binning.hpp"
#include "binbias/construct.hpp"
#include "binbias/convex.hpp"
#include "binbias/csv.hpp"
#include "binbias/datagen.hpp"
#include "binbias/experiment.hpp"
#include "binbias/rng.hpp"
#include "binbias/supports.hpp"

namespace {

using namespace binbias;
namespace fs = std::filesystem;

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

// columns x,y; for classification the label column is ybin when present
SortedDataset load_dataset(const std::string& path, bool classification) {
    const auto table = read_csv(path);
    const int cx = table.column("x");
    int cy = table.column("y");
    if (classification && table.column("ybin") >= 0) cy = table.column("ybin");
    if (cx < 0 || cy < 0)
        throw std::runtime_error("input csv needs columns x,y (or x,y,ybin)");
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
        xs.push_back(row[cx]);
        ys.push_back(row[cy]);
    }
    return normalize_domain(xs, ys).data;
}

int cmd_datagen(const std::string& preset, int n, int k, std::uint64_t seed,
                const std::string& out) {
    ensure_parent_dir(out);
    if (preset == "triangles") {
        const auto teacher = default_triangle_teacher();
        const auto data = sample_stratified_1d(teacher, n, k, seed);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < data.n(); ++i) rows.push_back({data.xs[i], data.ys[i]});
        write_csv(out, {"x", "y"}, rows);
    } else if (preset == "grid2d") {
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
        if (side * side != n)
            throw std::runtime_error("datagen grid2d: --n must be a perfect square");
        const auto teacher = random_network_teacher(3, seed);
        const auto grid = sample_grid_2d(teacher, side, k);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < grid.inputs.rows; ++i)
            rows.push_back({grid.inputs(i, 0), grid.inputs(i, 1), grid.ys[i]});
        write_csv(out, {"x1", "x2", "y"}, rows);
    } else {
        throw std::runtime_error("datagen: unknown preset '" + preset + "'");
    }
    return 0;
}

int cmd_bin(int k, const std::string& in, const std::string& out) {
    const auto table = read_csv(in);
    const int cx = table.column("x");
    const int cy = table.column("y");
    if (cx < 0 || cy < 0) throw std::runtime_error("bin: input csv needs columns x,y");
    const auto bins = make_uniform_bins(k);
    std::vector<std::vector<double>> rows;
    for (const auto& row : table.rows)
        rows.push_back({row[cx], row[cy], static_cast<double>(encode(row[cy], bins))});
    ensure_parent_dir(out);
    write_csv(out, {"x", "y", "ybin"}, rows);
    return 0;
}

int cmd_support(const std::string& task, const std::string& in, const std::string& out) {
    const auto data = load_dataset(in, task == "class");
    const SupportSet support =
        task == "class" ? compute_r_class(data) : compute_r_reg(data);
    nlohmann::json j;
    j["points"] = support.points;
    j["indices"] = support.indices;
    ensure_parent_dir(out);
    write_text_file(out, j.dump(2));
    return 0;
}

int cmd_solve(const std::string& task, int k, const std::string& in,
              const std::string& out) {
    const auto data = load_dataset(in, task == "class");
    SolveResult res = task == "class" ? solve_class_tv(data, k) : solve_reg_tv(data);
    nlohmann::json j = nlohmann::json::parse(res.measure.to_json());
    j["objective"] = res.certificate.objective;
    j["dual_objective"] = res.certificate.dual_objective;
    j["gap"] = res.certificate.gap;
    j["max_dual_norm"] = res.certificate.max_dual_norm;
    j["certified"] = res.certificate.certified;
    std::vector<double> support;
    const double cut = task == "class" ? 1e-6 : 1e-8;
    for (const auto& atom : res.measure.atoms()) {
        double nrm = 0.0;
        for (double w : atom.w) nrm += w * w;
        if (std::sqrt(nrm) > cut) support.push_back(atom.u.c);
    }
    j["support"] = support;
    ensure_parent_dir(out);
    write_text_file(out, j.dump(2));
    return 0;
}

int cmd_train(const std::string& config_path) {
    const FlatConfig flat = FlatConfig::parse_file(config_path);
    const std::string task = flat.get_string("task", "reg");
    const bool classification = task == "class";
    const int k = static_cast<int>(flat.get_long("k", 50));
    const std::string out_dir = flat.get_string("out", "train_out");

    const auto train_data = load_dataset(flat.get_string("train_csv", ""), false);
    const std::string val_path = flat.get_string("val_csv", "");
    const auto val_data = val_path.empty() ? train_data : load_dataset(val_path, false);

    Batch train_batch, val_batch;
    const auto fill = [&](const SortedDataset& d, Batch& b) {
        b.inputs = Matrix(d.n(), 1);
        b.targets = Matrix(d.n(), 1);
        for (std::size_t i = 0; i < d.n(); ++i) {
            b.inputs(i, 0) = d.xs[i];
            b.targets(i, 0) = d.ys[i];
        }
        b.real_values = d.ys;
    };
    fill(train_data, train_batch);
    fill(val_data, val_batch);

    TrainConfig tc;
    tc.lr_grid = flat.get_doubles("lr_grid", tc.lr_grid);
    tc.seed = flat.get_u64("seed", 1);
    tc.patience = flat.get_long("patience", 1000);
    tc.max_epochs = flat.get_long("max_epochs", 200000);
    tc.record_gradients = static_cast<int>(flat.get_long("record_gradients", 1000));
    std::vector<std::size_t> widths{1};
    for (double h : flat.get_doubles("widths", {100}))
        widths.push_back(static_cast<std::size_t>(h));
    if (classification) {
        tc.loss = LossKind::CrossEntropy;
        const auto bins = make_uniform_bins(k);
        tc.decode_midpoints = bins.midpoints;
        train_batch.targets = Matrix();
        val_batch.targets = Matrix();
        for (double y : train_data.ys) train_batch.labels.push_back(encode(y, bins));
        for (double y : val_data.ys) val_batch.labels.push_back(encode(y, bins));
        widths.push_back(static_cast<std::size_t>(k));
    } else {
        widths.push_back(1);
    }

    const Mlp model = init_he(widths, tc.seed);
    const TrainResult result = train(model, train_batch, val_batch, tc);

    fs::create_directories(out_dir);
    write_text_file(out_dir + "/checkpoint.json", result.best_model.to_json());
    nlohmann::json j;
    j["task"] = task;
    j["selected_lr"] = result.selected_lr;
    j["epochs"] = result.epochs;
    j["best_epoch"] = result.best_epoch;
    j["best_val_loss"] = result.best_val_loss;
    j["best_val_rmse"] = result.best_val_rmse;
    write_text_file(out_dir + "/result.json", j.dump(2));
    std::vector<std::vector<double>> losses;
    for (std::size_t e = 0; e < result.train_losses.size(); ++e)
        losses.push_back({static_cast<double>(e), result.train_losses[e], result.val_losses[e]});
    write_csv(out_dir + "/losses.csv", {"epoch", "train_loss", "val_loss"}, losses);
    return 0;
}

int cmd_experiment(const std::string& preset, const std::string& config_path,
                   const std::string& out, const std::string& seeds_csv, int workers) {
    FlatConfig flat;
    if (!config_path.empty()) flat = FlatConfig::parse_file(config_path);
    if (!flat.has("preset") && !preset.empty()) flat.set("preset", preset);
    if (!out.empty()) flat.set("out", out);
    if (!seeds_csv.empty()) flat.set("seeds", seeds_csv);
    if (workers > 0) flat.set("workers", std::to_string(workers));
    const ExperimentConfig config = config_from_flat(flat);
    const ExperimentReport report = run_experiment(config);
    emit_report(report, config.out_dir);
    std::cout << report_to_json(report) << "\n";
    // propagate per-seed failures in the exit code without hiding the report
    for (const auto* arm : {&report.regression, &report.classification})
        for (const auto& r : arm->per_seed)
            if (!r.ok()) return 2;
    return 0;
}

int cmd_analyze(const std::string& model_path, const std::string& out,
                double mass_threshold, const std::string& rmse_csv) {
    fs::create_directories(out);
    if (!model_path.empty()) {
        const Mlp model = Mlp::from_json(read_text_file(model_path));
        if (model.input_dim() == 1 && model.layers.size() == 2) {
            write_kinks_csv(out + "/kinks.csv", extract_kinks(model, mass_threshold));
        } else if (model.input_dim() == 2 && model.layers.size() == 2) {
            write_lines_csv(out + "/lines.csv", critical_lines(model, mass_threshold));
        } else {
            throw std::runtime_error("analyze: model is not a two-layer 1-D or 2-D network");
        }
    }
    if (!rmse_csv.empty()) {
        std::vector<double> rmses;
        std::stringstream ss(rmse_csv);
        std::string item;
        while (std::getline(ss, item, ',')) rmses.push_back(std::stod(item));
        const RmseStats stats = rmse_stats(rmses);
        nlohmann::json j;
        j["best"] = stats.best;
        j["worst"] = stats.worst;
        j["mean"] = stats.mean;
        j["stddev"] = stats.stddev;
        j["single"] = stats.single;
        write_text_file(out + "/stats.json", j.dump(2));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit-bias toolkit for 1-D two-layer ReLU networks: supports, "
                 "feasible measures, convex solvers, and the binning experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global --seed/--out/--config may follow the subcommand

    std::uint64_t seed = 1;
    std::string out;
    std::string config_path;
    app.add_option("--seed", seed, "global random seed")->capture_default_str();
    app.add_option("--out", out, "output file or directory");
    app.add_option("--config", config_path, "flat key = value config file");

    auto* datagen = app.add_subcommand("datagen", "generate a synthetic dataset csv");
    std::string dg_preset = "triangles";
    int dg_n = 250, dg_k = 50;
    datagen->add_option("--preset", dg_preset, "triangles | grid2d");
    datagen->add_option("--n", dg_n, "sample count (grid2d: a perfect square)");
    datagen->add_option("--k", dg_k, "bin count");

    auto* bin = app.add_subcommand("bin", "append a ybin class column");
    std::string in_path;
    int bin_k = 50;
    bin->add_option("--k", bin_k, "bin count");
    bin->add_option("--in", in_path, "input csv")->required();

    auto* support = app.add_subcommand("support", "compute R_reg or R_class");
    std::string task = "reg";
    support->add_option("--task", task, "reg | class");
    support->add_option("--in", in_path, "input csv")->required();

    auto* solve = app.add_subcommand("solve", "minimum-TV interpolation/classification");
    int solve_k = 2;
    solve->add_option("--task", task, "reg | class");
    solve->add_option("--k", solve_k, "class count (classification)");
    solve->add_option("--in", in_path, "input csv")->required();

    auto* train_cmd = app.add_subcommand("train", "train one model from a config file");

    auto* experiment = app.add_subcommand("experiment", "run a multi-seed experiment");
    std::string exp_preset = "desk";
    std::string exp_seeds;
    int exp_workers = 0;
    experiment->add_option("--preset", exp_preset, "desk | paper | depth3 | grid2d");
    experiment->add_option("--seeds", exp_seeds, "comma-separated seed list");
    experiment->add_option("--workers", exp_workers, "parallel workers (0 = auto)");

    auto* analyze = app.add_subcommand("analyze", "kink/line reports from a checkpoint");
    std::string model_path;
    std::string rmse_list;
    double mass_threshold = 1e-3;
    analyze->add_option("--model", model_path, "checkpoint json");
    analyze->add_option("--mass-threshold", mass_threshold, "dead-neuron fraction");
    analyze->add_option("--rmse", rmse_list, "comma-separated rmses for stats.json");

    try {
        app.parse(argc, argv);
        if (datagen->parsed())
            return cmd_datagen(dg_preset, dg_n, dg_k, seed,
                               out.empty() ? "data.csv" : out);
        if (bin->parsed()) return cmd_bin(bin_k, in_path, out.empty() ? "binned.csv" : out);
        if (support->parsed())
            return cmd_support(task, in_path, out.empty() ? "support.json" : out);
        if (solve->parsed())
            return cmd_solve(task, solve_k, in_path, out.empty() ? "solution.json" : out);
        if (train_cmd->parsed()) {
            if (config_path.empty()) throw std::runtime_error("train: --config is required");
            return cmd_train(config_path);
        }
        if (experiment->parsed())
            return cmd_experiment(exp_preset, config_path, out, exp_seeds, exp_workers);
        if (analyze->parsed())
            return cmd_analyze(model_path, out.empty() ? "analysis" : out, mass_threshold,
                               rmse_list);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        nlohmann::json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binbias/analysis.hpp"
#include "binbias/config.hpp"
#include "binbias/nn.hpp"
#include "binbias/supports.hpp"

namespace binbias {

enum class TaskKind { Triangles1d, Grid2d, CustomCsv };

struct ArmSpec {
    std::vector<std::size_t> hidden; // empty disables the arm
    std::vector<double> lr_grid;
};

struct ExperimentConfig {
    std::string name = "desk";
    TaskKind task = TaskKind::Triangles1d;
    std::string custom_data; // csv path for TaskKind::CustomCsv
    int n = 250;
    int k = 50;
    int grid_side = 25;
    int teacher_hidden = 3;          // grid-2d teacher neurons
    std::uint64_t teacher_seed = 101;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    ArmSpec reg_arm;
    ArmSpec class_arm;
    long patience = 1000;
    long max_epochs = 200000;
    int record_gradients = 1000;
    int workers = 0; // 0 = hardware concurrency
    double mass_threshold = 1e-3;
    std::string out_dir = "out";
    bool write_data_csv = true;
    bool write_angle_csv = true;
};

// presets; every paper-unspecified hyperparameter is explicit here
ExperimentConfig desk_preset();
ExperimentConfig paper_preset();
ExperimentConfig depth3_preset();
ExperimentConfig grid2d_preset();
// preset overridden by flat config keys
ExperimentConfig config_from_flat(const FlatConfig& flat);

struct SeedArmResult {
    std::uint64_t seed = 0;
    std::string status = "ok"; // or the error text
    double rmse = 0.0;
    double selected_lr = 0.0;
    long epochs = 0;
    long best_epoch = -1;
    double max_grad_angle = 0.0; // over the recorded gradients; NaN if none
    KinkReport kinks;                // 1-D two-layer arms
    std::vector<CriticalLine> lines; // 2-D arms
    Matrix angles;                   // recorded-gradient angle matrix, downsampled

    bool ok() const { return status == "ok"; }
};

struct ArmReport {
    std::string loss;
    std::vector<SeedArmResult> per_seed;
    RmseStats stats; // over seeds with ok status

    std::vector<double> ok_rmses() const;
    int worst_seed_index() const; // -1 when no seed succeeded
};

struct SeedData {
    std::vector<std::string> columns; // x,y or x1,x2,y
    std::vector<std::vector<double>> train_rows;
    std::vector<std::vector<double>> val_rows;
};

struct ExperimentReport {
    ExperimentConfig config;
    ArmReport regression;
    ArmReport classification;
    std::vector<SeedData> seed_data;
    // per-seed supports of the training data (1-D tasks)
    std::vector<std::vector<double>> r_reg_points;
    std::vector<std::vector<double>> r_class_points;
    // verdict, defined when both arms ran
    bool has_verdict = false;
    double worst_class_rmse = 0.0;
    double best_reg_rmse = 0.0;
    bool binning_phenomenon = false;
    double mean_ratio = 0.0; // reg mean / class mean
};

ExperimentReport run_experiment(const ExperimentConfig& config);

// writes report.json, stats.json and the per-seed artifact CSVs
void emit_report(const ExperimentReport& report, const std::string& dir);

std::string report_to_json(const ExperimentReport& report);

} // namespace binbias

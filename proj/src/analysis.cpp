#include "binbias/analysis.hpp"

#include <algorithm>
#include <stdexcept>

#include "binbias/csv.hpp"

namespace binbias {

std::vector<KinkReport::Neuron> KinkReport::live() const {
    std::vector<Neuron> out;
    for (const auto& n : neurons)
        if (!n.dead && !n.constant) out.push_back(n);
    return out;
}

KinkReport extract_kinks(const Mlp& model, double mass_threshold_fraction) {
    if (model.layers.size() != 2 || model.input_dim() != 1)
        throw std::invalid_argument("extract_kinks: needs a two-layer 1-D model");
    const std::size_t m = model.widths[1];
    const std::size_t k = model.output_dim();
    KinkReport report;
    report.neurons.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        auto& neuron = report.neurons[j];
        neuron.index = static_cast<int>(j);
        const double a1 = model.layers[0].w(0, j);
        const double a2 = model.layers[0].w(1, j);
        double b_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) b_sq += model.layers[1].w(j, c) * model.layers[1].w(j, c);
        neuron.mass = std::sqrt(a1 * a1 + a2 * a2) * std::sqrt(b_sq);
        report.max_mass = std::max(report.max_mass, neuron.mass);
        if (a1 == 0.0) {
            neuron.constant = true;
        } else {
            neuron.s = a1 > 0.0 ? 1 : -1;
            neuron.c = -a2 / a1;
        }
    }
    const double cutoff = mass_threshold_fraction * report.max_mass;
    for (auto& neuron : report.neurons) neuron.dead = neuron.mass < cutoff;
    return report;
}

std::vector<CriticalLine> critical_lines(const Mlp& model, double mass_threshold_fraction) {
    if (model.layers.size() != 2 || model.input_dim() != 2)
        throw std::invalid_argument("critical_lines: needs a two-layer model on (x1, x2, 1)");
    const std::size_t m = model.widths[1];
    const std::size_t k = model.output_dim();
    std::vector<CriticalLine> all;
    double max_mass = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        CriticalLine line;
        line.a1 = model.layers[0].w(0, j);
        line.a2 = model.layers[0].w(1, j);
        line.a3 = model.layers[0].w(2, j);
        double b_sq = 0.0;
        for (std::size_t c = 0; c < k; ++c) b_sq += model.layers[1].w(j, c) * model.layers[1].w(j, c);
        const double a_sq = line.a1 * line.a1 + line.a2 * line.a2 + line.a3 * line.a3;
        line.mass = std::sqrt(a_sq) * std::sqrt(b_sq);
        max_mass = std::max(max_mass, line.mass);
        all.push_back(line);
    }
    const double cutoff = mass_threshold_fraction * max_mass;
    std::vector<CriticalLine> out;
    for (auto& line : all) {
        if (line.mass < cutoff) continue;
        if (line.a1 == 0.0 && line.a2 == 0.0) continue; // constant feature
        line.crosses = std::abs(line.a3) <= std::abs(line.a1) + std::abs(line.a2);
        out.push_back(line);
    }
    return out;
}

RmseStats rmse_stats(const std::vector<double>& rmses) {
    if (rmses.empty()) throw std::invalid_argument("rmse_stats: empty input");
    RmseStats stats;
    stats.best = rmses[0];
    stats.worst = rmses[0];
    double sum = 0.0;
    for (double r : rmses) {
        stats.best = std::min(stats.best, r);
        stats.worst = std::max(stats.worst, r);
        sum += r;
    }
    stats.mean = sum / static_cast<double>(rmses.size());
    if (rmses.size() == 1) {
        stats.single = true;
        stats.stddev = 0.0;
    } else {
        double sq = 0.0;
        for (double r : rmses) sq += (r - stats.mean) * (r - stats.mean);
        stats.stddev = std::sqrt(sq / static_cast<double>(rmses.size() - 1));
    }
    return stats;
}

std::vector<KinkCluster> cluster_kinks(const KinkReport& report, double radius) {
    auto live = report.live();
    std::sort(live.begin(), live.end(),
              [](const auto& a, const auto& b) { return a.c < b.c; });
    std::vector<KinkCluster> clusters;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= live.size(); ++i) {
        const bool split = i == live.size() || (i > start && live[i].c - live[i - 1].c > radius);
        if (!split) continue;
        if (i > start) {
            KinkCluster cluster;
            double weighted = 0.0;
            for (std::size_t p = start; p < i; ++p) {
                cluster.mass += live[p].mass;
                weighted += live[p].mass * live[p].c;
                ++cluster.count;
            }
            cluster.center = cluster.mass > 0.0 ? weighted / cluster.mass
                                                : live[start].c;
            clusters.push_back(cluster);
        }
        start = i;
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.mass > b.mass; });
    return clusters;
}

namespace {

struct NormalForm {
    double n1, n2, d;
};

NormalForm normal_form(const CriticalLine& line) {
    const double nrm = std::sqrt(line.a1 * line.a1 + line.a2 * line.a2);
    NormalForm f{line.a1 / nrm, line.a2 / nrm, line.a3 / nrm};
    if (f.n1 < 0.0 || (f.n1 == 0.0 && f.n2 < 0.0)) {
        f.n1 = -f.n1;
        f.n2 = -f.n2;
        f.d = -f.d;
    }
    return f;
}

double line_distance(const NormalForm& a, const NormalForm& b) {
    const double cosv = std::clamp(a.n1 * b.n1 + a.n2 * b.n2, -1.0, 1.0);
    return std::max(std::acos(cosv), std::abs(a.d - b.d));
}

} // namespace

int count_line_clusters(const std::vector<CriticalLine>& lines, double dist) {
    std::vector<NormalForm> forms;
    for (const auto& line : lines)
        if (line.crosses) forms.push_back(normal_form(line));
    const std::size_t n = forms.size();
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    const auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (line_distance(forms[i], forms[j]) <= dist) parent[find(i)] = find(j);
    int clusters = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (find(i) == i) ++clusters;
    return clusters;
}

void write_kinks_csv(const std::string& path, const KinkReport& report) {
    std::vector<std::vector<double>> rows;
    for (const auto& n : report.neurons) {
        if (n.constant) continue;
        rows.push_back({static_cast<double>(n.index), static_cast<double>(n.s), n.c,
                        n.mass, n.dead ? 1.0 : 0.0});
    }
    write_csv(path, {"neuron", "s", "c", "mass", "dead"}, rows);
}

void write_lines_csv(const std::string& path, const std::vector<CriticalLine>& lines) {
    std::vector<std::vector<double>> rows;
    for (const auto& line : lines)
        rows.push_back({line.a1, line.a2, line.a3, line.crosses ? 1.0 : 0.0});
    write_csv(path, {"a1", "a2", "a3", "crosses"}, rows);
}

void write_angles_csv(const std::string& path, const Matrix& angles, int stride) {
    if (stride < 1) stride = 1;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < angles.rows; i += stride) {
        std::vector<double> row;
        for (std::size_t j = 0; j < angles.cols; j += stride) row.push_back(angles(i, j));
        rows.push_back(std::move(row));
    }
    std::vector<std::string> header;
    for (std::size_t j = 0; j < angles.cols; j += stride)
        header.push_back("t" + std::to_string(j));
    write_csv(path, header, rows);
}

} // namespace binbias

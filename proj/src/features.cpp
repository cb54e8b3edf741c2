#include "binbias/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace binbias {

namespace {

constexpr double kMergeTol = 1e-12;

bool feature_less(const Feature& a, const Feature& b) {
    if (a.s != b.s) return a.s > b.s; // rightward block first
    return a.c < b.c;
}

bool feature_mergeable(const Feature& a, const Feature& b) {
    return a.s == b.s && std::abs(a.c - b.c) <= kMergeTol;
}

} // namespace

double feature_eval(const Feature& u, double x) {
    return std::max(u.s * (x - u.c), 0.0);
}

AtomicMeasure::AtomicMeasure(std::size_t k) : k_(k) {
    if (k == 0) throw std::invalid_argument("AtomicMeasure: k must be >= 1");
}

AtomicMeasure::AtomicMeasure(std::size_t k, std::vector<Atom> atoms) : AtomicMeasure(k) {
    for (auto& a : atoms) add_atom(a.u, std::move(a.w));
}

void AtomicMeasure::add_atom(const Feature& u, std::vector<double> w) {
    if (w.size() != k_)
        throw std::invalid_argument("AtomicMeasure: weight length does not match k");
    if (u.s != 1 && u.s != -1)
        throw std::invalid_argument("AtomicMeasure: feature sign must be -1 or +1");
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), u,
                               [](const Atom& a, const Feature& f) { return feature_less(a.u, f); });
    // check the neighbour on each side for a merge within tolerance
    if (it != atoms_.end() && feature_mergeable(it->u, u)) {
        for (std::size_t i = 0; i < k_; ++i) it->w[i] += w[i];
        return;
    }
    if (it != atoms_.begin() && feature_mergeable(std::prev(it)->u, u)) {
        auto& dst = *std::prev(it);
        for (std::size_t i = 0; i < k_; ++i) dst.w[i] += w[i];
        return;
    }
    atoms_.insert(it, Atom{u, std::move(w)});
}

void AtomicMeasure::add_atom(const Feature& u, double w) {
    add_atom(u, std::vector<double>{w});
}

AtomicMeasure AtomicMeasure::scaled(double t) const {
    AtomicMeasure out(k_);
    out.atoms_ = atoms_;
    for (auto& a : out.atoms_)
        for (auto& v : a.w) v *= t;
    return out;
}

namespace {

// Neumaier compensated accumulator; atom weights of sparse interpolants
// can be large and cancelling, a plain sum loses too many digits.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double term) {
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

} // namespace

std::vector<double> measure_eval(const AtomicMeasure& mu, double x) {
    std::vector<double> out(mu.k());
    std::vector<CompensatedSum> acc(mu.k());
    for (const auto& a : mu.atoms()) {
        const double phi = feature_eval(a.u, x);
        if (phi == 0.0) continue;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i].add(a.w[i] * phi);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
    return out;
}

double measure_eval_scalar(const AtomicMeasure& mu, double x) {
    if (mu.k() != 1)
        throw std::invalid_argument("measure_eval_scalar: measure is not scalar-valued");
    CompensatedSum acc;
    for (const auto& a : mu.atoms()) {
        const double phi = feature_eval(a.u, x);
        if (phi != 0.0) acc.add(a.w[0] * phi);
    }
    return acc.value();
}

double total_variation(const AtomicMeasure& mu, NormKind norm) {
    if (norm == NormKind::Absolute && mu.k() != 1)
        throw std::invalid_argument("total_variation: absolute-value norm requires k = 1");
    double tv = 0.0;
    for (const auto& a : mu.atoms()) {
        if (norm == NormKind::Absolute) {
            tv += std::abs(a.w[0]);
        } else {
            double sq = 0.0;
            for (double v : a.w) sq += v * v;
            tv += std::sqrt(sq);
        }
    }
    return tv;
}

std::string AtomicMeasure::to_json() const {
    nlohmann::json j;
    j["k"] = k_;
    j["atoms"] = nlohmann::json::array();
    for (const auto& a : atoms_)
        j["atoms"].push_back({{"s", a.u.s}, {"c", a.u.c}, {"w", a.w}});
    return j.dump();
}

AtomicMeasure AtomicMeasure::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    AtomicMeasure mu(j.at("k").get<std::size_t>());
    for (const auto& a : j.at("atoms")) {
        Feature u{a.at("s").get<int>(), a.at("c").get<double>()};
        mu.add_atom(u, a.at("w").get<std::vector<double>>());
    }
    return mu;
}

std::vector<double> RawNetworkLayer::eval(double x) const {
    if (input_weights.size() != output_weights.size())
        throw std::invalid_argument("RawNetworkLayer: row count mismatch");
    std::vector<double> out;
    if (!output_weights.empty()) out.assign(output_weights[0].size(), 0.0);
    for (std::size_t j = 0; j < input_weights.size(); ++j) {
        const double act = std::max(input_weights[j][0] * x + input_weights[j][1], 0.0);
        if (act == 0.0) continue;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += output_weights[j][i] * act;
    }
    return out;
}

ReparameterizedNetwork reparameterize(const RawNetworkLayer& layer) {
    if (layer.input_weights.size() != layer.output_weights.size())
        throw std::invalid_argument("reparameterize: row count mismatch");
    const std::size_t k = layer.output_weights.empty() ? 1 : layer.output_weights[0].size();
    ReparameterizedNetwork out{AtomicMeasure(k), std::vector<double>(k, 0.0)};
    for (std::size_t j = 0; j < layer.size(); ++j) {
        const double a1 = layer.input_weights[j][0];
        const double a2 = layer.input_weights[j][1];
        const auto& b = layer.output_weights[j];
        if (b.size() != k)
            throw std::invalid_argument("reparameterize: ragged output weights");
        if (a1 == 0.0) {
            // constant feature (a2)_+ ; not representable as a kink
            const double act = std::max(a2, 0.0);
            for (std::size_t i = 0; i < k; ++i) out.constant_offset[i] += b[i] * act;
            continue;
        }
        const Feature u{a1 > 0.0 ? 1 : -1, -a2 / a1};
        std::vector<double> w(k);
        for (std::size_t i = 0; i < k; ++i) w[i] = std::abs(a1) * b[i];
        out.measure.add_atom(u, std::move(w));
    }
    return out;
}

} // namespace binbias

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace binbias {

// A re-parameterized ReLU feature x -> (s*(x - c))_+ .
// s = +1 ramps rightwards from the kink c, s = -1 ramps leftwards.
struct Feature {
    int s = 1;       // sign, exactly -1 or +1
    double c = 0.0;  // kink location

    bool operator==(const Feature& o) const { return s == o.s && c == o.c; }
};

double feature_eval(const Feature& u, double x);

// Finite signed measure over the feature space: a weighted sum of point
// masses. Each atom carries a weight vector in R^k, so the same type
// represents scalar-output and vector-output networks.
class AtomicMeasure {
  public:
    struct Atom {
        Feature u;
        std::vector<double> w;
    };

    explicit AtomicMeasure(std::size_t k);
    AtomicMeasure(std::size_t k, std::vector<Atom> atoms);

    std::size_t k() const { return k_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }

    // Adds a point mass; merges into an existing atom when the feature
    // matches (equal sign, kinks within 1e-12).
    void add_atom(const Feature& u, std::vector<double> w);
    void add_atom(const Feature& u, double w); // k = 1 convenience

    AtomicMeasure scaled(double t) const;

    std::string to_json() const;
    static AtomicMeasure from_json(const std::string& text);

  private:
    std::size_t k_;
    std::vector<Atom> atoms_;
};

std::vector<double> measure_eval(const AtomicMeasure& mu, double x);
double measure_eval_scalar(const AtomicMeasure& mu, double x); // requires k = 1

enum class NormKind {
    Absolute,  // sum of |w|, k = 1 only
    Euclidean, // sum of per-atom l2 norms
};

double total_variation(const AtomicMeasure& mu, NormKind norm);

// A finite two-layer network's parameters in raw form: input rows
// (a1, a2) acting on (x, 1) and per-neuron output weight vectors.
struct RawNetworkLayer {
    std::vector<std::array<double, 2>> input_weights;
    std::vector<std::vector<double>> output_weights;

    std::size_t size() const { return input_weights.size(); }
    std::vector<double> eval(double x) const;
};

struct ReparameterizedNetwork {
    AtomicMeasure measure;
    std::vector<double> constant_offset; // from rows with a1 = 0
};

// Change of variable from raw rows to kink features: row (a1, a2) with
// output b becomes the atom ((sign(a1), -a2/a1), |a1| * b). Rows with
// a1 = 0 are constant features and are accumulated separately.
ReparameterizedNetwork reparameterize(const RawNetworkLayer& layer);

} // namespace binbias

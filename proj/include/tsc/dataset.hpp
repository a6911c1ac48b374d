#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/matrix.hpp"

namespace tsc {

// n x d feature matrix with integer class labels in [0, n_classes).
// Immutable by convention once built; operations return new datasets.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    int n_classes = 0;
    std::vector<std::string> feature_names;  // empty = unnamed
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t n() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    void validate() const;
};

// Per-feature affine standardization. Constant columns map to 0 and are
// flagged; inverting maps them back to their mean.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;       // 1.0 for constant columns
    std::vector<bool> constant_flag;  // true where the fitted column was constant
};

struct ClassPrior {
    std::vector<double> p;  // nonnegative, sums to 1
};

// label_column: column name (requires a header row) or a 0-based index.
Dataset load_csv(const std::string& path, const std::string& label_column);

std::vector<Dataset> split(const Dataset& d, const std::vector<double>& fractions,
                           std::uint64_t seed);

Scaler fit_scaler(const Dataset& d);
Matrix apply_scaler(const Scaler& s, const Matrix& x);
Dataset apply_scaler(const Scaler& s, const Dataset& d);
Matrix invert_scaler(const Scaler& s, const Matrix& x);

ClassPrior class_prior(const Dataset& d);

// Ground-truth benchmark task: class k is an equal-weight mixture of two
// unit-covariance Gaussians centered at k*separation*e1 +- offset*e2, so the
// Bayes rule reduces to the nearest class center along axis 0 and its
// accuracy has a closed form (stored in metadata as "bayes_accuracy").
Dataset make_synthetic_benchmark(std::size_t n, std::size_t d, int k, double separation,
                                 std::uint64_t seed);
double benchmark_bayes_accuracy(int k, double separation);
int benchmark_bayes_predict(std::span<const double> x, int k, double separation);

void to_json(nlohmann::json& j, const Dataset& d);
void from_json(const nlohmann::json& j, Dataset& d);
void to_json(nlohmann::json& j, const Scaler& s);
void from_json(const nlohmann::json& j, Scaler& s);

void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace tsc

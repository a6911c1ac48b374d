#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsc/dataset.hpp"
#include "tsc/matrix.hpp"

namespace tsc {

// Flat node. feature == -1 marks a leaf; classification leaves carry the
// class-count vector (probabilities are frequencies), regression leaves the
// mean target.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_counts;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

enum class ForestMode { Classification, Regression };

struct RandomForest {
    std::vector<DecisionTree> trees;
    ForestMode mode = ForestMode::Classification;
    int n_features = 0;
    int n_classes = 0;            // classification only
    int n_features_per_split = 0;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

// Teacher training: Gini splits over ceil(sqrt(d)) sampled candidate
// features per node, bootstrap resamples, grown until pure or < 2 samples.
RandomForest fit_classifier_forest(const Dataset& d, int n_trees, std::uint64_t seed);

// Student training: MSE splits over all d features, otherwise as above.
RandomForest fit_regression_forest(const Matrix& x, const std::vector<double>& targets,
                                   int n_trees, std::uint64_t seed);

std::vector<double> predict_proba(const RandomForest& f, std::span<const double> x);
double predict_value(const RandomForest& f, std::span<const double> x);

Matrix predict_proba_batch(const RandomForest& f, const Matrix& x);
Matrix predict_proba_batch_serial(const RandomForest& f, const Matrix& x);
std::vector<double> predict_value_batch(const RandomForest& f, const Matrix& x);
std::vector<double> predict_value_batch_serial(const RandomForest& f, const Matrix& x);

std::size_t node_count(const RandomForest& f);
struct DepthStats {
    int max = 0;
    double mean = 0.0;  // mean per-tree depth
};
DepthStats depth_stats(const RandomForest& f);

// Split search, exposed so tests can compare against brute-force oracles.
// Candidate thresholds are midpoints between consecutive distinct sorted
// values; ties broken by lowest feature index, then lowest threshold.
struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
};
SplitChoice best_gini_split(const Matrix& x, const std::vector<int>& y,
                            const std::vector<int>& rows, std::span<const int> features,
                            int n_classes);
SplitChoice best_mse_split(const Matrix& x, const std::vector<double>& y,
                           const std::vector<int>& rows, std::span<const int> features);

void to_json(nlohmann::json& j, const RandomForest& f);
void from_json(const nlohmann::json& j, RandomForest& f);
void save_forest(const RandomForest& f, const std::string& path);
RandomForest load_forest(const std::string& path);

}  // namespace tsc

#include "tsc/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tsc/parallel.hpp"
#include "tsc/rng.hpp"
#include "tsc/util.hpp"

namespace tsc {

namespace {

// Midpoint between consecutive distinct sorted values, nudged down to the
// lower value if rounding lands on the upper one, so "x <= threshold"
// always yields two nonempty sides.
double split_threshold(double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    if (!(mid < hi)) mid = lo;
    return mid;
}

struct RowOrder {
    std::vector<int> idx;  // positions into the node's row list, sorted by value
};

void sort_by_feature(const Matrix& x, const std::vector<int>& rows, int f, RowOrder& ord) {
    ord.idx.resize(rows.size());
    std::iota(ord.idx.begin(), ord.idx.end(), 0);
    std::sort(ord.idx.begin(), ord.idx.end(), [&](int a, int b) {
        double va = x(rows[a], f), vb = x(rows[b], f);
        if (va != vb) return va < vb;
        return a < b;
    });
}

}  // namespace

SplitChoice best_gini_split(const Matrix& x, const std::vector<int>& y,
                            const std::vector<int>& rows, std::span<const int> features,
                            int n_classes) {
    // Minimizing weighted Gini is equivalent to maximizing
    //   sum_side (sum_k count_k^2) / n_side,
    // a rational in the integer class counts, so candidate splits are
    // compared exactly in 128-bit integer arithmetic. This is what makes
    // brute-force oracle equality and parallel/serial determinism exact.
    SplitChoice best;
    std::int64_t best_num = 0, best_den = 1;
    const std::int64_t n = (std::int64_t)rows.size();
    if (n < 2) return best;

    std::vector<std::int64_t> total(n_classes, 0);
    for (int r : rows) total[y[r]]++;

    RowOrder ord;
    std::vector<std::int64_t> left(n_classes);
    for (int f : features) {
        sort_by_feature(x, rows, f, ord);
        std::fill(left.begin(), left.end(), 0);
        std::int64_t sum_left_sq = 0;
        std::int64_t sum_right_sq = 0;
        for (int k = 0; k < n_classes; ++k) sum_right_sq += total[k] * total[k];

        for (std::int64_t i = 0; i + 1 < n; ++i) {
            int r = rows[ord.idx[i]];
            int c = y[r];
            // move row i from right to left, updating sums of squares
            sum_left_sq += 2 * left[c] + 1;
            std::int64_t right_c = total[c] - left[c];
            sum_right_sq -= 2 * right_c - 1;
            left[c]++;

            double lo = x(r, f);
            double hi = x(rows[ord.idx[i + 1]], f);
            if (lo == hi) continue;

            std::int64_t nl = i + 1, nr = n - nl;
            std::int64_t num = sum_left_sq * nr + sum_right_sq * nl;
            std::int64_t den = nl * nr;
            if (!best.found || (__int128)num * best_den > (__int128)best_num * den) {
                best.found = true;
                best.feature = f;
                best.threshold = split_threshold(lo, hi);
                best_num = num;
                best_den = den;
            }
        }
    }
    return best;
}

SplitChoice best_mse_split(const Matrix& x, const std::vector<double>& y,
                           const std::vector<int>& rows, std::span<const int> features) {
    // Minimizing total squared error is equivalent to maximizing
    //   sum_side (sum of targets)^2 / n_side.
    SplitChoice best;
    double best_score = 0.0;
    const std::int64_t n = (std::int64_t)rows.size();
    if (n < 2) return best;

    double total_sum = 0.0;
    for (int r : rows) total_sum += y[r];

    RowOrder ord;
    for (int f : features) {
        sort_by_feature(x, rows, f, ord);
        double left_sum = 0.0;
        for (std::int64_t i = 0; i + 1 < n; ++i) {
            int r = rows[ord.idx[i]];
            left_sum += y[r];
            double lo = x(r, f);
            double hi = x(rows[ord.idx[i + 1]], f);
            if (lo == hi) continue;

            double nl = double(i + 1), nr = double(n - i - 1);
            double right_sum = total_sum - left_sum;
            double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if (!best.found || score > best_score) {
                best.found = true;
                best.feature = f;
                best.threshold = split_threshold(lo, hi);
                best_score = score;
            }
        }
    }
    return best;
}

namespace {

struct BuildItem {
    std::vector<int> rows;
    int node = 0;
};

// Targets for tree building: either class labels or regression values.
struct BuildSpec {
    const Matrix& x;
    const std::vector<int>* labels = nullptr;     // classification
    const std::vector<double>* targets = nullptr; // regression
    int n_classes = 0;
    int features_per_split = 0;                   // 0 = all
};

bool node_is_pure(const BuildSpec& spec, const std::vector<int>& rows) {
    if (spec.labels) {
        int first = (*spec.labels)[rows[0]];
        for (int r : rows)
            if ((*spec.labels)[r] != first) return false;
        return true;
    }
    double first = (*spec.targets)[rows[0]];
    for (int r : rows)
        if ((*spec.targets)[r] != first) return false;
    return true;
}

void make_leaf(const BuildSpec& spec, const std::vector<int>& rows, TreeNode& node) {
    node.feature = -1;
    node.left = node.right = -1;
    if (spec.labels) {
        node.class_counts.assign(spec.n_classes, 0.0);
        for (int r : rows) node.class_counts[(*spec.labels)[r]] += 1.0;
    } else {
        double s = 0.0;
        for (int r : rows) s += (*spec.targets)[r];
        node.value = s / double(rows.size());
    }
}

// Uniform sample of `m` distinct feature indices, returned sorted so the
// split scan respects the lowest-feature-index tie-break.
std::vector<int> sample_features(int d, int m, Rng& rng) {
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < m; ++i) {
        int j = i + (int)rng.uniform_int((std::uint64_t)(d - i));
        std::swap(all[i], all[j]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
}

DecisionTree build_tree(const BuildSpec& spec, bool bootstrap, Rng rng) {
    const std::size_t n = spec.x.rows();
    const int d = (int)spec.x.cols();

    std::vector<int> root_rows(n);
    if (bootstrap) {
        for (std::size_t i = 0; i < n; ++i) root_rows[i] = (int)rng.uniform_int(n);
    } else {
        std::iota(root_rows.begin(), root_rows.end(), 0);
    }

    DecisionTree tree;
    tree.nodes.emplace_back();
    std::vector<BuildItem> stack;
    stack.push_back({std::move(root_rows), 0});

    std::vector<int> all_features(d);
    std::iota(all_features.begin(), all_features.end(), 0);

    while (!stack.empty()) {
        BuildItem item = std::move(stack.back());
        stack.pop_back();

        if (item.rows.size() < 2 || node_is_pure(spec, item.rows)) {
            make_leaf(spec, item.rows, tree.nodes[item.node]);
            continue;
        }

        SplitChoice choice;
        if (spec.features_per_split > 0 && spec.features_per_split < d) {
            std::vector<int> cand = sample_features(d, spec.features_per_split, rng);
            choice = spec.labels
                         ? best_gini_split(spec.x, *spec.labels, item.rows, cand, spec.n_classes)
                         : best_mse_split(spec.x, *spec.targets, item.rows, cand);
        } else {
            choice = spec.labels ? best_gini_split(spec.x, *spec.labels, item.rows, all_features,
                                                   spec.n_classes)
                                 : best_mse_split(spec.x, *spec.targets, item.rows, all_features);
        }
        if (!choice.found) {
            make_leaf(spec, item.rows, tree.nodes[item.node]);
            continue;
        }

        std::vector<int> left_rows, right_rows;
        for (int r : item.rows) {
            if (spec.x(r, choice.feature) <= choice.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        int left_id = (int)tree.nodes.size();
        int right_id = left_id + 1;
        tree.nodes[item.node].feature = choice.feature;
        tree.nodes[item.node].threshold = choice.threshold;
        tree.nodes[item.node].left = left_id;
        tree.nodes[item.node].right = right_id;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();

        // Right pushed first so the left child is processed next; node ids
        // and RNG consumption then follow a fixed depth-first order.
        stack.push_back({std::move(right_rows), right_id});
        stack.push_back({std::move(left_rows), left_id});
    }
    return tree;
}

}  // namespace

RandomForest fit_classifier_forest(const Dataset& d, int n_trees, std::uint64_t seed) {
    d.validate();
    if (n_trees < 1) throw std::invalid_argument("fit_classifier_forest: n_trees >= 1");

    RandomForest f;
    f.mode = ForestMode::Classification;
    f.n_features = (int)d.dim();
    f.n_classes = d.n_classes;
    f.n_features_per_split = (int)std::ceil(std::sqrt(double(d.dim())));
    f.bootstrap = true;
    f.seed = seed;
    f.trees.resize(n_trees);

    Rng master(seed);
    BuildSpec spec{d.features, &d.labels, nullptr, d.n_classes, f.n_features_per_split};
    parallel_for((std::size_t)n_trees,
                 [&](std::size_t t) { f.trees[t] = build_tree(spec, true, master.child(t)); });
    return f;
}

RandomForest fit_regression_forest(const Matrix& x, const std::vector<double>& targets,
                                   int n_trees, std::uint64_t seed) {
    if (x.rows() == 0 || x.rows() != targets.size())
        throw std::invalid_argument("fit_regression_forest: bad shapes");
    for (double t : targets)
        if (!std::isfinite(t)) throw std::invalid_argument("fit_regression_forest: non-finite target");
    if (n_trees < 1) throw std::invalid_argument("fit_regression_forest: n_trees >= 1");

    RandomForest f;
    f.mode = ForestMode::Regression;
    f.n_features = (int)x.cols();
    f.n_classes = 0;
    f.n_features_per_split = (int)x.cols();
    f.bootstrap = true;
    f.seed = seed;
    f.trees.resize(n_trees);

    Rng master(seed);
    BuildSpec spec{x, nullptr, &targets, 0, 0};
    parallel_for((std::size_t)n_trees,
                 [&](std::size_t t) { f.trees[t] = build_tree(spec, true, master.child(t)); });
    return f;
}

namespace {

const TreeNode& leaf_for(const DecisionTree& tree, std::span<const double> x) {
    int id = 0;
    for (;;) {
        const TreeNode& node = tree.nodes[id];
        if (node.is_leaf()) return node;
        id = x[node.feature] <= node.threshold ? node.left : node.right;
    }
}

}  // namespace

std::vector<double> predict_proba(const RandomForest& f, std::span<const double> x) {
    if (f.mode != ForestMode::Classification)
        throw std::invalid_argument("predict_proba: forest is not a classifier");
    std::vector<double> acc(f.n_classes, 0.0);
    for (const auto& tree : f.trees) {
        const TreeNode& leaf = leaf_for(tree, x);
        double total = 0.0;
        for (double c : leaf.class_counts) total += c;
        for (int k = 0; k < f.n_classes; ++k) acc[k] += leaf.class_counts[k] / total;
    }
    for (double& v : acc) v /= double(f.trees.size());
    return acc;
}

double predict_value(const RandomForest& f, std::span<const double> x) {
    if (f.mode != ForestMode::Regression)
        throw std::invalid_argument("predict_value: forest is not a regressor");
    double acc = 0.0;
    for (const auto& tree : f.trees) acc += leaf_for(tree, x).value;
    return acc / double(f.trees.size());
}

Matrix predict_proba_batch_serial(const RandomForest& f, const Matrix& x) {
    Matrix out(x.rows(), f.n_classes);
    serial_for(x.rows(), [&](std::size_t i) { out.set_row(i, predict_proba(f, x.row(i))); });
    return out;
}

Matrix predict_proba_batch(const RandomForest& f, const Matrix& x) {
    Matrix out(x.rows(), f.n_classes);
    parallel_for(x.rows(), [&](std::size_t i) { out.set_row(i, predict_proba(f, x.row(i))); });
    return out;
}

std::vector<double> predict_value_batch_serial(const RandomForest& f, const Matrix& x) {
    std::vector<double> out(x.rows());
    serial_for(x.rows(), [&](std::size_t i) { out[i] = predict_value(f, x.row(i)); });
    return out;
}

std::vector<double> predict_value_batch(const RandomForest& f, const Matrix& x) {
    std::vector<double> out(x.rows());
    parallel_for(x.rows(), [&](std::size_t i) { out[i] = predict_value(f, x.row(i)); });
    return out;
}

std::size_t node_count(const RandomForest& f) {
    std::size_t n = 0;
    for (const auto& tree : f.trees) n += tree.nodes.size();
    return n;
}

DepthStats depth_stats(const RandomForest& f) {
    DepthStats s;
    double total = 0.0;
    for (const auto& tree : f.trees) {
        int tree_depth = 0;
        std::vector<std::pair<int, int>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [id, depth] = stack.back();
            stack.pop_back();
            const TreeNode& node = tree.nodes[id];
            if (node.is_leaf()) {
                tree_depth = std::max(tree_depth, depth);
            } else {
                stack.push_back({node.left, depth + 1});
                stack.push_back({node.right, depth + 1});
            }
        }
        s.max = std::max(s.max, tree_depth);
        total += tree_depth;
    }
    s.mean = f.trees.empty() ? 0.0 : total / double(f.trees.size());
    return s;
}

void to_json(nlohmann::json& j, const RandomForest& f) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : f.trees) {
        nlohmann::json feat = nlohmann::json::array(), thr = nlohmann::json::array(),
                       left = nlohmann::json::array(), right = nlohmann::json::array(),
                       value = nlohmann::json::array(), counts = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            feat.push_back(node.feature);
            thr.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            value.push_back(node.value);
            counts.push_back(node.class_counts);
        }
        trees.push_back({{"f", std::move(feat)},
                         {"t", std::move(thr)},
                         {"l", std::move(left)},
                         {"r", std::move(right)},
                         {"v", std::move(value)},
                         {"c", std::move(counts)}});
    }
    j = nlohmann::json{{"schema_version", 1},
                       {"kind", "forest"},
                       {"mode", f.mode == ForestMode::Classification ? "classification" : "regression"},
                       {"n_features", f.n_features},
                       {"n_classes", f.n_classes},
                       {"n_features_per_split", f.n_features_per_split},
                       {"bootstrap", f.bootstrap},
                       {"seed", f.seed},
                       {"trees", std::move(trees)}};
}

void from_json(const nlohmann::json& j, RandomForest& f) {
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("forest: unsupported schema version");
    std::string mode = j.at("mode").get<std::string>();
    f.mode = mode == "classification" ? ForestMode::Classification : ForestMode::Regression;
    j.at("n_features").get_to(f.n_features);
    j.at("n_classes").get_to(f.n_classes);
    j.at("n_features_per_split").get_to(f.n_features_per_split);
    j.at("bootstrap").get_to(f.bootstrap);
    j.at("seed").get_to(f.seed);
    f.trees.clear();
    for (const auto& jt : j.at("trees")) {
        DecisionTree tree;
        auto feat = jt.at("f").get<std::vector<int>>();
        auto thr = jt.at("t").get<std::vector<double>>();
        auto left = jt.at("l").get<std::vector<int>>();
        auto right = jt.at("r").get<std::vector<int>>();
        auto value = jt.at("v").get<std::vector<double>>();
        auto counts = jt.at("c").get<std::vector<std::vector<double>>>();
        tree.nodes.resize(feat.size());
        for (std::size_t i = 0; i < feat.size(); ++i) {
            tree.nodes[i].feature = feat[i];
            tree.nodes[i].threshold = thr[i];
            tree.nodes[i].left = left[i];
            tree.nodes[i].right = right[i];
            tree.nodes[i].value = value[i];
            tree.nodes[i].class_counts = counts[i];
        }
        f.trees.push_back(std::move(tree));
    }
}

void save_forest(const RandomForest& f, const std::string& path) {
    nlohmann::json j = f;
    write_text_file(path, j.dump());
}

RandomForest load_forest(const std::string& path) {
    auto j = nlohmann::json::parse(read_text_file(path));
    return j.get<RandomForest>();
}

}  // namespace tsc

#include "tsc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "tsc/rng.hpp"
#include "tsc/util.hpp"

namespace tsc {

void Dataset::validate() const {
    if (n() < 1 || dim() < 1) throw std::invalid_argument("Dataset: empty");
    if (n_classes < 2) throw std::invalid_argument("Dataset: n_classes must be >= 2");
    if (labels.size() != n()) throw std::invalid_argument("Dataset: label count mismatch");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= n_classes)
            throw std::invalid_argument("Dataset: label out of range at row " + std::to_string(i));
    for (double v : features.data())
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature value");
    if (!feature_names.empty() && feature_names.size() != dim())
        throw std::invalid_argument("Dataset: feature_names length mismatch");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = 0;
    for (; i < s.size(); ++i)
        if (!std::isdigit((unsigned char)s[i])) return false;
    return true;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: missing file: " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: empty file: " + path);

    const std::size_t n_cols = rows[0].size();
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() != n_cols)
            throw std::runtime_error("load_csv: row " + std::to_string(r + 1) +
                                     " has inconsistent column count");

    // Header detection: a first row with any non-numeric cell is a header.
    bool has_header = false;
    for (const auto& cell : rows[0]) {
        double tmp;
        if (!parse_double(cell, tmp)) {
            has_header = true;
            break;
        }
    }

    std::vector<std::string> names;
    std::size_t first_data = 0;
    if (has_header) {
        names = rows[0];
        first_data = 1;
        if (rows.size() < 2) throw std::runtime_error("load_csv: header but no data rows");
    }

    // Resolve the label column.
    std::size_t label_idx = n_cols;
    if (is_integer(label_column)) {
        label_idx = std::stoul(label_column);
        if (label_idx >= n_cols)
            throw std::runtime_error("load_csv: label column index out of range");
    } else {
        if (!has_header)
            throw std::runtime_error("load_csv: label column by name requires a header row");
        for (std::size_t c = 0; c < n_cols; ++c)
            if (names[c] == label_column) label_idx = c;
        if (label_idx == n_cols)
            throw std::runtime_error("load_csv: label column not found: " + label_column);
    }

    // A header cell above a numeric column can still be numeric; that case
    // is indistinguishable from data and parsed as data above.
    const std::size_t n = rows.size() - first_data;
    const std::size_t d = n_cols - 1;
    if (d < 1) throw std::runtime_error("load_csv: no feature columns");

    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);

    std::vector<std::string> label_order;            // first-appearance encoding
    std::map<std::string, int> label_map;

    for (std::size_t r = 0; r < n; ++r) {
        const auto& cells = rows[r + first_data];
        std::size_t jj = 0;
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == label_idx) continue;
            double v;
            if (!parse_double(cells[c], v) || !std::isfinite(v))
                throw std::runtime_error("load_csv: unparseable or non-finite cell at row " +
                                         std::to_string(r + first_data + 1) + ", column " +
                                         std::to_string(c + 1) + " ('" + cells[c] + "')");
            ds.features(r, jj++) = v;
        }
        const std::string& lab = cells[label_idx];
        auto it = label_map.find(lab);
        if (it == label_map.end()) {
            int id = (int)label_order.size();
            label_map.emplace(lab, id);
            label_order.push_back(lab);
            ds.labels[r] = id;
        } else {
            ds.labels[r] = it->second;
        }
    }

    if (label_order.size() < 2)
        throw std::runtime_error("load_csv: fewer than 2 distinct labels");
    ds.n_classes = (int)label_order.size();

    if (has_header) {
        for (std::size_t c = 0; c < n_cols; ++c)
            if (c != label_idx) ds.feature_names.push_back(names[c]);
    }
    ds.metadata["label_encoding"] = label_order;
    ds.metadata["source"] = path;
    ds.validate();
    return ds;
}

std::vector<Dataset> split(const Dataset& d, const std::vector<double>& fractions,
                           std::uint64_t seed) {
    if (fractions.empty()) throw std::invalid_argument("split: no fractions");
    double sum = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw std::invalid_argument("split: fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split: fractions must sum to 1");

    const std::size_t n = d.n();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
        std::size_t j = rng.uniform_int(i);
        std::swap(perm[i - 1], perm[j]);
    }

    std::vector<std::size_t> bounds{0};
    double cum = 0.0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        cum += fractions[k];
        bounds.push_back(k + 1 == fractions.size() ? n : (std::size_t)std::llround(cum * double(n)));
    }

    std::vector<Dataset> parts;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        std::size_t lo = bounds[k], hi = bounds[k + 1];
        if (hi <= lo) throw std::invalid_argument("split: resulting part " + std::to_string(k) + " is empty");
        Dataset part;
        part.features = Matrix(hi - lo, d.dim());
        part.labels.resize(hi - lo);
        part.n_classes = d.n_classes;
        part.feature_names = d.feature_names;
        part.metadata = d.metadata;
        part.metadata["split_part"] = k;
        part.metadata["split_seed"] = seed;
        for (std::size_t i = lo; i < hi; ++i) {
            part.features.set_row(i - lo, d.features.row(perm[i]));
            part.labels[i - lo] = d.labels[perm[i]];
        }
        parts.push_back(std::move(part));
    }
    return parts;
}

Scaler fit_scaler(const Dataset& d) {
    if (d.n() < 2) throw std::invalid_argument("fit_scaler: need at least 2 rows");
    const std::size_t n = d.n(), dim = d.dim();
    Scaler s;
    s.mean.assign(dim, 0.0);
    s.stddev.assign(dim, 1.0);
    s.constant_flag.assign(dim, false);
    for (std::size_t j = 0; j < dim; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += d.features(i, j);
        m /= double(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dv = d.features(i, j) - m;
            var += dv * dv;
        }
        var /= double(n);  // population variance: two points scale to -1, +1
        s.mean[j] = m;
        if (var <= 0.0) {
            s.constant_flag[j] = true;
            s.stddev[j] = 1.0;
        } else {
            s.stddev[j] = std::sqrt(var);
        }
    }
    return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = s.constant_flag[j] ? 0.0 : (x(i, j) - s.mean[j]) / s.stddev[j];
    return out;
}

Dataset apply_scaler(const Scaler& s, const Dataset& d) {
    Dataset out = d;
    out.features = apply_scaler(s, d.features);
    out.metadata["standardized"] = true;
    return out;
}

Matrix invert_scaler(const Scaler& s, const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = s.constant_flag[j] ? s.mean[j] : x(i, j) * s.stddev[j] + s.mean[j];
    return out;
}

ClassPrior class_prior(const Dataset& d) {
    d.validate();
    ClassPrior prior;
    prior.p.assign(d.n_classes, 0.0);
    for (int lab : d.labels) prior.p[lab] += 1.0;
    for (double& v : prior.p) v /= double(d.n());
    return prior;
}

double benchmark_bayes_accuracy(int k, double separation) {
    // Interior classes are bounded by midpoints on both sides; edge classes
    // on one side only. Marginal along axis 0 for class j is N(j*sep, 1).
    double phi = normal_cdf(separation / 2.0);
    if (k == 2) return phi;
    double interior = 2.0 * phi - 1.0;
    return (2.0 * phi + double(k - 2) * interior) / double(k);
}

int benchmark_bayes_predict(std::span<const double> x, int k, double separation) {
    if (separation <= 0.0) return 0;
    int best = (int)std::llround(x[0] / separation);
    return std::clamp(best, 0, k - 1);
}

Dataset make_synthetic_benchmark(std::size_t n, std::size_t d, int k, double separation,
                                 std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_synthetic_benchmark: k >= 2 required");
    if (n < std::size_t(k) * 4) throw std::invalid_argument("make_synthetic_benchmark: n >= 4k required");
    if (d < 2) throw std::invalid_argument("make_synthetic_benchmark: d >= 2 required");
    if (separation <= 0.0) throw std::invalid_argument("make_synthetic_benchmark: separation > 0");

    // Within-class bimodality lives on axis 1 and is identical across
    // classes, so it cancels out of the likelihood ratio and the Bayes rule
    // stays the nearest-center rule along axis 0.
    const double offset = 1.5 * separation;

    Dataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    ds.n_classes = k;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        int cls = (int)rng.uniform_int((std::uint64_t)k);
        double side = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        ds.labels[i] = cls;
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = rng.normal();
        ds.features(i, 0) += double(cls) * separation;
        ds.features(i, 1) += side * offset;
    }
    ds.metadata["benchmark"] = {{"n", n},
                                {"d", d},
                                {"k", k},
                                {"separation", separation},
                                {"component_offset", offset},
                                {"seed", seed}};
    ds.metadata["bayes_accuracy"] = benchmark_bayes_accuracy(k, separation);
    ds.validate();
    return ds;
}

static std::vector<std::vector<double>> columns_of(const Matrix& m) {
    std::vector<std::vector<double>> cols(m.cols(), std::vector<double>(m.rows()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) cols[j][i] = m(i, j);
    return cols;
}

void to_json(nlohmann::json& j, const Dataset& d) {
    j = nlohmann::json{{"schema_version", 1},
                       {"kind", "dataset"},
                       {"n_classes", d.n_classes},
                       {"columns", columns_of(d.features)},
                       {"labels", d.labels},
                       {"feature_names", d.feature_names},
                       {"metadata", d.metadata}};
}

void from_json(const nlohmann::json& j, Dataset& d) {
    if (j.at("schema_version").get<int>() != 1)
        throw std::runtime_error("dataset: unsupported schema version");
    auto cols = j.at("columns").get<std::vector<std::vector<double>>>();
    std::size_t n = cols.empty() ? 0 : cols[0].size();
    d.features = Matrix(n, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c].size() != n) throw std::runtime_error("dataset: ragged columns");
        for (std::size_t i = 0; i < n; ++i) d.features(i, c) = cols[c][i];
    }
    j.at("labels").get_to(d.labels);
    j.at("n_classes").get_to(d.n_classes);
    j.at("feature_names").get_to(d.feature_names);
    d.metadata = j.at("metadata");
    d.validate();
}

void to_json(nlohmann::json& j, const Scaler& s) {
    std::vector<int> flags(s.constant_flag.begin(), s.constant_flag.end());
    j = nlohmann::json{{"mean", s.mean}, {"stddev", s.stddev}, {"constant", flags}};
}

void from_json(const nlohmann::json& j, Scaler& s) {
    j.at("mean").get_to(s.mean);
    j.at("stddev").get_to(s.stddev);
    auto flags = j.at("constant").get<std::vector<int>>();
    s.constant_flag.assign(flags.begin(), flags.end());
}

void save_dataset(const Dataset& d, const std::string& path) {
    nlohmann::json j = d;
    write_text_file(path, j.dump());
}

Dataset load_dataset(const std::string& path) {
    auto j = nlohmann::json::parse(read_text_file(path));
    return j.get<Dataset>();
}

}  // namespace tsc

#ifndef SPARSE_AE_SWEEP_HPP
#define SPARSE_AE_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "data.hpp"
#include "io.hpp"
#include "optimizer.hpp"
#include "regularizers.hpp"

namespace sparse_ae {

/// Environment variable naming the directory that holds the datasets.
inline constexpr const char* kDataRootEnv = "SPARSE_AE_DATA";

enum class DataSource { MNIST, CIFAR10, Synthetic, Strokes, CSV };

inline std::string to_string(DataSource s) {
    switch (s) {
        case DataSource::MNIST: return "mnist";
        case DataSource::CIFAR10: return "cifar10";
        case DataSource::Synthetic: return "synthetic";
        case DataSource::Strokes: return "strokes";
        case DataSource::CSV: return "csv";
    }
    return "?";
}

inline DataSource parse_data_source(std::string_view text) {
    const std::string t = boost::algorithm::to_lower_copy(std::string(text));
    for (DataSource s : {DataSource::MNIST, DataSource::CIFAR10, DataSource::Synthetic, DataSource::Strokes, DataSource::CSV})
        if (to_string(s) == t) return s;
    throw std::invalid_argument("unknown data source '" + std::string(text) + "'");
}

enum class Normalization { PerSample, PerFeature, None };

inline std::string to_string(Normalization n) {
    switch (n) {
        case Normalization::PerSample: return "per_sample";
        case Normalization::PerFeature: return "per_feature";
        case Normalization::None: return "none";
    }
    return "?";
}

inline Normalization parse_normalization(std::string_view text) {
    for (Normalization n : {Normalization::PerSample, Normalization::PerFeature, Normalization::None})
        if (to_string(n) == text) return n;
    throw std::invalid_argument("unknown standardize mode '" + std::string(text) + "'");
}

struct DataSpec {
    DataSource source = DataSource::MNIST;
    std::string root;            ///< empty: take $SPARSE_AE_DATA
    std::string mnist_images;    ///< empty: <root>/mnist/train-images-idx3-ubyte
    std::vector<std::string> cifar_batches;  ///< empty: <root>/cifar-10-batches-bin/data_batch_{1..5}.bin
    std::string csv;
    Eigen::Index num_samples = 10000;
    Eigen::Index dim = 16;       ///< synthetic only
    std::size_t patch = 8;       ///< CIFAR only
    double std_floor = 0.1;
    Normalization standardize = Normalization::PerSample;
    std::uint64_t seed = 1234;
    /// When the MNIST files are missing: "strokes" substitutes the stroke surrogate, "none" fails.
    std::string fallback = "none";
};

struct SweepSpec {
    std::vector<ObjectiveKind> models;
    std::vector<ActivationTag> activations;
    std::vector<double> sigma2_grid;
    ConstraintKind constraint = ConstraintKind::unit_norm();
    TrainConfig base;  ///< objective kind/coeff and activation are overwritten per cell
    DataSpec data;
    std::string output_dir = "results";
    int workers = 1;

    void validate() const {
        if (models.empty()) throw std::invalid_argument("sweep: models must be nonempty");
        if (activations.empty()) throw std::invalid_argument("sweep: activations must be nonempty");
        if (sigma2_grid.empty()) throw std::invalid_argument("sweep: sigma2_grid must be nonempty");
        for (double s : sigma2_grid)
            if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("sweep: sigma2_grid values must be >= 0");
        if (workers < 1) throw std::invalid_argument("sweep: workers must be >= 1");
        base.validate();
    }
};

/// The coefficient grid used in the original experiments (12 values).
inline std::vector<double> full_sigma2_grid() {
    return {0.0, 0.001, 0.01, 0.04, 0.09, 0.16, 0.25, 0.36, 0.49, 0.64, 0.81, 1.0};
}

/// Reduced grid of the desk-scale profile.
inline std::vector<double> desk_sigma2_grid() { return {0.0, 0.01, 0.09, 0.25, 0.49, 1.0}; }

/// Desk-scale profile: m=256, N=10000, 15 epochs, batch 50, momentum 0.9, lr 0.001.
inline SweepSpec desk_profile() {
    SweepSpec s;
    s.sigma2_grid = desk_sigma2_grid();
    s.base.epochs = 15;
    s.base.batch_size = 50;
    s.base.momentum = 0.9;
    s.base.learning_rate = 0.001;
    s.base.hidden_units = 256;
    s.base.seed = 42;
    s.data.num_samples = 10000;
    return s;
}

// ---------------------------------------------------------------------------
// Configuration file: INI sections [sweep], [train], [data]; keys are field names.

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::algorithm::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

template <typename T>
T get_or(const boost::property_tree::ptree& pt, const std::string& key, T fallback) {
    return pt.get<T>(boost::property_tree::ptree::path_type(key, '.'), fallback);
}

}  // namespace detail

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "sweep.models", "sweep.activations", "sweep.sigma2_grid", "sweep.constraint", "sweep.output_dir",
        "sweep.workers", "train.epochs", "train.batch_size", "train.learning_rate", "train.momentum",
        "train.hidden_units", "train.seed", "train.dae_samples", "train.sae_rho", "train.c1_q", "train.c1_p",
        "train.c2_f", "train.delta_min", "data.source", "data.root", "data.mnist_images", "data.cifar_batches",
        "data.csv", "data.num_samples", "data.dim", "data.patch", "data.std_floor", "data.standardize", "data.seed",
        "data.fallback"};
    return keys;
}

/// Applies "section.key=value" overrides on top of a parsed tree.
inline void apply_overrides(boost::property_tree::ptree& pt, const std::vector<std::string>& overrides) {
    const auto& keys = known_config_keys();
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("override '" + o + "' is not key=value");
        std::string key = boost::algorithm::trim_copy(o.substr(0, eq));
        const std::string value = boost::algorithm::trim_copy(o.substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw std::invalid_argument("unknown configuration key '" + key + "'");
        pt.put(boost::property_tree::ptree::path_type(key, '.'), value);
    }
}

inline SweepSpec sweep_spec_from_tree(const boost::property_tree::ptree& pt) {
    for (const auto& section : pt) {
        for (const auto& kv : section.second) {
            const std::string key = section.first + "." + kv.first;
            const auto& keys = known_config_keys();
            if (std::find(keys.begin(), keys.end(), key) == keys.end())
                throw std::invalid_argument("unknown configuration key '" + key + "'");
        }
    }
    SweepSpec s = desk_profile();
    using detail::get_or;
    using detail::split_list;
    s.models.clear();
    for (const auto& m : split_list(get_or<std::string>(pt, "sweep.models", ""))) s.models.push_back(parse_objective(m));
    s.activations.clear();
    for (const auto& a : split_list(get_or<std::string>(pt, "sweep.activations", "")))
        s.activations.push_back(parse_activation(a));
    if (pt.get_optional<std::string>("sweep.sigma2_grid")) {
        s.sigma2_grid.clear();
        const std::string grid = pt.get<std::string>("sweep.sigma2_grid");
        if (grid == "full")
            s.sigma2_grid = full_sigma2_grid();
        else if (grid == "desk")
            s.sigma2_grid = desk_sigma2_grid();
        else
            for (const auto& v : split_list(grid)) s.sigma2_grid.push_back(parse_double(v));
    }
    s.constraint = parse_constraint(get_or<std::string>(pt, "sweep.constraint", to_string(s.constraint)));
    s.output_dir = get_or<std::string>(pt, "sweep.output_dir", s.output_dir);
    s.workers = get_or<int>(pt, "sweep.workers", s.workers);

    TrainConfig& b = s.base;
    b.epochs = get_or<int>(pt, "train.epochs", b.epochs);
    b.batch_size = get_or<int>(pt, "train.batch_size", b.batch_size);
    b.learning_rate = get_or<double>(pt, "train.learning_rate", b.learning_rate);
    b.momentum = get_or<double>(pt, "train.momentum", b.momentum);
    b.hidden_units = get_or<int>(pt, "train.hidden_units", b.hidden_units);
    b.seed = get_or<std::uint64_t>(pt, "train.seed", b.seed);
    b.objective.dae_samples = get_or<int>(pt, "train.dae_samples", b.objective.dae_samples);
    b.objective.sae_rho = get_or<double>(pt, "train.sae_rho", b.objective.sae_rho);
    b.objective.c1_q = get_or<int>(pt, "train.c1_q", b.objective.c1_q);
    b.objective.c1_p = get_or<int>(pt, "train.c1_p", b.objective.c1_p);
    b.objective.c2_f = parse_c2_function(get_or<std::string>(pt, "train.c2_f", to_string(b.objective.c2_f)));
    if (auto dm = pt.get_optional<double>("train.delta_min")) b.activation.delta_min = *dm;
    b.constraint = s.constraint;

    DataSpec& d = s.data;
    d.source = parse_data_source(get_or<std::string>(pt, "data.source", to_string(d.source)));
    d.root = get_or<std::string>(pt, "data.root", d.root);
    d.mnist_images = get_or<std::string>(pt, "data.mnist_images", d.mnist_images);
    if (auto c = pt.get_optional<std::string>("data.cifar_batches")) d.cifar_batches = split_list(*c);
    d.csv = get_or<std::string>(pt, "data.csv", d.csv);
    d.num_samples = get_or<Eigen::Index>(pt, "data.num_samples", d.num_samples);
    d.dim = get_or<Eigen::Index>(pt, "data.dim", d.dim);
    d.patch = get_or<std::size_t>(pt, "data.patch", d.patch);
    // Floor defaults: 0.1 for MNIST-like images, 0 otherwise.
    const bool image_like = d.source == DataSource::MNIST || d.source == DataSource::Strokes;
    d.std_floor = get_or<double>(pt, "data.std_floor", image_like ? 0.1 : 0.0);
    d.standardize = parse_normalization(get_or<std::string>(
        pt, "data.standardize", d.source == DataSource::Synthetic ? "none" : to_string(d.standardize)));
    d.seed = get_or<std::uint64_t>(pt, "data.seed", d.seed);
    d.fallback = get_or<std::string>(pt, "data.fallback", d.fallback);
    if (d.fallback != "none" && d.fallback != "strokes")
        throw std::invalid_argument("data.fallback must be 'none' or 'strokes'");
    s.validate();
    return s;
}

inline SweepSpec load_sweep_spec(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(path.string(), pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw IoError(path, e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    apply_overrides(pt, overrides);
    return sweep_spec_from_tree(pt);
}

// ---------------------------------------------------------------------------
// Datasets

inline std::filesystem::path data_root(const DataSpec& d) {
    if (!d.root.empty()) return d.root;
    if (const char* env = std::getenv(kDataRootEnv)) return env;
    return {};
}

inline std::filesystem::path mnist_images_path(const DataSpec& d) {
    if (!d.mnist_images.empty()) return d.mnist_images;
    const auto root = data_root(d);
    return root.empty() ? std::filesystem::path{} : root / "mnist" / "train-images-idx3-ubyte";
}

inline std::vector<std::filesystem::path> cifar_batch_paths(const DataSpec& d) {
    std::vector<std::filesystem::path> out(d.cifar_batches.begin(), d.cifar_batches.end());
    if (out.empty()) {
        const auto root = data_root(d);
        if (root.empty()) return out;
        for (int i = 1; i <= 5; ++i) out.push_back(root / "cifar-10-batches-bin" / ("data_batch_" + std::to_string(i) + ".bin"));
    }
    return out;
}

inline Dataset normalize(Dataset ds, const DataSpec& d) {
    switch (d.standardize) {
        case Normalization::PerSample: return standardize(std::move(ds), d.std_floor, StandardizeMode::PerSample);
        case Normalization::PerFeature: return standardize(std::move(ds), d.std_floor, StandardizeMode::PerFeature);
        case Normalization::None: return ds;
    }
    return ds;
}

/// Loads and normalizes the dataset named by `d`. The returned provenance tells a surrogate apart.
inline Dataset load_dataset(const DataSpec& d) {
    Rng rng(d.seed);
    switch (d.source) {
        case DataSource::MNIST: {
            const auto path = mnist_images_path(d);
            if (path.empty() || !std::filesystem::exists(path)) {
                if (d.fallback == "strokes") return normalize(synth_strokes(d.num_samples, rng), d);
                throw IoError(path.empty() ? std::filesystem::path("<unset>") : path,
                              std::string("MNIST images not found; set data.mnist_images or $") + kDataRootEnv);
            }
            return normalize(take_rows(load_mnist_idx(path, std::nullopt), d.num_samples), d);
        }
        case DataSource::CIFAR10: {
            const auto paths = cifar_batch_paths(d);
            if (paths.empty()) throw std::invalid_argument(std::string("CIFAR-10 batches not set; set data.cifar_batches or $") + kDataRootEnv);
            return normalize(load_cifar10_patches(paths, d.patch, static_cast<std::size_t>(d.num_samples), rng), d);
        }
        case DataSource::Synthetic: return normalize(synth_whitened_gaussian(d.dim, d.num_samples, rng), d);
        case DataSource::Strokes: return normalize(synth_strokes(d.num_samples, rng), d);
        case DataSource::CSV: return normalize(take_rows(read_dataset_csv(d.csv), d.num_samples), d);
    }
    throw std::invalid_argument("load_dataset: bad source");
}

// ---------------------------------------------------------------------------
// Sweep execution

struct SweepRow {
    ObjectiveKind model = ObjectiveKind::AE;
    ActivationTag activation = ActivationTag::ReLU;
    double sigma2 = 0.0;
    ConstraintKind constraint;
    double act_fraction = 0.0;
    double dead_fraction = 0.0;
    double recon_loss = 0.0;
    std::uint64_t seed = 0;
    int epochs = 0;
    double wall_seconds = 0.0;
    bool ok = true;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    Provenance provenance = Provenance::RAW;
};

inline std::string cell_name(const SweepRow& r) {
    std::string c = to_string(r.constraint);
    std::replace(c.begin(), c.end(), ':', '-');
    return to_string(r.model) + "_" + to_string(r.activation) + "_s2-" + format_double(r.sigma2) + "_" + c;
}

/// Cells in table order: model, then activation, then sigma^2.
inline std::vector<SweepRow> sweep_cells(const SweepSpec& spec) {
    std::vector<SweepRow> cells;
    for (ObjectiveKind m : spec.models)
        for (ActivationTag a : spec.activations)
            for (double s2 : spec.sigma2_grid) {
                SweepRow r;
                r.model = m;
                r.activation = a;
                r.sigma2 = s2;
                r.constraint = spec.constraint;
                r.seed = spec.base.seed;
                r.epochs = spec.base.epochs;
                cells.push_back(r);
            }
    return cells;
}

inline TrainConfig cell_config(const SweepSpec& spec, const SweepRow& cell) {
    TrainConfig c = spec.base;
    c.constraint = spec.constraint;
    c.objective.kind = cell.model;
    c.objective.coeff = cell.sigma2;
    const double delta = c.activation.delta_min;
    const bool custom_delta = delta != ActivationKind::of(c.activation.tag).delta_min;
    c.activation = ActivationKind::of(cell.activation);
    if (custom_delta) c.activation.delta_min = delta;
    return c;
}

/// Trains one cell; failures are captured in the row instead of thrown.
inline SweepRow run_cell(const SweepSpec& spec, const Dataset& data, SweepRow cell, TrainHistory* history_out) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const TrainHistory h = train(cell_config(spec, cell), data);
        if (!h.records.empty()) {
            const EpochRecord& last = h.records.back();
            cell.act_fraction = last.avg_activation_fraction;
            cell.dead_fraction = last.dead_unit_fraction;
            cell.recon_loss = last.recon_loss;
        } else {
            const EpochRecord init = Trainer(cell_config(spec, cell), data).evaluate();
            cell.act_fraction = init.avg_activation_fraction;
            cell.dead_fraction = init.dead_unit_fraction;
            cell.recon_loss = init.recon_loss;
        }
        if (history_out) *history_out = h;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.act_fraction = cell.dead_fraction = cell.recon_loss = std::numeric_limits<double>::quiet_NaN();
    }
    cell.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cell;
}

inline const char* kSweepCsvHeader = "model,activation,sigma2,constraint,act_fraction,dead_fraction,recon_loss,seed";

inline std::string table_csv(const SweepResult& result) {
    std::string out = std::string(kSweepCsvHeader) + "\n";
    for (const SweepRow& r : result.rows) {
        out += to_string(r.model) + "," + to_string(r.activation) + "," + format_double(r.sigma2) + "," +
               to_string(r.constraint) + "," + format_double(r.act_fraction) + "," + format_double(r.dead_fraction) +
               "," + format_double(r.recon_loss) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

/// Writes the aggregate table: fixed header, shortest round-trip floats, '\n' line endings.
inline void emit_table(const SweepResult& result, const std::filesystem::path& path) {
    write_text(path, table_csv(result));
}

/// Parses a table written by emit_table. Failed cells read back with NaN metrics.
inline SweepResult read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string line;
    if (!std::getline(in, line) || line != kSweepCsvHeader) throw IoError(path, "missing or unexpected header");
    SweepResult res;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) throw IoError(path, "line " + std::to_string(lineno) + ": expected 8 fields");
        SweepRow r;
        try {
            r.model = parse_objective(f[0]);
            r.activation = parse_activation(f[1]);
            r.sigma2 = parse_double(f[2]);
            r.constraint = parse_constraint(f[3]);
            r.act_fraction = parse_double(f[4]);
            r.dead_fraction = parse_double(f[5]);
            r.recon_loss = parse_double(f[6]);
            r.seed = std::stoull(std::string(f[7]));
        } catch (const std::exception& e) {
            throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
        }
        r.ok = std::isfinite(r.act_fraction);
        res.rows.push_back(std::move(r));
    }
    return res;
}

struct SweepOptions {
    bool write_files = true;
    /// Invoked after each finished cell (from worker threads, serialized).
    std::function<void(const SweepRow&)> on_cell;
};

/**
 * Trains one model per grid cell on a shared dataset. Every cell starts from
 * the same seed, so cells differ only in model, activation and coefficient.
 * Writes <output_dir>/histories/<cell>.json, <output_dir>/results.csv and
 * <output_dir>/timing.json (the only file with wall-clock data).
 */
inline SweepResult run_sweep(const SweepSpec& spec, const Dataset& data, const SweepOptions& opt = {}) {
    spec.validate();
    const std::vector<SweepRow> cells = sweep_cells(spec);
    SweepResult result;
    result.provenance = data.provenance;
    result.rows.resize(cells.size());
    std::vector<TrainHistory> histories(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            result.rows[i] = run_cell(spec, data, cells[i], &histories[i]);
            if (opt.write_files && result.rows[i].ok) {
                nlohmann::json j;
                j["config"] = config_to_json(cell_config(spec, cells[i]));
                j["dataset"] = {{"provenance", to_string(data.provenance)}, {"N", data.size()}, {"n", data.dim()}};
                j["history"] = history_to_json(histories[i]);
                write_text(std::filesystem::path(spec.output_dir) / "histories" / (cell_name(cells[i]) + ".json"),
                           j.dump(1) + "\n");
            }
            histories[i] = {};
            if (opt.on_cell) {
                std::lock_guard<std::mutex> lock(report_mutex);
                opt.on_cell(result.rows[i]);
            }
        }
    };
    const int threads = std::min<int>(spec.workers, static_cast<int>(cells.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (opt.write_files) {
        const std::filesystem::path dir(spec.output_dir);
        emit_table(result, dir / "results.csv");
        nlohmann::json timing = nlohmann::json::array();
        for (const SweepRow& r : result.rows) {
            nlohmann::json t = {{"cell", cell_name(r)}, {"wall_seconds", r.wall_seconds}, {"epochs", r.epochs},
                                {"status", r.ok ? "ok" : "failed"}};
            if (!r.ok) t["error"] = r.error;
            timing.push_back(std::move(t));
        }
        write_text(dir / "timing.json", timing.dump(1) + "\n");
    }
    return result;
}

inline SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& opt = {}) {
    return run_sweep(spec, load_dataset(spec.data), opt);
}

// ---------------------------------------------------------------------------
// Trend statistics

/// Ranks starting at 1; ties share the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation (Pearson correlation of average ranks). NaN when either side is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length series");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

/// Rows of one (model, activation) series, ordered by sigma^2.
inline std::vector<SweepRow> series(const SweepResult& r, ObjectiveKind model, ActivationTag act) {
    std::vector<SweepRow> out;
    for (const SweepRow& row : r.rows)
        if (row.model == model && row.activation == act) out.push_back(row);
    std::stable_sort(out.begin(), out.end(), [](const SweepRow& a, const SweepRow& b) { return a.sigma2 < b.sigma2; });
    return out;
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_SWEEP_HPP

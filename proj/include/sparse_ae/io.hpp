#ifndef SPARSE_AE_IO_HPP
#define SPARSE_AE_IO_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "data.hpp"
#include "numerics.hpp"
#include "optimizer.hpp"

namespace sparse_ae {

/// I/O failure carrying the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(path.string() + ": " + what), path_(path) {}
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(path.parent_path(), "cannot create directory: " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    return out;
}

/// One sample per line, comma separated, shortest round-trip floats, no header.
inline void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    std::string line;
    for (Eigen::Index i = 0; i < data.samples.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < data.samples.cols(); ++j) {
            if (j) line += ',';
            line += format_double(data.samples(i, j));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError(path, "write failed");
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::vector<double> values;
    Eigen::Index cols = -1;
    Eigen::Index rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (cols < 0) cols = static_cast<Eigen::Index>(fields.size());
        if (static_cast<Eigen::Index>(fields.size()) != cols)
            throw IoError(path, "line " + std::to_string(rows + 1) + " has " + std::to_string(fields.size()) +
                                    " fields, expected " + std::to_string(cols));
        for (auto f : fields) {
            try {
                values.push_back(parse_double(f));
            } catch (const std::invalid_argument& e) {
                throw IoError(path, "line " + std::to_string(rows + 1) + ": " + e.what());
            }
        }
        ++rows;
    }
    if (rows == 0) throw IoError(path, "no samples");
    Dataset ds;
    ds.provenance = Provenance::RAW;
    ds.samples = Eigen::Map<const Matrix>(values.data(), rows, cols);
    return ds;
}

inline nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Vector vector_from_json(const nlohmann::json& a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::vector<double>(m.data(), m.data() + m.size());
    return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw std::invalid_argument("matrix JSON: size mismatch");
    return Eigen::Map<const Matrix>(data.data(), rows, cols);
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["momentum"] = c.momentum;
    j["constraint"] = to_string(c.constraint);
    j["model"] = to_string(c.objective.kind);
    j["coeff"] = c.objective.coeff;
    j["dae_samples"] = c.objective.dae_samples;
    j["sae_rho"] = c.objective.sae_rho;
    j["c1_q"] = c.objective.c1_q;
    j["c1_p"] = c.objective.c1_p;
    j["c2_f"] = to_string(c.objective.c2_f);
    j["activation"] = to_string(c.activation.tag);
    j["delta_min"] = c.activation.delta_min;
    j["hidden_units"] = c.hidden_units;
    j["seed"] = c.seed;
    return j;
}

inline nlohmann::json history_to_json(const TrainHistory& h, bool include_params = true) {
    nlohmann::json j;
    nlohmann::json recs = nlohmann::json::array();
    for (const EpochRecord& r : h.records) {
        nlohmann::json e;
        e["epoch"] = r.epoch;
        e["recon_loss"] = r.recon_loss;
        e["reg_value"] = r.reg_value;
        e["avg_activation_fraction"] = r.avg_activation_fraction;
        e["dead_unit_fraction"] = r.dead_unit_fraction;
        e["mean_pre_activation"] = r.mean_pre_activation;
        e["per_unit_mean_a"] = vector_to_json(r.per_unit_mean_a);
        e["per_unit_var_a"] = vector_to_json(r.per_unit_var_a);
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    if (include_params) {
        j["final_params"]["W"] = matrix_to_json(h.final_params.W);
        j["final_params"]["b_enc"] = vector_to_json(h.final_params.b_enc);
        j["final_params"]["b_dec"] = vector_to_json(h.final_params.b_dec);
    }
    return j;
}

inline TrainHistory history_from_json(const nlohmann::json& j) {
    TrainHistory h;
    for (const auto& e : j.at("records")) {
        EpochRecord r;
        r.epoch = e.at("epoch").get<int>();
        r.recon_loss = e.at("recon_loss").get<double>();
        r.reg_value = e.at("reg_value").get<double>();
        r.avg_activation_fraction = e.at("avg_activation_fraction").get<double>();
        r.dead_unit_fraction = e.at("dead_unit_fraction").get<double>();
        r.mean_pre_activation = e.at("mean_pre_activation").get<double>();
        r.per_unit_mean_a = vector_from_json(e.at("per_unit_mean_a"));
        r.per_unit_var_a = vector_from_json(e.at("per_unit_var_a"));
        h.records.push_back(std::move(r));
    }
    if (j.contains("final_params")) {
        const auto& p = j["final_params"];
        h.final_params.W = matrix_from_json(p.at("W"));
        h.final_params.b_enc = vector_from_json(p.at("b_enc"));
        h.final_params.b_dec = vector_from_json(p.at("b_dec"));
    }
    return h;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out = open_for_write(path);
    out << text;
    if (!out) throw IoError(path, "write failed");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace sparse_ae

#endif  // SPARSE_AE_IO_HPP

// sparse-ae: sweeps, single training runs, verification suite, history inspection.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparse_ae/sparse_ae.hpp"

namespace fs = std::filesystem;
using namespace sparse_ae;

namespace {

struct CommonConfigArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string data_root;
    std::string output_dir;
};

void add_config_args(CLI::App* cmd, CommonConfigArgs& a) {
    cmd->add_option("config", a.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--set", a.overrides, "Override a configuration key, e.g. --set train.epochs=5");
    cmd->add_option("--data-root", a.data_root, std::string("Dataset root directory (default: $") + kDataRootEnv + ")");
    cmd->add_option("--output", a.output_dir, "Output directory (overrides sweep.output_dir)");
}

SweepSpec resolve_spec(const CommonConfigArgs& a) {
    std::vector<std::string> overrides = a.overrides;
    if (!a.data_root.empty()) overrides.push_back("data.root=" + a.data_root);
    if (!a.output_dir.empty()) overrides.push_back("sweep.output_dir=" + a.output_dir);
    return load_sweep_spec(a.config, overrides);
}

Dataset load_and_describe(const SweepSpec& spec) {
    Dataset d = load_dataset(spec.data);
    std::cerr << "dataset: " << to_string(d.provenance) << " N=" << d.size() << " n=" << d.dim();
    if (spec.data.source == DataSource::MNIST && d.provenance == Provenance::STROKES)
        std::cerr << " (MNIST files not found; stroke surrogate in use)";
    std::cerr << "\n";
    return d;
}

int cmd_sweep(const CommonConfigArgs& a, int workers) {
    SweepSpec spec = resolve_spec(a);
    if (workers > 0) spec.workers = workers;
    const Dataset data = load_and_describe(spec);
    SweepOptions opt;
    opt.on_cell = [](const SweepRow& r) {
        std::cerr << cell_name(r) << ": ";
        if (r.ok)
            std::cerr << "act_fraction=" << format_double(r.act_fraction) << " dead=" << format_double(r.dead_fraction)
                      << " recon_loss=" << format_double(r.recon_loss);
        else
            std::cerr << "FAILED: " << r.error;
        std::cerr << " (" << r.wall_seconds << " s)\n";
    };
    const SweepResult res = run_sweep(spec, data, opt);
    std::cout << table_csv(res);
    std::cerr << "wrote " << (fs::path(spec.output_dir) / "results.csv").string() << "\n";
    for (const SweepRow& r : res.rows)
        if (!r.ok) return 1;
    return 0;
}

int cmd_train(const CommonConfigArgs& a, const std::string& model, const std::string& activation, double sigma2,
              bool sigma2_set, const std::string& history_out) {
    SweepSpec spec = resolve_spec(a);
    SweepRow cell = sweep_cells(spec).front();
    if (!model.empty()) cell.model = parse_objective(model);
    if (!activation.empty()) cell.activation = parse_activation(activation);
    if (sigma2_set) cell.sigma2 = sigma2;
    const Dataset data = load_and_describe(spec);
    const TrainConfig config = cell_config(spec, cell);
    std::cerr << "training " << cell_name(cell) << "\n";
    const TrainHistory h = train(config, data, {});
    for (const EpochRecord& r : h.records)
        std::cout << "epoch " << r.epoch << " recon_loss=" << format_double(r.recon_loss)
                  << " reg=" << format_double(r.reg_value) << " act_fraction=" << format_double(r.avg_activation_fraction)
                  << " dead=" << format_double(r.dead_unit_fraction)
                  << " mean_a=" << format_double(r.mean_pre_activation) << "\n";
    const fs::path out = history_out.empty() ? fs::path(spec.output_dir) / (cell_name(cell) + ".json") : fs::path(history_out);
    nlohmann::json j;
    j["config"] = config_to_json(config);
    j["dataset"] = {{"provenance", to_string(data.provenance)}, {"N", data.size()}, {"n", data.dim()}};
    j["history"] = history_to_json(h);
    write_text(out, j.dump(1) + "\n");
    std::cerr << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_verify(const std::string& scale, std::uint64_t seed, const std::string& out_path) {
    std::FILE* sink = nullptr;
    if (!out_path.empty()) {
        sink = std::fopen(out_path.c_str(), "w");
        if (!sink) throw IoError(out_path, "cannot open for writing");
    }
    int failures = 0;
    run_verification_suite(parse_suite_scale(scale), seed, [&](const CheckReport& r) {
        const std::string line = r.to_json_line();
        std::cout << line << std::endl;
        if (sink) std::fprintf(sink, "%s\n", line.c_str());
        if (r.status == CheckStatus::Fail) ++failures;
    });
    if (sink) std::fclose(sink);
    std::cerr << (failures ? std::to_string(failures) + " check(s) failed" : std::string("all checks passed")) << "\n";
    return failures ? 1 : 0;
}

int cmd_inspect(const std::string& path) {
    const nlohmann::json j = nlohmann::json::parse(read_text(path));
    const nlohmann::json& hist = j.contains("history") ? j["history"] : j;
    const TrainHistory h = history_from_json(hist);
    if (j.contains("config")) std::cout << "config: " << j["config"].dump() << "\n";
    if (j.contains("dataset")) std::cout << "dataset: " << j["dataset"].dump() << "\n";
    std::cout << "epoch,recon_loss,reg_value,act_fraction,dead_fraction,mean_pre_activation\n";
    for (const EpochRecord& r : h.records)
        std::cout << r.epoch << "," << format_double(r.recon_loss) << "," << format_double(r.reg_value) << ","
                  << format_double(r.avg_activation_fraction) << "," << format_double(r.dead_unit_fraction) << ","
                  << format_double(r.mean_pre_activation) << "\n";
    if (h.final_params.W.size()) {
        const Vector norms = row_norms(h.final_params.W);
        std::cout << "final W: " << h.final_params.W.rows() << "x" << h.final_params.W.cols()
                  << ", row norms in [" << norms.minCoeff() << ", " << norms.maxCoeff() << "]\n";
    }
    return 0;
}

int cmd_export(const CommonConfigArgs& a, const std::string& csv_out) {
    const SweepSpec spec = resolve_spec(a);
    const Dataset data = load_and_describe(spec);
    write_dataset_csv(data, csv_out);
    std::cerr << "wrote " << csv_out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparsity experiments for tied-weight auto-encoders"};
    app.require_subcommand(1);

    CommonConfigArgs sweep_args;
    int workers = 0;
    auto* sweep = app.add_subcommand("sweep", "Train one model per grid cell and write results.csv");
    add_config_args(sweep, sweep_args);
    sweep->add_option("--workers", workers, "Worker threads (overrides sweep.workers)")->check(CLI::PositiveNumber);

    CommonConfigArgs train_args;
    std::string model, activation, history_out;
    double sigma2 = 0.0;
    auto* train_cmd = app.add_subcommand("train", "Train a single cell (first grid entry unless overridden)");
    add_config_args(train_cmd, train_args);
    train_cmd->add_option("--model", model, "Objective kind");
    train_cmd->add_option("--activation", activation, "Activation");
    auto* sigma_opt = train_cmd->add_option("--sigma2", sigma2, "Regularization coefficient / corruption variance");
    train_cmd->add_option("--history", history_out, "History JSON path");

    std::string scale = "quick", verify_out;
    std::uint64_t seed = 1;
    auto* verify = app.add_subcommand("verify", "Run the oracle and certificate suite; JSON line per check");
    verify->add_option("--scale", scale, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--seed", seed, "Seed");
    verify->add_option("--out", verify_out, "Also write the JSON lines to this file");

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Summarize a history JSON file");
    inspect->add_option("history", inspect_path, "History JSON")->required()->check(CLI::ExistingFile);

    CommonConfigArgs export_args;
    std::string csv_out;
    auto* exp = app.add_subcommand("export", "Write the configured (normalized) dataset as CSV");
    add_config_args(exp, export_args);
    exp->add_option("csv", csv_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sweep) return cmd_sweep(sweep_args, workers);
        if (*train_cmd) return cmd_train(train_args, model, activation, sigma2, sigma_opt->count() > 0, history_out);
        if (*verify) return cmd_verify(scale, seed, verify_out);
        if (*inspect) return cmd_inspect(inspect_path);
        if (*exp) return cmd_export(export_args, csv_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

// Command-line front end: fit / predict / eval / synth / export-linear.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wskm/wskm.hpp"

namespace {

using nlohmann::json;

// "1.0", not "1": keep at least one decimal so the output reads as a float
std::string format_decimal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (s.find_first_of(".einf") == std::string::npos) s += ".0";
    return s;
}

wskm::SynthConfig parse_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wskm::IoError(wskm::IoCode::open_failed, "cannot open " + path);
    json j = json::parse(in);
    wskm::SynthConfig cfg;
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.n_per_tag = j.at("n_per_tag").get<std::size_t>();
    cfg.dim = j.at("dim").get<std::size_t>();
    cfg.tags = j.at("tags").get<std::vector<std::string>>();
    cfg.tag_means = j.at("tag_means").get<std::vector<std::vector<double>>>();
    cfg.noise_std = j.at("noise_std").get<double>();
    cfg.o_fraction = j.at("o_fraction").get<double>();
    cfg.label_fraction = j.at("label_fraction").get<double>();
    return cfg;
}

int run_fit(const std::string& x_path, const std::string& labels_path,
            const std::string& tags_path, const std::string& variant,
            std::optional<double> ratio, std::size_t o_protos, std::size_t iters,
            bool no_subspace, std::size_t bregman_iters, double bregman_tol,
            const std::string& trace_csv, const std::string& out_path) {
    const wskm::Matrix x = wskm::read_dmat(x_path);
    const std::vector<std::string> tag_names = wskm::read_tag_set(tags_path);
    const wskm::LabelData ld = wskm::read_labels(labels_path, tag_names);
    if (ld.labels.size() != x.rows)
        throw wskm::InvalidArgument("label file has " + std::to_string(ld.labels.size()) +
                                    " rows, feature matrix has " + std::to_string(x.rows));

    wskm::FitConfig cfg;
    cfg.variant = variant == "soft" ? wskm::FitConfig::Variant::soft
                                    : wskm::FitConfig::Variant::hard;
    cfg.ratio = ratio;
    cfg.o_prototypes = o_protos;
    cfg.acs_iters = iters;
    cfg.use_subspace = !no_subspace;
    cfg.bregman_iters = bregman_iters;
    cfg.bregman_tol = bregman_tol;

    const wskm::Model model = wskm::fit_with_tag_set(x, ld.labels, tag_names, cfg);
    wskm::save_model(out_path, model);
    if (!trace_csv.empty()) wskm::write_trace_csv(trace_csv, model.trace);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& x_path,
                const std::string& out_path) {
    const wskm::Model model = wskm::load_model(model_path);
    const wskm::Matrix x = wskm::read_dmat(x_path);
    const std::vector<int> tags = wskm::predict(x, model);
    wskm::write_labels(out_path, tags, {tags.size()}, model.tag_map);
    return 0;
}

int run_eval(const std::string& gold_path, const std::string& pred_path) {
    // tag universe = names seen in the files, O first
    std::vector<std::string> tags{"O"};
    for (const std::string& path : {gold_path, pred_path}) {
        std::ifstream in(path);
        if (!in) throw wskm::IoError(wskm::IoCode::open_failed, "cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line == "-") continue;
            bool known = false;
            for (const auto& t : tags) known = known || t == line;
            if (!known) tags.push_back(line);
        }
    }
    const wskm::LabelData gold = wskm::read_labels(gold_path, tags);
    const wskm::LabelData pred = wskm::read_labels(pred_path, tags);
    for (int t : gold.labels)
        if (t == wskm::kUnlabeled)
            throw wskm::InvalidArgument(gold_path + " contains unlabeled rows");
    for (int t : pred.labels)
        if (t == wskm::kUnlabeled)
            throw wskm::InvalidArgument(pred_path + " contains unlabeled rows");
    const wskm::EvalResult r = wskm::mention_f1(gold.sequences(), pred.sequences());
    std::cout << format_decimal(r.precision) << " " << format_decimal(r.recall) << " "
              << format_decimal(r.f1) << "\n";
    return 0;
}

int run_synth(const std::string& config_path, const std::string& prefix) {
    const wskm::SynthConfig cfg = parse_synth_config(config_path);
    const wskm::SynthData data = wskm::gen_synth(cfg);
    const wskm::TagMap tag_map = wskm::TagMap::with_o_block(cfg.tags, 1);
    wskm::write_dmat(prefix + ".x.dmat", data.x);
    wskm::write_labels(prefix + ".labels", data.labels, {data.labels.size()}, tag_map);
    wskm::write_labels(prefix + ".gold", data.gold, {data.gold.size()}, tag_map);
    std::ofstream tags_out(prefix + ".tags");
    if (!tags_out)
        throw wskm::IoError(wskm::IoCode::open_failed, "cannot open " + prefix + ".tags");
    for (const std::string& t : cfg.tags) tags_out << t << "\n";
    return 0;
}

int run_export_linear(const std::string& model_path, const std::string& out_path) {
    const wskm::Model model = wskm::load_model(model_path);
    wskm::write_linear_model(out_path, wskm::export_linear(model));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly-supervised constrained clustering for sequence tagging"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "Fine-tune prototypes on a partially labeled matrix");
    std::string fit_x, fit_labels, fit_tags, fit_out, fit_trace;
    std::string fit_variant = "hard";
    double fit_ratio = -1.0;
    bool fit_has_ratio = false;
    std::size_t fit_o_protos = 10, fit_iters = 10, fit_bregman_iters = 100;
    double fit_bregman_tol = 1e-9;
    bool fit_no_subspace = false;
    fit->add_option("--x", fit_x, "feature matrix (DMAT)")->required();
    fit->add_option("--labels", fit_labels, "per-row tag names, `-` for unlabeled")->required();
    fit->add_option("--tags", fit_tags, "tag set file, one name per line, O first")->required();
    fit->add_option("--variant", fit_variant, "hard or soft")
        ->check(CLI::IsMember({"hard", "soft"}));
    fit->add_option("--ratio", fit_ratio, "expected fraction of O rows")
        ->check(CLI::Range(0.0, 1.0));
    fit->add_option("--o-protos", fit_o_protos, "prototypes for the O tag");
    fit->add_option("--iters", fit_iters, "alternate convex search rounds");
    fit->add_flag("--no-subspace", fit_no_subspace, "skip the subspace step");
    fit->add_option("--bregman-iters", fit_bregman_iters, "projection cycle cap (soft+ratio)");
    fit->add_option("--bregman-tol", fit_bregman_tol, "projection residual tolerance");
    fit->add_option("--trace-csv", fit_trace, "write the per-round trace as CSV");
    fit->add_option("--out", fit_out, "output model file")->required();

    // predict
    auto* predict = app.add_subcommand("predict", "Tag rows with the nearest prototype");
    std::string pred_model, pred_x, pred_out;
    predict->add_option("--model", pred_model)->required();
    predict->add_option("--x", pred_x)->required();
    predict->add_option("--out", pred_out)->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Exact-match mention precision/recall/F1");
    std::string eval_gold, eval_pred;
    eval->add_option("--gold", eval_gold)->required();
    eval->add_option("--pred", eval_pred)->required();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic corpus");
    std::string synth_config, synth_prefix;
    synth->add_option("--config", synth_config, "JSON generator config")->required();
    synth->add_option("--out-prefix", synth_prefix, "prefix for .x.dmat/.labels/.gold/.tags")
        ->required();

    // export-linear
    auto* exp = app.add_subcommand("export-linear", "Export the equivalent linear scorer");
    std::string exp_model, exp_out;
    exp->add_option("--model", exp_model)->required();
    exp->add_option("--out", exp_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            fit_has_ratio = fit->count("--ratio") > 0;
            return run_fit(fit_x, fit_labels, fit_tags, fit_variant,
                           fit_has_ratio ? std::optional<double>(fit_ratio) : std::nullopt,
                           fit_o_protos, fit_iters, fit_no_subspace, fit_bregman_iters,
                           fit_bregman_tol, fit_trace, fit_out);
        }
        if (predict->parsed()) return run_predict(pred_model, pred_x, pred_out);
        if (eval->parsed()) return run_eval(eval_gold, eval_pred);
        if (synth->parsed()) return run_synth(synth_config, synth_prefix);
        if (exp->parsed()) return run_export_linear(exp_model, exp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcal/asc.hpp"
#include "vcal/baselines.hpp"
#include "vcal/core.hpp"
#include "vcal/data.hpp"
#include "vcal/metrics.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 usage, 2 I/O, 3 parse/version, 4 domain error.
constexpr int kExitIo = 2;
constexpr int kExitParse = 3;
constexpr int kExitDomain = 4;

struct CommonOpts {
    std::string input;
    std::string format = "csv";
    std::string calibrator = "asc";
    std::optional<double> tau;
    std::string tau_mode = "best-accuracy";
    std::optional<double> far_target;
    int ece_bins = 10;
    std::string scheme = "equal-width";
    int hist_bins = 15;
    int folds = 5;
    std::uint64_t seed = 0;
    std::string model_out;
    std::string model_in;
    std::string report_out;
    std::string diagram_out;
    bool embeddings = false;
};

void add_input_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "input dataset file")->required();
    cmd->add_option("--format", o.format, "input format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_flag("--embeddings", o.embeddings,
                  "rows carry embedding pairs instead of similarities (jsonl)");
}

void add_tau_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--tau", o.tau, "fixed decision threshold in (-1, 1)");
    cmd->add_option("--tau-mode", o.tau_mode,
                    "threshold source when --tau is absent")
        ->check(CLI::IsMember({"fixed", "best-accuracy", "far-target"}));
    cmd->add_option("--far-target", o.far_target,
                    "FAR target in (0, 1) for --tau-mode far-target");
}

void add_ece_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--bins", o.ece_bins, "ECE bin count")->check(CLI::PositiveNumber);
    cmd->add_option("--scheme", o.scheme, "ECE bin scheme")
        ->check(CLI::IsMember({"equal-width", "equal-frequency"}));
}

vcal::Dataset load_input(const CommonOpts& o) {
    const vcal::Format fmt = vcal::format_from_name(o.format);
    return o.embeddings ? vcal::load_embeddings(o.input, fmt)
                        : vcal::load_pairs(o.input, fmt);
}

vcal::BinScheme scheme_from_name(const std::string& name) {
    return name == "equal-frequency" ? vcal::BinScheme::equal_frequency
                                     : vcal::BinScheme::equal_width;
}

// Resolution order: explicit value, then FAR target, then best accuracy.
vcal::Threshold resolve_tau(const CommonOpts& o, const vcal::Dataset& dataset) {
    if (o.tau.has_value()) return vcal::Threshold(*o.tau);
    if (o.tau_mode == "fixed") {
        throw CLI::ValidationError("--tau-mode fixed requires --tau");
    }
    if (o.tau_mode == "far-target" || (o.far_target.has_value())) {
        if (!o.far_target.has_value()) {
            throw CLI::ValidationError("--tau-mode far-target requires --far-target");
        }
        const vcal::FarThreshold ft = vcal::threshold_at_far(dataset, *o.far_target);
        if (!ft.enough_negatives) {
            std::cerr << "warning: fewer than 1/far_target negatives; the FAR "
                         "estimate is coarse\n";
        }
        return ft.threshold;
    }
    return vcal::best_accuracy_threshold(dataset);
}

vcal::CalibratorModel fit_calibrator(const CommonOpts& o, const vcal::Dataset& dataset,
                                     vcal::Threshold tau) {
    if (o.calibrator == "asc") {
        return vcal::CalibratorModel{vcal::fit(dataset, tau).first};
    }
    if (o.calibrator == "histogram") {
        return vcal::CalibratorModel{vcal::fit_histogram(dataset, tau, o.hist_bins)};
    }
    return vcal::CalibratorModel{vcal::fit_isotonic(dataset, tau)};
}

vcal::Dataset apply_calibrator(const vcal::CalibratorModel& model,
                               const vcal::Dataset& dataset) {
    vcal::Dataset out = dataset;
    for (vcal::PairRecord& r : out.records) {
        r.similarity = model.apply(r.similarity);
    }
    return out;
}

json bins_to_json(const vcal::EceReport& report) {
    json bins = json::array();
    for (const vcal::BinReport& b : report.bins) {
        bins.push_back({{"lo", b.lo},
                        {"hi", b.hi},
                        {"count", b.count},
                        {"accuracy", b.accuracy},
                        {"mean_confidence", b.mean_confidence}});
    }
    return bins;
}

json evaluate_split(const vcal::Dataset& dataset, vcal::Threshold tau, int m_bins,
                    vcal::BinScheme scheme) {
    const vcal::EceReport report = vcal::ece(dataset, tau, m_bins, scheme);
    json out{{"tau", tau.value()},
             {"n", dataset.size()},
             {"accuracy", vcal::accuracy(dataset, tau)},
             {"mean_confidence", vcal::mean_confidence(dataset, tau)},
             {"ece", report.ece},
             {"bins", bins_to_json(report)}};
    if (dataset.has_both_classes()) {
        std::size_t tp = 0, fp = 0, np = 0, nn = 0;
        for (const vcal::PairRecord& r : dataset.records) {
            const bool accept = vcal::predict(r.similarity, tau) == +1;
            if (r.label == +1) {
                ++np;
                if (accept) ++tp;
            } else {
                ++nn;
                if (accept) ++fp;
            }
        }
        out["tar"] = static_cast<double>(tp) / static_cast<double>(np);
        out["far"] = static_cast<double>(fp) / static_cast<double>(nn);
        out["auc"] = vcal::auc(dataset);
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw vcal::IoError("cannot write " + path);
    out << content;
    if (!out) throw vcal::IoError("write failed for " + path);
}

// Minimal reliability diagram: per-bin accuracy bars against the y = x
// diagonal, confidence on the x axis.
std::string reliability_svg(const vcal::EceReport& report) {
    const double w = 440.0, h = 440.0, m = 60.0;
    auto sx = [&](double c) { return m + (c - 0.5) / 0.5 * (w - 2 * m); };
    auto sy = [&](double a) { return h - m - a * (h - 2 * m); };
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
        << "'>\n";
    svg << "<rect x='0' y='0' width='" << w << "' height='" << h
        << "' fill='white'/>\n";
    for (const vcal::BinReport& b : report.bins) {
        if (b.count == 0) continue;
        const double x0 = sx(b.lo), x1 = sx(std::max(b.hi, b.lo + 0.004));
        svg << "<rect x='" << x0 << "' y='" << sy(b.accuracy) << "' width='"
            << (x1 - x0) << "' height='" << (sy(0.0) - sy(b.accuracy))
            << "' fill='steelblue' fill-opacity='0.7' stroke='navy'/>\n";
        svg << "<circle cx='" << sx(b.mean_confidence) << "' cy='" << sy(b.accuracy)
            << "' r='3' fill='crimson'/>\n";
    }
    svg << "<line x1='" << sx(0.5) << "' y1='" << sy(0.5) << "' x2='" << sx(1.0)
        << "' y2='" << sy(1.0) << "' stroke='gray' stroke-dasharray='6 4'/>\n";
    svg << "<line x1='" << m << "' y1='" << h - m << "' x2='" << w - m << "' y2='"
        << h - m << "' stroke='black'/>\n";
    svg << "<line x1='" << m << "' y1='" << h - m << "' x2='" << m << "' y2='" << m
        << "' stroke='black'/>\n";
    svg << "<text x='" << w / 2 << "' y='" << h - 16
        << "' text-anchor='middle' font-size='14'>confidence</text>\n";
    svg << "<text x='16' y='" << h / 2 << "' text-anchor='middle' font-size='14' "
        << "transform='rotate(-90 16 " << h / 2 << ")'>accuracy</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

int run_simulate(const CommonOpts& o, const vcal::SyntheticSpec& spec,
                 const std::string& output) {
    const vcal::Dataset dataset = vcal::generate(spec);
    vcal::save_pairs(dataset, output, vcal::format_from_name(o.format));
    std::cout << "wrote " << dataset.size() << " records to " << output << '\n';
    return 0;
}

int run_calibrate(const CommonOpts& o) {
    const vcal::Dataset dataset = load_input(o);
    const vcal::Threshold tau = resolve_tau(o, dataset);
    const vcal::CalibratorModel model = fit_calibrator(o, dataset, tau);
    const vcal::Dataset calibrated = apply_calibrator(model, dataset);
    const vcal::BinScheme scheme = scheme_from_name(o.scheme);

    const json pre = evaluate_split(dataset, tau, o.ece_bins, scheme);
    const json post =
        evaluate_split(calibrated, model.tau_calibrated(), o.ece_bins, scheme);

    if (!o.model_out.empty()) vcal::save_model(model, o.model_out);
    if (!o.report_out.empty()) {
        json report{{"calibrator", model.kind()},
                    {"m_bins", o.ece_bins},
                    {"scheme", o.scheme},
                    {"pre", pre},
                    {"post", post}};
        write_text(o.report_out, report.dump(2) + "\n");
    }

    std::cout << "calibrator: " << model.kind() << '\n';
    std::cout << "tau: " << vcal::format_double(tau.value()) << " -> "
              << vcal::format_double(model.tau_calibrated().value()) << '\n';
    std::cout << "ece: " << vcal::format_double(pre["ece"].get<double>()) << " -> "
              << vcal::format_double(post["ece"].get<double>()) << " (M="
              << o.ece_bins << ", " << o.scheme << ")\n";
    return 0;
}

int run_evaluate(const CommonOpts& o) {
    const vcal::Dataset dataset = load_input(o);
    const vcal::BinScheme scheme = scheme_from_name(o.scheme);

    json report{{"m_bins", o.ece_bins}, {"scheme", o.scheme}};
    vcal::EceReport diagram_source{0.0, scheme, o.ece_bins, {}};
    if (!o.model_in.empty()) {
        const vcal::CalibratorModel model = vcal::load_model(o.model_in);
        const vcal::Dataset calibrated = apply_calibrator(model, dataset);
        report["calibrator"] = model.kind();
        report["pre"] = evaluate_split(dataset, model.tau_raw(), o.ece_bins, scheme);
        report["post"] =
            evaluate_split(calibrated, model.tau_calibrated(), o.ece_bins, scheme);
        diagram_source =
            vcal::ece(calibrated, model.tau_calibrated(), o.ece_bins, scheme);
    } else {
        const vcal::Threshold tau = resolve_tau(o, dataset);
        report["pre"] = evaluate_split(dataset, tau, o.ece_bins, scheme);
        diagram_source = vcal::ece(dataset, tau, o.ece_bins, scheme);
    }

    const std::string text = report.dump(2) + "\n";
    if (!o.report_out.empty()) {
        write_text(o.report_out, text);
    } else {
        std::cout << text;
    }
    if (!o.diagram_out.empty()) {
        write_text(o.diagram_out, reliability_svg(diagram_source));
    }
    return 0;
}

int run_kfold(const CommonOpts& o) {
    vcal::Dataset dataset = load_input(o);
    if (dataset.folds.empty()) {
        dataset.folds = vcal::stratified_folds(dataset, o.folds, o.seed).assignments;
    }
    const int k = 1 + *std::max_element(dataset.folds.begin(), dataset.folds.end());
    const vcal::BinScheme scheme = scheme_from_name(o.scheme);

    json fold_rows = json::array();
    double sum_pre = 0.0, sum_post = 0.0;
    for (int f = 0; f < k; ++f) {
        vcal::Dataset train, test;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            (dataset.folds[i] == f ? test : train).records.push_back(dataset.records[i]);
        }
        const vcal::Threshold tau = resolve_tau(o, train);
        const vcal::CalibratorModel model = fit_calibrator(o, train, tau);
        const json pre = evaluate_split(test, tau, o.ece_bins, scheme);
        const json post = evaluate_split(apply_calibrator(model, test),
                                         model.tau_calibrated(), o.ece_bins, scheme);
        sum_pre += pre["ece"].get<double>();
        sum_post += post["ece"].get<double>();
        fold_rows.push_back({{"fold", f}, {"pre", pre}, {"post", post}});
    }

    json report{{"calibrator", o.calibrator},
                {"k", k},
                {"seed", o.seed},
                {"m_bins", o.ece_bins},
                {"scheme", o.scheme},
                {"folds", fold_rows},
                {"mean", {{"pre_ece", sum_pre / k}, {"post_ece", sum_post / k}}}};

    const std::string text = report.dump(2) + "\n";
    if (!o.report_out.empty()) {
        write_text(o.report_out, text);
    } else {
        std::cout << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "vcal: probabilistic confidence for cosine-similarity verification.\n"
        "Fits angular scaling calibration (plus histogram-binning and\n"
        "isotonic-regression baselines), evaluates ECE and reliability\n"
        "diagrams, and runs stratified k-fold protocols.\n"};
    app.require_subcommand(1);

    CommonOpts o;
    vcal::SyntheticSpec spec;
    std::string sim_output;

    CLI::App* simulate =
        app.add_subcommand("simulate", "generate a synthetic two-Gaussian dataset");
    simulate->add_option("--n-pos", spec.n_pos, "positive pair count")->required();
    simulate->add_option("--n-neg", spec.n_neg, "negative pair count")->required();
    simulate->add_option("--pos-mean", spec.pos_mean, "positive similarity mean")
        ->required();
    simulate->add_option("--pos-sd", spec.pos_sd, "positive similarity sd")->required();
    simulate->add_option("--neg-mean", spec.neg_mean, "negative similarity mean")
        ->required();
    simulate->add_option("--neg-sd", spec.neg_sd, "negative similarity sd")->required();
    simulate->add_option("--seed", spec.seed, "PRNG seed");
    simulate->add_option("--output", sim_output, "output dataset path")->required();
    simulate->add_option("--format", o.format, "output format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "fit a calibrator and report pre/post ECE");
    add_input_flags(calibrate, o);
    add_tau_flags(calibrate, o);
    add_ece_flags(calibrate, o);
    calibrate->add_option("--calibrator", o.calibrator, "asc, histogram, or isotonic")
        ->check(CLI::IsMember({"asc", "histogram", "isotonic"}));
    calibrate->add_option("--hist-bins", o.hist_bins,
                          "similarity bin count for the histogram calibrator")
        ->check(CLI::PositiveNumber);
    calibrate->add_option("--model-out", o.model_out, "write the fitted model here");
    calibrate->add_option("--report-out", o.report_out, "write a JSON report here");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "evaluate a dataset, optionally through a model");
    add_input_flags(evaluate, o);
    add_tau_flags(evaluate, o);
    add_ece_flags(evaluate, o);
    evaluate->add_option("--model-in", o.model_in, "fitted calibrator model file");
    evaluate->add_option("--report-out", o.report_out, "write the JSON report here");
    evaluate->add_option("--diagram-out", o.diagram_out,
                         "write an SVG reliability diagram here");

    CLI::App* kfold = app.add_subcommand(
        "kfold", "stratified k-fold: fit on k-1 folds, evaluate on the held-out fold");
    add_input_flags(kfold, o);
    add_tau_flags(kfold, o);
    add_ece_flags(kfold, o);
    kfold->add_option("--calibrator", o.calibrator, "asc, histogram, or isotonic")
        ->check(CLI::IsMember({"asc", "histogram", "isotonic"}));
    kfold->add_option("--hist-bins", o.hist_bins,
                      "similarity bin count for the histogram calibrator")
        ->check(CLI::PositiveNumber);
    kfold->add_option("--folds", o.folds, "fold count when the input has no fold ids")
        ->check(CLI::Range(2, 1000));
    kfold->add_option("--seed", o.seed, "fold-assignment seed");
    kfold->add_option("--report-out", o.report_out, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors collapse to exit code 1
    }

    try {
        if (simulate->parsed()) return run_simulate(o, spec, sim_output);
        if (calibrate->parsed()) return run_calibrate(o);
        if (evaluate->parsed()) return run_evaluate(o);
        return run_kfold(o);
    } catch (const vcal::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const vcal::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const vcal::VersionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }
}

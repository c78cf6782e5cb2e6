#include "vcal/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vcal/rng.hpp"

namespace vcal {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return in;
}

double parse_number(const std::string& text, const std::filesystem::path& path,
                    std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        parse_fail(path, line, "not a number: '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) {
        ++used;
    }
    if (used != text.size()) {
        parse_fail(path, line, "trailing characters after number: '" + text + "'");
    }
    return v;
}

int parse_label(double v, const std::filesystem::path& path, std::size_t line) {
    if (v == 1.0) return +1;
    if (v == -1.0) return -1;
    parse_fail(path, line, "label must be -1 or +1");
}

void check_folds(Dataset& dataset, std::size_t rows_with_fold,
                 const std::filesystem::path& path) {
    if (rows_with_fold == 0) {
        dataset.folds.clear();
        return;
    }
    if (rows_with_fold != dataset.size()) {
        throw ParseError(path.string() + ": fold ids must be present on every row or none");
    }
    const int max_fold = *std::max_element(dataset.folds.begin(), dataset.folds.end());
    std::vector<bool> seen(static_cast<std::size_t>(max_fold) + 1, false);
    for (int f : dataset.folds) {
        if (f < 0) throw ParseError(path.string() + ": negative fold id");
        seen[static_cast<std::size_t>(f)] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw ParseError(path.string() + ": fold ids must be contiguous from 0");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    Dataset dataset;
    std::size_t rows_with_fold = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv(line);
        if (fields.size() != 2 && fields.size() != 3) {
            parse_fail(path, lineno, "expected 'similarity,label[,fold]'");
        }
        const double sim = parse_number(fields[0], path, lineno);
        const int label = parse_label(parse_number(fields[1], path, lineno), path, lineno);
        try {
            dataset.records.push_back(make_record(sim, label));
        } catch (const RangeError& e) {
            parse_fail(path, lineno, e.what());
        }
        if (fields.size() == 3) {
            dataset.folds.push_back(
                static_cast<int>(parse_number(fields[2], path, lineno)));
            ++rows_with_fold;
        } else {
            dataset.folds.push_back(0);
        }
    }
    check_folds(dataset, rows_with_fold, path);
    return dataset;
}

Dataset load_jsonl(const std::filesystem::path& path, bool require_embeddings) {
    std::ifstream in = open_input(path);
    Dataset dataset;
    std::size_t rows_with_fold = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            parse_fail(path, lineno, e.what());
        }
        if (!row.is_object() || !row.contains("label")) {
            parse_fail(path, lineno, "expected an object with a 'label' key");
        }
        const int label = parse_label(row["label"].get<double>(), path, lineno);
        double sim = 0.0;
        if (row.contains("emb_a") && row.contains("emb_b")) {
            const auto a = row["emb_a"].get<std::vector<double>>();
            const auto b = row["emb_b"].get<std::vector<double>>();
            try {
                sim = cosine_similarity(a, b);
            } catch (const RangeError& e) {
                parse_fail(path, lineno, e.what());
            }
        } else if (!require_embeddings && row.contains("sim")) {
            sim = row["sim"].get<double>();
        } else {
            parse_fail(path, lineno,
                       require_embeddings ? "expected 'emb_a' and 'emb_b'"
                                          : "expected 'sim' or 'emb_a'/'emb_b'");
        }
        try {
            dataset.records.push_back(make_record(sim, label));
        } catch (const RangeError& e) {
            parse_fail(path, lineno, e.what());
        }
        if (row.contains("fold")) {
            dataset.folds.push_back(row["fold"].get<int>());
            ++rows_with_fold;
        } else {
            dataset.folds.push_back(0);
        }
    }
    check_folds(dataset, rows_with_fold, path);
    return dataset;
}

}  // namespace

Format format_from_name(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "jsonl") return Format::jsonl;
    throw RangeError("unknown format '" + name + "' (expected csv or jsonl)");
}

Dataset load_pairs(const std::filesystem::path& path, Format format) {
    return format == Format::csv ? load_csv(path) : load_jsonl(path, false);
}

Dataset load_embeddings(const std::filesystem::path& path, Format format) {
    if (format != Format::jsonl) {
        throw ParseError("embedding input requires the jsonl format");
    }
    return load_jsonl(path, true);
}

void save_pairs(const Dataset& dataset, const std::filesystem::path& path,
                Format format) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const bool with_folds = !dataset.folds.empty() &&
                            dataset.folds.size() == dataset.records.size() &&
                            *std::max_element(dataset.folds.begin(),
                                              dataset.folds.end()) > 0;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const PairRecord& r = dataset.records[i];
        if (format == Format::csv) {
            out << format_double(r.similarity) << ',' << r.label;
            if (with_folds) out << ',' << dataset.folds[i];
            out << '\n';
        } else {
            json row{{"sim", r.similarity}, {"label", r.label}};
            if (with_folds) row["fold"] = dataset.folds[i];
            out << row.dump() << '\n';
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void SyntheticSpec::validate() const {
    if (n_pos < 1 || n_neg < 1) {
        throw RangeError("synthetic spec needs n_pos >= 1 and n_neg >= 1");
    }
    if (!(pos_sd > 0.0) || !(neg_sd > 0.0)) {
        throw RangeError("synthetic spec needs positive standard deviations");
    }
}

Dataset generate(const SyntheticSpec& spec) {
    spec.validate();
    SplitMix64 rng(spec.seed);
    Dataset dataset;
    dataset.records.reserve(spec.n_pos + spec.n_neg);
    for (std::size_t i = 0; i < spec.n_pos; ++i) {
        const double s = std::clamp(spec.pos_mean + spec.pos_sd * rng.gaussian(), -1.0, 1.0);
        dataset.records.push_back(PairRecord{s, +1});
    }
    for (std::size_t i = 0; i < spec.n_neg; ++i) {
        const double s = std::clamp(spec.neg_mean + spec.neg_sd * rng.gaussian(), -1.0, 1.0);
        dataset.records.push_back(PairRecord{s, -1});
    }
    return dataset;
}

FoldSplit stratified_folds(const Dataset& dataset, int k, std::uint64_t seed) {
    if (k < 2) throw RangeError("k must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (dataset.records[i].label == +1 ? pos : neg).push_back(i);
    }
    if (pos.size() < static_cast<std::size_t>(k) ||
        neg.size() < static_cast<std::size_t>(k)) {
        throw TooFewPerClass("each class needs at least k members for k folds");
    }
    SplitMix64 rng(seed);
    FoldSplit split{k, std::vector<int>(dataset.size(), 0), seed};
    for (std::vector<std::size_t>* cls : {&pos, &neg}) {
        for (std::size_t i = cls->size(); i > 1; --i) {
            std::swap((*cls)[i - 1], (*cls)[rng.below(i)]);
        }
        for (std::size_t i = 0; i < cls->size(); ++i) {
            split.assignments[(*cls)[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
        }
    }
    return split;
}

std::string CalibratorModel::kind() const {
    if (std::holds_alternative<AscParams>(model)) return "asc";
    if (std::holds_alternative<HistogramModel>(model)) return "histogram";
    return "isotonic";
}

double CalibratorModel::apply(double s) const {
    return std::visit(
        [s](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AscParams>) {
                return vcal::apply(m, s);
            } else if constexpr (std::is_same_v<T, HistogramModel>) {
                return apply_histogram(m, s);
            } else {
                return apply_isotonic(m, s);
            }
        },
        model);
}

Threshold CalibratorModel::tau_raw() const {
    return std::visit([](const auto& m) { return m.tau_raw; }, model);
}

Threshold CalibratorModel::tau_calibrated() const {
    return std::visit([](const auto& m) { return m.tau_calibrated; }, model);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void write_doubles(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << (i ? " " : "") << format_double(values[i]);
    }
    out << '\n';
}

std::map<std::string, std::string> read_fields(std::istream& in) {
    std::map<std::string, std::string> fields;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos) {
            throw ParseError("malformed model line: '" + line + "'");
        }
        fields[line.substr(0, sp)] = line.substr(sp + 1);
    }
    return fields;
}

const std::string& field(const std::map<std::string, std::string>& fields,
                         const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) {
        throw ParseError("model file missing field '" + key + "'");
    }
    return it->second;
}

double field_double(const std::map<std::string, std::string>& fields,
                    const std::string& key) {
    return std::stod(field(fields, key));
}

std::vector<double> field_doubles(const std::map<std::string, std::string>& fields,
                                  const std::string& key, std::size_t expected) {
    // strtod-based parsing: istream extraction is not correctly rounded
    // in every standard library, strtod is.
    const std::string& text = field(fields, key);
    std::vector<double> out;
    const char* p = text.c_str();
    char* end = nullptr;
    for (double v = std::strtod(p, &end); end != p; v = std::strtod(p, &end)) {
        out.push_back(v);
        p = end;
    }
    if (out.size() != expected) {
        throw ParseError("model field '" + key + "' expected " +
                         std::to_string(expected) + " values, got " +
                         std::to_string(out.size()));
    }
    return out;
}

}  // namespace

void save_model(const CalibratorModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "vcal-calibrator 1\n";
    out << "kind " << model.kind() << '\n';
    out << "tau_raw " << format_double(model.tau_raw().value()) << '\n';
    out << "tau_calibrated " << format_double(model.tau_calibrated().value()) << '\n';
    std::visit(
        [&out](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, AscParams>) {
                out << "w " << format_double(m.w) << '\n';
                out << "b " << format_double(m.b) << '\n';
            } else if constexpr (std::is_same_v<T, HistogramModel>) {
                out << "bins " << m.scores.size() << '\n';
                out << "boundaries ";
                write_doubles(out, m.boundaries);
                out << "scores ";
                write_doubles(out, m.scores);
            } else {
                out << "points " << m.breakpoints.size() << '\n';
                out << "breakpoints ";
                write_doubles(out, m.breakpoints);
                out << "levels ";
                write_doubles(out, m.levels);
            }
        },
        model.model);
    if (!out) throw IoError("write failed for " + path.string());
}

CalibratorModel load_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "vcal-calibrator") {
        throw ParseError(path.string() + ": not a vcal calibrator file");
    }
    if (version != 1) {
        throw VersionMismatch(path.string() + ": unsupported model version " +
                              std::to_string(version));
    }
    in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    const auto fields = read_fields(in);

    const std::string& kind = field(fields, "kind");
    const Threshold tau_raw{field_double(fields, "tau_raw")};
    const Threshold tau_cal{field_double(fields, "tau_calibrated")};
    if (kind == "asc") {
        return CalibratorModel{AscParams{field_double(fields, "w"),
                                         field_double(fields, "b"), tau_raw, tau_cal}};
    }
    if (kind == "histogram") {
        const auto m = static_cast<std::size_t>(std::stoul(field(fields, "bins")));
        return CalibratorModel{HistogramModel{field_doubles(fields, "boundaries", m + 1),
                                              field_doubles(fields, "scores", m),
                                              tau_raw, tau_cal}};
    }
    if (kind == "isotonic") {
        const auto n = static_cast<std::size_t>(std::stoul(field(fields, "points")));
        return CalibratorModel{IsotonicModel{field_doubles(fields, "breakpoints", n),
                                             field_doubles(fields, "levels", n), tau_raw,
                                             tau_cal}};
    }
    throw VersionMismatch(path.string() + ": unknown calibrator kind '" + kind + "'");
}

}  // namespace vcal

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "vcal/asc.hpp"
#include "vcal/baselines.hpp"
#include "vcal/core.hpp"

namespace vcal {

enum class Format { csv, jsonl };

Format format_from_name(const std::string& name);

// CSV rows: "similarity,label[,fold]". JSONL rows: {"sim":..,"label":..}
// or {"emb_a":[..],"emb_b":[..],"label":..}, optional "fold". Row order
// is preserved; similarities go through the load-time clamping rule.
Dataset load_pairs(const std::filesystem::path& path, Format format);

// JSONL only: every row must carry embeddings, converted per row via
// cosine_similarity.
Dataset load_embeddings(const std::filesystem::path& path, Format format);

void save_pairs(const Dataset& dataset, const std::filesystem::path& path,
                Format format);

// Two-Gaussian similarity benchmark, a stand-in for real verification
// score distributions.
struct SyntheticSpec {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    double pos_mean = 0.0;
    double pos_sd = 1.0;
    double neg_mean = 0.0;
    double neg_sd = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Deterministic given the seed: positives first from N(pos_mean, pos_sd^2),
// then negatives, all hard-clamped to [-1, 1].
Dataset generate(const SyntheticSpec& spec);

struct FoldSplit {
    int k;
    std::vector<int> assignments;
    std::uint64_t seed;
};

// Per-class Fisher-Yates shuffle then round-robin assignment, so fold
// class counts stay within one of proportional.
FoldSplit stratified_folds(const Dataset& dataset, int k, std::uint64_t seed);

// A fitted calibrator of any family, with its remapped threshold.
struct CalibratorModel {
    std::variant<AscParams, HistogramModel, IsotonicModel> model;

    std::string kind() const;
    double apply(double s) const;
    Threshold tau_raw() const;
    Threshold tau_calibrated() const;
};

// Versioned self-describing text format; doubles are written with
// shortest round-trip precision, so ASC parameters survive bit-exactly.
void save_model(const CalibratorModel& model, const std::filesystem::path& path);
CalibratorModel load_model(const std::filesystem::path& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace vcal

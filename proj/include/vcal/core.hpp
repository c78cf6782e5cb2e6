#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vcal/errors.hpp"

namespace vcal {

// Decision threshold on cosine similarity. Strictly inside (-1, 1):
// the confidence measure divides by (1 - tau) and (1 + tau).
class Threshold {
public:
    explicit Threshold(double value);
    double value() const { return value_; }

private:
    double value_;
};

// One scored verification pair: cosine similarity and a {-1,+1} label.
struct PairRecord {
    double similarity;
    int label;
};

// Validating constructor. Similarities within 1e-6 outside [-1,1] are
// clamped (float noise from normalized embeddings); larger excursions
// throw RangeError, as does any label outside {-1,+1}.
PairRecord make_record(double similarity, int label);

// Clamp-with-tolerance used by make_record and the loaders.
double clamp_similarity(double s);

struct Dataset {
    std::vector<PairRecord> records;
    // Empty, or one fold id per record (contiguous ints starting at 0).
    std::vector<int> folds;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::size_t count_label(int label) const;
    bool has_both_classes() const {
        return count_label(+1) > 0 && count_label(-1) > 0;
    }
};

// Decision rule: +1 iff s >= tau (ties accept).
int predict(double s, Threshold tau);

// Distance of s from tau, normalized by the side of the interval the
// prediction falls on. Range [0, 1]; zero at the threshold.
double phi(double s, Threshold tau);

// Probabilistic confidence of the binary decision: phi/2 + 1/2 in [0.5, 1].
double confidence(double s, Threshold tau);

// Inner product over the product of norms, clamped to [-1, 1].
// Throws RangeError on dimension mismatch or a zero-norm vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace vcal

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histmap/raster.hpp"

namespace histmap {

/// Rows are true classes, columns predicted classes. Mask value v maps to
/// row/column v - 1.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int class_count = 5);
    ConfusionMatrix(int class_count, std::vector<std::uint64_t> counts);

    int class_count() const { return classes_; }
    std::uint64_t at(int truth, int pred) const { return counts_[index(truth, pred)]; }
    std::uint64_t& at(int truth, int pred) { return counts_[index(truth, pred)]; }
    std::uint64_t total() const;
    std::uint64_t row_sum(int truth) const;
    std::uint64_t col_sum(int pred) const;

    ConfusionMatrix& merge(const ConfusionMatrix& other);

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t index(int t, int p) const { return std::size_t(t) * std::size_t(classes_) + std::size_t(p); }

    int classes_;
    std::vector<std::uint64_t> counts_;
};

/// Adds one count per pixel. Throws ValidationError on size mismatch or a
/// value outside 1..class_count.
void accumulate_confusion(const ClassMask& pred, const ClassMask& truth, ConfusionMatrix& cm);

struct ClassMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> iou;
    std::optional<double> f1;
    std::uint64_t support = 0; ///< true pixels of the class
};

/// Undefined values (zero denominators) are empty optionals and are left
/// out of the macro means.
struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double kappa = 0.0;
    double micro_f1 = 0.0; ///< equals accuracy for single-label pixels
    std::optional<double> macro_precision;
    std::optional<double> macro_recall;
    std::optional<double> macro_iou;
    std::optional<double> macro_f1;
    std::uint64_t total = 0;

    std::string to_text(std::span<const std::string> class_names = {}) const;
    std::string to_csv(std::span<const std::string> class_names = {}) const;
};

/// Throws ValidationError on an empty matrix.
MetricsReport metrics_report(const ConfusionMatrix& cm);

struct NormalizedConfusion {
    std::vector<std::vector<double>> rows;
    std::vector<bool> empty_row; ///< rows with no true pixels stay zero
};

NormalizedConfusion normalize_confusion(const ConfusionMatrix& cm);

/// Batch-wise adaptive class weights. Frequencies follow an exponential
/// moving average f <- decay * f + (1 - decay) * batch (the first batch
/// initializes f directly). Weights are median(f over present classes) / f_c,
/// rescaled to mean 1 over present classes; absent classes get no weight.
class AcwState {
public:
    explicit AcwState(int class_count = 5, double decay = 0.9);

    std::vector<std::optional<double>> update(std::span<const ClassMask> batch);
    std::vector<std::optional<double>> update(const ClassMask& batch) { return update(std::span(&batch, 1)); }

    const std::vector<double>& frequencies() const { return freq_; }
    std::uint64_t iterations() const { return iterations_; }

private:
    int classes_;
    double decay_;
    std::vector<double> freq_;
    std::uint64_t iterations_ = 0;
};

/// Pure form of the weight rule, exposed for testing.
std::vector<std::optional<double>> acw_weights(std::span<const double> frequencies);

} // namespace histmap

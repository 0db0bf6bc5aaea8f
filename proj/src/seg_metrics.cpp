#include "histmap/seg_metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "histmap/errors.hpp"
#include "histmap/geo_core.hpp"

namespace histmap {

ConfusionMatrix::ConfusionMatrix(int class_count)
    : classes_(class_count), counts_(std::size_t(std::max(class_count, 0)) * std::size_t(std::max(class_count, 0))) {
    if (class_count < 1) throw ValidationError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(int class_count, std::vector<std::uint64_t> counts)
    : classes_(class_count), counts_(std::move(counts)) {
    if (class_count < 1) throw ValidationError("confusion matrix needs at least one class");
    if (counts_.size() != std::size_t(class_count) * std::size_t(class_count))
        throw ValidationError("confusion matrix counts must have class_count^2 entries");
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(int truth) const {
    std::uint64_t s = 0;
    for (int p = 0; p < classes_; ++p) s += at(truth, p);
    return s;
}

std::uint64_t ConfusionMatrix::col_sum(int pred) const {
    std::uint64_t s = 0;
    for (int t = 0; t < classes_; ++t) s += at(t, pred);
    return s;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw ValidationError("cannot merge confusion matrices of different class counts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

void accumulate_confusion(const ClassMask& pred, const ClassMask& truth, ConfusionMatrix& cm) {
    if (pred.width() != truth.width() || pred.height() != truth.height())
        throw ValidationError("prediction is " + std::to_string(pred.width()) + "x" + std::to_string(pred.height()) +
                              " but truth is " + std::to_string(truth.width()) + "x" + std::to_string(truth.height()));
    const auto p = pred.values();
    const auto t = truth.values();
    const int c = cm.class_count();
    // Validate first so a bad mask leaves cm untouched.
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 1 || p[i] > c)
            throw ValidationError("prediction holds class value " + std::to_string(p[i]) + " outside 1.." +
                                  std::to_string(c));
        if (t[i] < 1 || t[i] > c)
            throw ValidationError("truth holds class value " + std::to_string(t[i]) + " outside 1.." +
                                  std::to_string(c));
    }
    for (std::size_t i = 0; i < p.size(); ++i) ++cm.at(t[i] - 1, p[i] - 1);
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return double(num) / double(den);
}

std::optional<double> mean_defined(const std::vector<ClassMetrics>& per_class,
                                   std::optional<double> ClassMetrics::*field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : per_class)
        if (m.*field) {
            sum += *(m.*field);
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

std::string name_of(std::span<const std::string> names, int c) {
    if (std::size_t(c) < names.size()) return names[c];
    if (c + 1 <= kClassCount) return std::string(class_name(c + 1));
    return "class_" + std::to_string(c + 1);
}

std::string fmt(std::optional<double> v, const char* undefined) {
    if (!v) return undefined;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

} // namespace

MetricsReport metrics_report(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw ValidationError("confusion matrix is empty");
    const int c = cm.class_count();
    MetricsReport r;
    r.total = total;
    std::uint64_t trace = 0;
    double pe = 0.0;
    for (int k = 0; k < c; ++k) {
        const std::uint64_t tp = cm.at(k, k);
        const std::uint64_t row = cm.row_sum(k);
        const std::uint64_t col = cm.col_sum(k);
        trace += tp;
        pe += (double(row) / double(total)) * (double(col) / double(total));
        ClassMetrics m;
        m.support = row;
        m.precision = ratio(tp, col);
        m.recall = ratio(tp, row);
        m.iou = ratio(tp, row + col - tp);
        // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN); undefined only when P+R has no terms.
        if (m.precision && m.recall) {
            const double s = *m.precision + *m.recall;
            m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.recall / s : 0.0;
        }
        r.per_class.push_back(m);
    }
    r.accuracy = double(trace) / double(total);
    r.micro_f1 = r.accuracy;
    r.kappa = pe < 1.0 ? (r.accuracy - pe) / (1.0 - pe) : 1.0;
    r.macro_precision = mean_defined(r.per_class, &ClassMetrics::precision);
    r.macro_recall = mean_defined(r.per_class, &ClassMetrics::recall);
    r.macro_iou = mean_defined(r.per_class, &ClassMetrics::iou);
    r.macro_f1 = mean_defined(r.per_class, &ClassMetrics::f1);
    return r;
}

std::string MetricsReport::to_text(std::span<const std::string> class_names) const {
    std::ostringstream out;
    char buf[128];
    out << "pixels: " << total << '\n';
    std::snprintf(buf, sizeof buf, "accuracy: %.6f\nkappa: %.6f\nmicro_f1: %.6f\n", accuracy, kappa, micro_f1);
    out << buf;
    out << "macro_precision: " << fmt(macro_precision, "undefined") << '\n';
    out << "macro_recall: " << fmt(macro_recall, "undefined") << '\n';
    out << "macro_iou: " << fmt(macro_iou, "undefined") << '\n';
    out << "macro_f1: " << fmt(macro_f1, "undefined") << '\n';
    out << "per class (precision recall iou f1 support):\n";
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        const auto& m = per_class[k];
        out << "  " << name_of(class_names, int(k)) << ' ' << fmt(m.precision, "undefined") << ' '
            << fmt(m.recall, "undefined") << ' ' << fmt(m.iou, "undefined") << ' ' << fmt(m.f1, "undefined") << ' '
            << m.support << '\n';
    }
    return out.str();
}

std::string MetricsReport::to_csv(std::span<const std::string> class_names) const {
    std::ostringstream out;
    out << "class,precision,recall,iou,f1,support\n";
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        const auto& m = per_class[k];
        out << name_of(class_names, int(k)) << ',' << fmt(m.precision, "") << ',' << fmt(m.recall, "") << ','
            << fmt(m.iou, "") << ',' << fmt(m.f1, "") << ',' << m.support << '\n';
    }
    out << "macro," << fmt(macro_precision, "") << ',' << fmt(macro_recall, "") << ',' << fmt(macro_iou, "") << ','
        << fmt(macro_f1, "") << ',' << total << '\n';
    out << "accuracy," << fmt(accuracy, "") << ",,,," << total << '\n';
    out << "kappa," << fmt(kappa, "") << ",,,," << total << '\n';
    out << "micro_f1," << fmt(micro_f1, "") << ",,,," << total << '\n';
    return out.str();
}

NormalizedConfusion normalize_confusion(const ConfusionMatrix& cm) {
    const int c = cm.class_count();
    NormalizedConfusion n;
    n.rows.assign(c, std::vector<double>(c, 0.0));
    n.empty_row.assign(c, false);
    for (int t = 0; t < c; ++t) {
        const std::uint64_t s = cm.row_sum(t);
        if (s == 0) {
            n.empty_row[t] = true;
            continue;
        }
        for (int p = 0; p < c; ++p) n.rows[t][p] = double(cm.at(t, p)) / double(s);
    }
    return n;
}

std::vector<std::optional<double>> acw_weights(std::span<const double> frequencies) {
    std::vector<double> present;
    for (double f : frequencies)
        if (f > 0.0) present.push_back(f);
    std::vector<std::optional<double>> w(frequencies.size());
    if (present.empty()) return w;
    std::sort(present.begin(), present.end());
    const std::size_t n = present.size();
    const double median = n % 2 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
    double sum = 0.0;
    for (std::size_t c = 0; c < frequencies.size(); ++c)
        if (frequencies[c] > 0.0) {
            w[c] = median / frequencies[c];
            sum += *w[c];
        }
    const double scale = double(n) / sum;
    for (auto& v : w)
        if (v) *v *= scale;
    return w;
}

AcwState::AcwState(int class_count, double decay) : classes_(class_count), decay_(decay), freq_(class_count, 0.0) {
    if (class_count < 1) throw ValidationError("ACW needs at least one class");
    if (!(decay >= 0.0 && decay < 1.0)) throw ConfigError("ACW decay must be in [0, 1)");
}

std::vector<std::optional<double>> AcwState::update(std::span<const ClassMask> batch) {
    std::vector<std::uint64_t> counts(classes_, 0);
    std::uint64_t total = 0;
    for (const auto& mask : batch)
        for (auto v : mask.values()) {
            if (v < 1 || v > classes_)
                throw ValidationError("batch holds class value " + std::to_string(v) + " outside 1.." +
                                      std::to_string(classes_));
            ++counts[v - 1];
            ++total;
        }
    if (total == 0) throw ValidationError("ACW batch is empty");
    for (int c = 0; c < classes_; ++c) {
        const double f = double(counts[c]) / double(total);
        freq_[c] = iterations_ == 0 ? f : decay_ * freq_[c] + (1.0 - decay_) * f;
    }
    ++iterations_;
    return acw_weights(freq_);
}

} // namespace histmap

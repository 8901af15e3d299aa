#include <cmath>
#include <numeric>

#include "dermabcd/evaluate.hpp"

namespace dermabcd {

double border_error(const BinaryMask& automatic, const BinaryMask& manual) {
    if (!automatic.same_shape(manual)) {
        throw std::invalid_argument("border_error: mask sizes differ");
    }
    const std::size_t reference = manual.count();
    if (reference == 0) {
        throw std::invalid_argument("border_error: empty manual mask");
    }
    return static_cast<double>((automatic ^ manual).count()) / static_cast<double>(reference) * 100.0;
}

ClassMetrics class_metrics(const std::vector<int>& predictions, const std::vector<int>& truth) {
    if (predictions.size() != truth.size()) {
        throw std::invalid_argument("class_metrics: length mismatch");
    }
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] != 0;
        const bool p = predictions[i] != 0;
        if (t && p) {
            ++tp;
        } else if (t) {
            ++fn;
        } else if (p) {
            ++fp;
        } else {
            ++tn;
        }
    }
    if (tp + fn == 0 || tn + fp == 0) {
        throw std::invalid_argument("class_metrics: truth must contain both classes");
    }
    ClassMetrics m;
    m.sn = static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.sp = static_cast<double>(tn) / static_cast<double>(tn + fp);
    m.tcr = static_cast<double>(tp + tn) / static_cast<double>(truth.size());
    return m;
}

MeanStd mean_std(const std::vector<double>& values) {
    if (values.empty()) {
        return {};
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / n)};
}

}  // namespace dermabcd

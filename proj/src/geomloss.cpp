#include "viewsynth/geomloss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace viewsynth {

void LossConfig::validate() const
{
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    if (!(weight_floor >= 0.0 && weight_floor < 1.0)) {
        throw std::invalid_argument("weight_floor must be in [0, 1)");
    }
}

WeightTable::WeightTable(int bins, std::vector<double> weights) : bins_(bins), weights_(std::move(weights))
{
    if (bins <= 0 || weights_.size() != static_cast<std::size_t>(bins) * bins) {
        throw std::invalid_argument("weight table must be bins x bins");
    }
    row_sums_.resize(bins);
    for (int g = 0; g < bins; ++g) {
        const auto r = row(g);
        row_sums_[g] = std::accumulate(r.begin(), r.end(), 0.0);
    }
}

std::span<const double> WeightTable::row(int gt_bin) const
{
    return {weights_.data() + static_cast<std::size_t>(gt_bin) * bins_, static_cast<std::size_t>(bins_)};
}

namespace {

ViewpointTuple group_view(AngleGroup group, double angle_deg)
{
    switch (group) {
    case AngleGroup::azimuth:
        return {angle_deg, 0.0, 0.0};
    case AngleGroup::elevation:
        return {0.0, angle_deg, 0.0};
    case AngleGroup::inplane:
        return {0.0, 0.0, angle_deg};
    }
    return {};
}

void check_gt(std::span<const double> logits, int gt_bin, const WeightTable& table)
{
    if (logits.size() != static_cast<std::size_t>(table.bins())) {
        throw std::invalid_argument("logit count " + std::to_string(logits.size()) + " does not match " +
                                    std::to_string(table.bins()) + " bins");
    }
    if (gt_bin < 0 || gt_bin >= table.bins()) {
        throw std::out_of_range("ground-truth bin " + std::to_string(gt_bin) + " out of range");
    }
}

} // namespace

WeightTable build_weight_table(const LossConfig& config, AngleGroup group)
{
    config.validate();
    const int n = config.layout.bins(group);
    std::vector<ViewpointTuple> centers;
    centers.reserve(n);
    for (int k = 0; k < n; ++k) {
        centers.push_back(group_view(group, bin_center_angle(k, group, n)));
    }
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    for (int g = 0; g < n; ++g) {
        for (int v = 0; v < n; ++v) {
            double x = std::exp(-viewpoint_distance(centers[v], centers[g]) / config.sigma);
            if (x < config.weight_floor) {
                x = 0.0;
            }
            w[static_cast<std::size_t>(g) * n + v] = x;
        }
    }
    return {n, std::move(w)};
}

std::vector<double> log_softmax(std::span<const double> logits)
{
    if (logits.empty()) {
        throw std::invalid_argument("softmax of an empty vector");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (const double z : logits) {
        s += std::exp(z - m);
    }
    const double lse = m + std::log(s);
    std::vector<double> out(logits.size());
    std::transform(logits.begin(), logits.end(), out.begin(), [lse](double z) { return z - lse; });
    return out;
}

std::vector<double> softmax(std::span<const double> logits)
{
    if (logits.empty()) {
        throw std::invalid_argument("softmax of an empty vector");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        s += p[i];
    }
    for (double& x : p) {
        x /= s;
    }
    return p;
}

double loss_forward(std::span<const double> logits, int gt_bin, const WeightTable& table)
{
    check_gt(logits, gt_bin, table);
    const auto logp = log_softmax(logits);
    const auto w = table.row(gt_bin);
    double loss = 0.0;
    for (std::size_t v = 0; v < logp.size(); ++v) {
        if (w[v] != 0.0) {
            loss -= w[v] * logp[v];
        }
    }
    return loss;
}

LossOutput loss_backward(std::span<const double> logits, int gt_bin, const WeightTable& table)
{
    check_gt(logits, gt_bin, table);
    const auto logp = log_softmax(logits);
    const auto w = table.row(gt_bin);
    const double wsum = table.row_sum(gt_bin);
    LossOutput out;
    out.grad_logits.resize(logits.size());
    for (std::size_t k = 0; k < logp.size(); ++k) {
        if (w[k] != 0.0) {
            out.loss -= w[k] * logp[k];
        }
        out.grad_logits[k] = std::exp(logp[k]) * wsum - w[k];
    }
    return out;
}

double loss_forward(std::span<const double> logits, int gt_bin, AngleGroup group, const LossConfig& config)
{
    return loss_forward(logits, gt_bin, build_weight_table(config, group));
}

LossOutput loss_backward(std::span<const double> logits, int gt_bin, AngleGroup group, const LossConfig& config)
{
    return loss_backward(logits, gt_bin, build_weight_table(config, group));
}

LossOutput cross_entropy_backward(std::span<const double> logits, int gt_bin)
{
    if (gt_bin < 0 || static_cast<std::size_t>(gt_bin) >= logits.size()) {
        throw std::out_of_range("ground-truth bin " + std::to_string(gt_bin) + " out of range");
    }
    const auto logp = log_softmax(logits);
    LossOutput out;
    out.loss = -logp[gt_bin];
    out.grad_logits.resize(logits.size());
    for (std::size_t k = 0; k < logp.size(); ++k) {
        out.grad_logits[k] = std::exp(logp[k]);
    }
    out.grad_logits[gt_bin] -= 1.0;
    return out;
}

GeometricLoss::GeometricLoss(const LossConfig& config) : config_(config)
{
    for (const AngleGroup g : kAngleGroups) {
        tables_[static_cast<std::size_t>(g)] = build_weight_table(config_, g);
    }
}

BatchLossOutput batch_loss(std::span<const LossSample> samples, int num_heads, const GeometricLoss& loss)
{
    const BinLayout& layout = loss.config().layout;
    const std::size_t head_size = layout.total_bins();
    BatchLossOutput out;
    out.grad_head_logits.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const LossSample& s = samples[i];
        if (s.head_logits.size() != head_size * num_heads) {
            throw std::invalid_argument("sample " + std::to_string(i) + ": expected " +
                                        std::to_string(head_size * num_heads) + " logits, got " +
                                        std::to_string(s.head_logits.size()));
        }
        if (s.class_label < 0 || s.class_label >= num_heads) {
            throw std::invalid_argument("sample " + std::to_string(i) + ": class label " +
                                        std::to_string(s.class_label) + " has no head");
        }
        std::vector<double> grad(s.head_logits.size(), 0.0);
        const std::size_t head_start = head_size * s.class_label;
        for (const AngleGroup g : kAngleGroups) {
            const std::size_t off = head_start + layout.offset(g);
            const auto logits = s.head_logits.subspan(off, layout.bins(g));
            const LossOutput lo = loss_backward(logits, s.gt[g], loss.table(g));
            out.loss += s.weight * lo.loss;
            for (std::size_t k = 0; k < lo.grad_logits.size(); ++k) {
                grad[off + k] = s.weight * lo.grad_logits[k];
            }
        }
        out.grad_head_logits.push_back(std::move(grad));
    }
    return out;
}

} // namespace viewsynth

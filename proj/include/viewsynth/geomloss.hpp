#pragma once

#include "viewsynth/viewgeom.hpp"

#include <array>
#include <span>
#include <vector>

namespace viewsynth {

struct LossConfig
{
    double sigma = 1.0; ///< decay scale of the bin weights, radians of viewpoint_distance
    BinLayout layout;
    double weight_floor = 0.0; ///< weights below this are set to 0

    void validate() const;
};

/**
 * Square table of bin weights for one angle group: weight(v, gt) =
 * exp(-d(v, gt) / sigma), where d is the viewpoint distance between the two
 * bin centers with the other two angles held at zero.
 */
class WeightTable
{
public:
    WeightTable() = default;
    WeightTable(int bins, std::vector<double> weights);

    int bins() const { return bins_; }
    double weight(int bin, int gt_bin) const { return weights_[static_cast<std::size_t>(gt_bin) * bins_ + bin]; }
    /// Weights of every bin against one ground-truth bin.
    std::span<const double> row(int gt_bin) const;
    /// Sum of row(gt_bin).
    double row_sum(int gt_bin) const { return row_sums_[static_cast<std::size_t>(gt_bin)]; }

private:
    int bins_ = 0;
    std::vector<double> weights_;
    std::vector<double> row_sums_;
};

WeightTable build_weight_table(const LossConfig& config, AngleGroup group);

struct LossOutput
{
    double loss = 0.0;
    std::vector<double> grad_logits;
};

/// Numerically stable softmax; throws std::invalid_argument on empty input.
std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// L = -sum_v w(v, gt) log p_v with p = softmax(logits).
double loss_forward(std::span<const double> logits, int gt_bin, const WeightTable& table);
/// Loss and dL/dz_k = p_k * sum_v w(v, gt) - w(k, gt).
LossOutput loss_backward(std::span<const double> logits, int gt_bin, const WeightTable& table);

double loss_forward(std::span<const double> logits, int gt_bin, AngleGroup group, const LossConfig& config);
LossOutput loss_backward(std::span<const double> logits, int gt_bin, AngleGroup group, const LossConfig& config);

/// Plain softmax cross-entropy, -log p_gt, and its gradient p - onehot(gt).
LossOutput cross_entropy_backward(std::span<const double> logits, int gt_bin);

/// Weight tables for all three angle groups of a layout.
class GeometricLoss
{
public:
    explicit GeometricLoss(const LossConfig& config);

    const LossConfig& config() const { return config_; }
    const WeightTable& table(AngleGroup group) const { return tables_[static_cast<std::size_t>(group)]; }

private:
    LossConfig config_;
    std::array<WeightTable, 3> tables_;
};

/**
 * One training sample for batch_loss. head_logits holds the concatenated
 * logits of every class head (num_heads * layout.total_bins(), head-major).
 */
struct LossSample
{
    std::span<const double> head_logits;
    int class_label = 0;
    ViewBins gt;
    double weight = 1.0; ///< per-sample multiplier (e.g. per data source)
};

struct BatchLossOutput
{
    double loss = 0.0;
    std::vector<std::vector<double>> grad_head_logits; ///< one vector per sample, same shape as head_logits
};

/**
 * Sum over samples and angle groups of the loss on the sample's own class
 * head. Gradients for all other heads are exactly zero. Throws
 * std::invalid_argument on mismatched head dimensions or a bad class label.
 */
BatchLossOutput batch_loss(std::span<const LossSample> samples, int num_heads, const GeometricLoss& loss);

} // namespace viewsynth

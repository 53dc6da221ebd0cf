#pragma once

#include "viewsynth/box.hpp"
#include "viewsynth/viewgeom.hpp"

#include "json.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace viewsynth {

struct DetectionRecord
{
    std::string image_id;
    std::string category;
    Box bbox;
    double score = 0.0;
    ViewpointTuple viewpoint;
    /// Optional per-group probability vectors (azimuth, elevation, in-plane); empty when absent.
    std::array<std::vector<double>, 3> probabilities;
};

struct GroundTruthRecord
{
    std::string image_id;
    std::string category;
    Box bbox;
    ViewpointTuple viewpoint;
    bool difficult = false;
};

/// Intersection over union; 0 when disjoint.
double iou(const Box& a, const Box& b);

/// Circular azimuth error in degrees, in [0, 180].
double azimuth_error_deg(double a_deg, double b_deg);

/// Median of a non-empty list (mean of the middle two for even sizes).
double median(std::vector<double> values);

enum class ApInterpolation { all_points, eleven_point };

using MatchPredicate = std::function<bool(const DetectionRecord&, const GroundTruthRecord&)>;

struct PrPoint
{
    double recall = 0.0;
    double precision = 0.0;
};

/**
 * Greedy matching in descending score order (ties broken by image id, box,
 * then viewpoint, so input order never matters). Each detection takes the
 * highest-IoU ground truth in its image (ties by gt order). With IoU >= 0.5
 * and that gt unmatched, the gt becomes matched and the detection is a true
 * positive iff the predicate holds; otherwise it is a false positive.
 * Detections matched to difficult ground truths are ignored, and difficult
 * ground truths do not count toward recall.
 */
std::vector<PrPoint> precision_recall(std::span<const DetectionRecord> detections,
                                      std::span<const GroundTruthRecord> groundtruths, const MatchPredicate& predicate);

/// Area under the monotone precision envelope. Zero ground truths give 0 and a warning on stderr.
double average_precision(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                         const MatchPredicate& predicate, ApInterpolation method = ApInterpolation::all_points);

/// Plain AP: every localized detection counts.
double average_precision(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                         ApInterpolation method = ApInterpolation::all_points);

inline constexpr std::array<int, 4> kAvpBinCounts{4, 8, 16, 24};

/// AP whose true positives also need the same azimuth bin under an n-bin
/// layout; n must be 4, 8, 16 or 24 (std::invalid_argument otherwise).
double avp(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
           int azimuth_bins, ApInterpolation method = ApInterpolation::all_points);

struct AccuracyCurve
{
    std::vector<std::pair<double, double>> points; ///< (delta_deg, fraction with error < delta)
    double median_error_deg = 0.0;
};

AccuracyCurve accuracy_curve(std::span<const double> predicted_azimuth_deg, std::span<const double> gt_azimuth_deg,
                             std::span<const double> delta_grid_deg);

struct AccMedErr
{
    double accuracy = 0.0;       ///< fraction with rotation error < pi/6
    double median_error_deg = 0.0;
};

AccMedErr acc_pi6_mederr(std::span<const ViewpointTuple> predicted, std::span<const ViewpointTuple> groundtruth);

/// Fraction of pairs whose 16-way bins are equal or circularly adjacent.
double tolerance_accuracy_16v(std::span<const int> predicted_bins, std::span<const int> gt_bins);

/**
 * Circular non-maximum suppression over a probability vector: bin i survives
 * when no bin within nms_window/2 of it has higher probability (plateaus all
 * survive). Returns at most k survivors by descending probability, lowest
 * index first among ties.
 */
std::vector<int> topk_proposals(std::span<const double> probabilities, int k, int nms_window);

/// True when any proposal equals the ground-truth bin.
bool topk_hit(std::span<const int> proposals, int gt_bin);

struct EvalOptions
{
    std::vector<double> delta_grid_deg; ///< empty: 0..180 in 1 degree steps
    int nms_window = 5;
    int top_k = 2;
    ApInterpolation interpolation = ApInterpolation::all_points;
};

struct CategoryReport
{
    std::string category;
    std::size_t num_groundtruths = 0;
    std::size_t num_detections = 0;
    std::size_t num_pairs = 0; ///< ground truths paired with a detection for viewpoint metrics
    double ap = 0.0;
    std::array<double, 4> avp{}; ///< at kAvpBinCounts
    AccuracyCurve curve;
    double acc_pi6 = 0.0;
    double mederr_deg = 0.0;
    double tol_16v = 0.0;
    bool has_topk = false;
    double top1_accuracy = 0.0;
    double topk_accuracy = 0.0;
};

struct EvalReport
{
    std::vector<CategoryReport> categories; ///< sorted by name
    CategoryReport mean;                    ///< "Avg." row: unweighted mean over categories
    std::vector<std::string> warnings;
};

/**
 * Per-category AP, AVP, accuracy curve, Acc_pi/6, MedErr, 16V_tol and
 * top-1/top-k accuracy. Viewpoint metrics pair each non-difficult ground
 * truth with the highest-scoring same-category detection in its image with
 * IoU >= 0.5; unpaired ground truths are left out of them.
 */
EvalReport evaluate(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                    const EvalOptions& options = {});

nlohmann::json report_to_json(const EvalReport& report);
/// Table with one column per category plus "Avg.", one row per metric.
std::string report_table(const EvalReport& report);
/// delta_deg followed by one column per category and "Avg.".
std::string curve_csv(const EvalReport& report);

/// JSON lines readers; schema violations throw InputError with line numbers.
std::vector<DetectionRecord> read_detections(std::istream& in);
std::vector<GroundTruthRecord> read_groundtruths(std::istream& in);

} // namespace viewsynth

#include "viewsynth/evalkit.hpp"

#include "viewsynth/errors.hpp"
#include "viewsynth/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace viewsynth {

double iou(const Box& a, const Box& b)
{
    const double inter = intersect(a, b).area();
    if (inter <= 0.0) {
        return 0.0;
    }
    return inter / (a.area() + b.area() - inter);
}

double azimuth_error_deg(double a_deg, double b_deg)
{
    const double d = std::abs(wrap_360(a_deg) - wrap_360(b_deg));
    return std::min(d, 360.0 - d);
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("median of an empty list");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

namespace {

auto detection_key(const DetectionRecord& d)
{
    return std::make_tuple(-d.score, std::cref(d.image_id), d.bbox.left, d.bbox.top, d.bbox.right, d.bbox.bottom,
                           d.viewpoint.azimuth_deg(), d.viewpoint.elevation_deg(), d.viewpoint.inplane_deg());
}

std::vector<std::size_t> score_order(std::span<const DetectionRecord> detections)
{
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detection_key(detections[a]) < detection_key(detections[b]);
    });
    return order;
}

} // namespace

std::vector<PrPoint> precision_recall(std::span<const DetectionRecord> detections,
                                      std::span<const GroundTruthRecord> groundtruths, const MatchPredicate& predicate)
{
    std::map<std::string, std::vector<std::size_t>> by_image;
    std::size_t npos = 0;
    for (std::size_t g = 0; g < groundtruths.size(); ++g) {
        by_image[groundtruths[g].image_id].push_back(g);
        npos += groundtruths[g].difficult ? 0 : 1;
    }
    std::vector<bool> matched(groundtruths.size(), false);
    std::vector<PrPoint> curve;
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const std::size_t di : score_order(detections)) {
        const DetectionRecord& d = detections[di];
        long best = -1;
        double best_iou = -1.0;
        if (const auto it = by_image.find(d.image_id); it != by_image.end()) {
            for (const std::size_t g : it->second) {
                if (groundtruths[g].category != d.category) {
                    continue;
                }
                const double o = iou(d.bbox, groundtruths[g].bbox);
                if (o > best_iou) {
                    best_iou = o;
                    best = static_cast<long>(g);
                }
            }
        }
        if (best >= 0 && best_iou >= 0.5) {
            const GroundTruthRecord& gt = groundtruths[best];
            if (gt.difficult) {
                continue;
            }
            if (!matched[best]) {
                matched[best] = true;
                if (predicate(d, gt)) {
                    ++tp;
                } else {
                    ++fp;
                }
            } else {
                ++fp;
            }
        } else {
            ++fp;
        }
        curve.push_back({npos > 0 ? static_cast<double>(tp) / npos : 0.0, static_cast<double>(tp) / (tp + fp)});
    }
    return curve;
}

double average_precision(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                         const MatchPredicate& predicate, ApInterpolation method)
{
    const bool any_positive =
        std::any_of(groundtruths.begin(), groundtruths.end(), [](const auto& g) { return !g.difficult; });
    if (!any_positive) {
        std::cerr << "warning: average precision with zero ground truths is defined as 0\n";
        return 0.0;
    }
    const auto curve = precision_recall(detections, groundtruths, predicate);
    if (method == ApInterpolation::eleven_point) {
        double ap = 0.0;
        for (int i = 0; i <= 10; ++i) {
            const double t = i / 10.0;
            double p = 0.0;
            for (const auto& pt : curve) {
                if (pt.recall >= t) {
                    p = std::max(p, pt.precision);
                }
            }
            ap += p / 11.0;
        }
        return ap;
    }
    std::vector<double> mrec{0.0};
    std::vector<double> mpre{0.0};
    for (const auto& pt : curve) {
        mrec.push_back(pt.recall);
        mpre.push_back(pt.precision);
    }
    mrec.push_back(1.0);
    mpre.push_back(0.0);
    for (std::size_t i = mpre.size() - 1; i > 0; --i) {
        mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
    }
    double ap = 0.0;
    for (std::size_t i = 1; i < mrec.size(); ++i) {
        if (mrec[i] != mrec[i - 1]) {
            ap += (mrec[i] - mrec[i - 1]) * mpre[i];
        }
    }
    return ap;
}

double average_precision(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                         ApInterpolation method)
{
    return average_precision(
        detections, groundtruths, [](const auto&, const auto&) { return true; }, method);
}

double avp(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
           int azimuth_bins, ApInterpolation method)
{
    if (std::find(kAvpBinCounts.begin(), kAvpBinCounts.end(), azimuth_bins) == kAvpBinCounts.end()) {
        throw std::invalid_argument("AVP is defined for 4, 8, 16 or 24 azimuth bins, got " +
                                    std::to_string(azimuth_bins));
    }
    const auto same_bin = [azimuth_bins](const DetectionRecord& d, const GroundTruthRecord& g) {
        return discretize_angle(d.viewpoint.azimuth_deg(), AngleGroup::azimuth, azimuth_bins) ==
               discretize_angle(g.viewpoint.azimuth_deg(), AngleGroup::azimuth, azimuth_bins);
    };
    return average_precision(detections, groundtruths, same_bin, method);
}

AccuracyCurve accuracy_curve(std::span<const double> predicted_azimuth_deg, std::span<const double> gt_azimuth_deg,
                             std::span<const double> delta_grid_deg)
{
    if (predicted_azimuth_deg.size() != gt_azimuth_deg.size()) {
        throw std::invalid_argument("prediction and ground-truth counts differ");
    }
    if (predicted_azimuth_deg.empty()) {
        throw std::invalid_argument("accuracy curve needs at least one pair");
    }
    std::vector<double> errors(predicted_azimuth_deg.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        errors[i] = azimuth_error_deg(predicted_azimuth_deg[i], gt_azimuth_deg[i]);
    }
    AccuracyCurve curve;
    for (const double delta : delta_grid_deg) {
        const auto hits = std::count_if(errors.begin(), errors.end(), [delta](double e) { return e < delta; });
        curve.points.emplace_back(delta, static_cast<double>(hits) / errors.size());
    }
    curve.median_error_deg = median(std::move(errors));
    return curve;
}

AccMedErr acc_pi6_mederr(std::span<const ViewpointTuple> predicted, std::span<const ViewpointTuple> groundtruth)
{
    if (predicted.size() != groundtruth.size()) {
        throw std::invalid_argument("prediction and ground-truth counts differ");
    }
    if (predicted.empty()) {
        throw std::invalid_argument("Acc/MedErr needs at least one pair");
    }
    std::vector<double> errors(predicted.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        errors[i] = rotation_geodesic(rotation_from_viewpoint(predicted[i]), rotation_from_viewpoint(groundtruth[i]));
        hits += errors[i] < kPi / 6.0 ? 1 : 0;
    }
    return {static_cast<double>(hits) / predicted.size(), rad2deg(median(std::move(errors)))};
}

double tolerance_accuracy_16v(std::span<const int> predicted_bins, std::span<const int> gt_bins)
{
    if (predicted_bins.size() != gt_bins.size()) {
        throw std::invalid_argument("prediction and ground-truth counts differ");
    }
    if (predicted_bins.empty()) {
        throw std::invalid_argument("16V_tol needs at least one pair");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted_bins.size(); ++i) {
        const int p = predicted_bins[i];
        const int g = gt_bins[i];
        if (p < 0 || p >= 16 || g < 0 || g >= 16) {
            throw std::out_of_range("16-view bins must be in [0, 16)");
        }
        const int d = std::abs(p - g);
        hits += std::min(d, 16 - d) <= 1 ? 1 : 0;
    }
    return static_cast<double>(hits) / predicted_bins.size();
}

std::vector<int> topk_proposals(std::span<const double> probabilities, int k, int nms_window)
{
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (nms_window < 1 || nms_window % 2 == 0) {
        throw std::invalid_argument("NMS window must be a positive odd bin count");
    }
    const int n = static_cast<int>(probabilities.size());
    if (n == 0) {
        throw std::invalid_argument("empty probability vector");
    }
    const int half = std::min(nms_window / 2, (n - 1) / 2);
    std::vector<int> peaks;
    for (int i = 0; i < n; ++i) {
        bool peak = true;
        for (int o = -half; o <= half && peak; ++o) {
            const int j = ((i + o) % n + n) % n;
            peak = probabilities[j] <= probabilities[i];
        }
        if (peak) {
            peaks.push_back(i);
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](int a, int b) { return probabilities[a] > probabilities[b]; });
    if (static_cast<int>(peaks.size()) > k) {
        peaks.resize(k);
    }
    return peaks;
}

bool topk_hit(std::span<const int> proposals, int gt_bin)
{
    return std::find(proposals.begin(), proposals.end(), gt_bin) != proposals.end();
}

namespace {

std::vector<double> default_delta_grid()
{
    std::vector<double> grid;
    for (int d = 0; d <= 180; ++d) {
        grid.push_back(d);
    }
    return grid;
}

CategoryReport evaluate_category(const std::string& category, std::span<const DetectionRecord> dets,
                                 std::span<const GroundTruthRecord> gts, const EvalOptions& options,
                                 std::vector<std::string>& warnings)
{
    CategoryReport rep;
    rep.category = category;
    rep.num_detections = dets.size();
    rep.num_groundtruths = static_cast<std::size_t>(
        std::count_if(gts.begin(), gts.end(), [](const auto& g) { return !g.difficult; }));
    if (rep.num_groundtruths == 0) {
        warnings.push_back("category '" + category + "' has no ground truths; AP and AVP reported as 0");
    } else {
        rep.ap = average_precision(dets, gts, options.interpolation);
        for (std::size_t i = 0; i < kAvpBinCounts.size(); ++i) {
            rep.avp[i] = avp(dets, gts, kAvpBinCounts[i], options.interpolation);
        }
    }

    // Pair each ground truth with its best-scoring overlapping detection.
    const auto order = score_order(dets);
    std::vector<double> pred_az;
    std::vector<double> gt_az;
    std::vector<ViewpointTuple> pred_vp;
    std::vector<ViewpointTuple> gt_vp;
    std::vector<int> pred16;
    std::vector<int> gt16;
    std::size_t topk_total = 0;
    std::size_t top1_hits = 0;
    std::size_t topk_hits = 0;
    for (const auto& g : gts) {
        if (g.difficult) {
            continue;
        }
        const DetectionRecord* best = nullptr;
        for (const std::size_t di : order) {
            if (dets[di].image_id == g.image_id && iou(dets[di].bbox, g.bbox) >= 0.5) {
                best = &dets[di];
                break;
            }
        }
        if (!best) {
            continue;
        }
        pred_az.push_back(best->viewpoint.azimuth_deg());
        gt_az.push_back(g.viewpoint.azimuth_deg());
        pred_vp.push_back(best->viewpoint);
        gt_vp.push_back(g.viewpoint);
        pred16.push_back(discretize_angle(best->viewpoint.azimuth_deg(), AngleGroup::azimuth, 16));
        gt16.push_back(discretize_angle(g.viewpoint.azimuth_deg(), AngleGroup::azimuth, 16));
        const auto& probs = best->probabilities[0];
        if (!probs.empty()) {
            const int n = static_cast<int>(probs.size());
            const int gt_bin = discretize_angle(g.viewpoint.azimuth_deg(), AngleGroup::azimuth, n);
            const auto top1 = topk_proposals(probs, 1, options.nms_window);
            const auto topk = topk_proposals(probs, options.top_k, options.nms_window);
            ++topk_total;
            top1_hits += topk_hit(top1, gt_bin) ? 1 : 0;
            topk_hits += topk_hit(topk, gt_bin) ? 1 : 0;
        }
    }
    rep.num_pairs = pred_az.size();
    if (rep.num_pairs == 0) {
        warnings.push_back("category '" + category + "' has no detection paired with a ground truth");
        return rep;
    }
    const auto grid = options.delta_grid_deg.empty() ? default_delta_grid() : options.delta_grid_deg;
    rep.curve = accuracy_curve(pred_az, gt_az, grid);
    const AccMedErr am = acc_pi6_mederr(pred_vp, gt_vp);
    rep.acc_pi6 = am.accuracy;
    rep.mederr_deg = am.median_error_deg;
    rep.tol_16v = tolerance_accuracy_16v(pred16, gt16);
    if (topk_total > 0) {
        rep.has_topk = true;
        rep.top1_accuracy = static_cast<double>(top1_hits) / topk_total;
        rep.topk_accuracy = static_cast<double>(topk_hits) / topk_total;
    }
    return rep;
}

CategoryReport mean_report(const std::vector<CategoryReport>& cats)
{
    CategoryReport m;
    m.category = "Avg.";
    if (cats.empty()) {
        return m;
    }
    const double n = static_cast<double>(cats.size());
    std::size_t with_topk = 0;
    for (const auto& c : cats) {
        m.num_groundtruths += c.num_groundtruths;
        m.num_detections += c.num_detections;
        m.num_pairs += c.num_pairs;
        m.ap += c.ap / n;
        for (std::size_t i = 0; i < m.avp.size(); ++i) {
            m.avp[i] += c.avp[i] / n;
        }
        m.acc_pi6 += c.acc_pi6 / n;
        m.mederr_deg += c.mederr_deg / n;
        m.tol_16v += c.tol_16v / n;
        m.curve.median_error_deg += c.curve.median_error_deg / n;
        if (c.has_topk) {
            ++with_topk;
            m.top1_accuracy += c.top1_accuracy;
            m.topk_accuracy += c.topk_accuracy;
        }
    }
    if (with_topk > 0) {
        m.has_topk = true;
        m.top1_accuracy /= with_topk;
        m.topk_accuracy /= with_topk;
    }
    // Mean curve over categories that produced one.
    const CategoryReport* ref = nullptr;
    for (const auto& c : cats) {
        if (!c.curve.points.empty()) {
            ref = &c;
            break;
        }
    }
    if (ref) {
        for (std::size_t i = 0; i < ref->curve.points.size(); ++i) {
            double sum = 0.0;
            std::size_t cnt = 0;
            for (const auto& c : cats) {
                if (i < c.curve.points.size()) {
                    sum += c.curve.points[i].second;
                    ++cnt;
                }
            }
            m.curve.points.emplace_back(ref->curve.points[i].first, sum / cnt);
        }
    }
    return m;
}

} // namespace

EvalReport evaluate(std::span<const DetectionRecord> detections, std::span<const GroundTruthRecord> groundtruths,
                    const EvalOptions& options)
{
    std::set<std::string> categories;
    for (const auto& d : detections) {
        categories.insert(d.category);
    }
    for (const auto& g : groundtruths) {
        categories.insert(g.category);
    }
    EvalReport report;
    for (const auto& cat : categories) {
        std::vector<DetectionRecord> dets;
        std::vector<GroundTruthRecord> gts;
        std::copy_if(detections.begin(), detections.end(), std::back_inserter(dets),
                     [&](const auto& d) { return d.category == cat; });
        std::copy_if(groundtruths.begin(), groundtruths.end(), std::back_inserter(gts),
                     [&](const auto& g) { return g.category == cat; });
        report.categories.push_back(evaluate_category(cat, dets, gts, options, report.warnings));
    }
    if (groundtruths.empty()) {
        report.warnings.push_back("no ground truths; all metrics are zero");
    }
    report.mean = mean_report(report.categories);
    return report;
}

namespace {

nlohmann::json category_json(const CategoryReport& c)
{
    nlohmann::json avp_json = nlohmann::json::object();
    for (std::size_t i = 0; i < kAvpBinCounts.size(); ++i) {
        avp_json[std::to_string(kAvpBinCounts[i]) + "V"] = c.avp[i];
    }
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [delta, frac] : c.curve.points) {
        curve.push_back({delta, frac});
    }
    nlohmann::json j = {
        {"category", c.category},
        {"num_groundtruths", c.num_groundtruths},
        {"num_detections", c.num_detections},
        {"num_pairs", c.num_pairs},
        {"ap", c.ap},
        {"avp", avp_json},
        {"accuracy_curve", curve},
        {"median_azimuth_error_deg", c.curve.median_error_deg},
        {"acc_pi6", c.acc_pi6},
        {"mederr_deg", c.mederr_deg},
        {"tol_16v", c.tol_16v},
    };
    if (c.has_topk) {
        j["top1_accuracy"] = c.top1_accuracy;
        j["topk_accuracy"] = c.topk_accuracy;
    }
    return j;
}

std::string fmt3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace

nlohmann::json report_to_json(const EvalReport& report)
{
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& c : report.categories) {
        cats.push_back(category_json(c));
    }
    return {{"categories", cats}, {"mean", category_json(report.mean)}, {"warnings", report.warnings}};
}

std::string report_table(const EvalReport& report)
{
    std::vector<const CategoryReport*> cols;
    for (const auto& c : report.categories) {
        cols.push_back(&c);
    }
    cols.push_back(&report.mean);

    std::vector<std::pair<std::string, std::function<std::string(const CategoryReport&)>>> rows{
        {"AP", [](const auto& c) { return fmt3(c.ap); }},
        {"AVP-4V", [](const auto& c) { return fmt3(c.avp[0]); }},
        {"AVP-8V", [](const auto& c) { return fmt3(c.avp[1]); }},
        {"AVP-16V", [](const auto& c) { return fmt3(c.avp[2]); }},
        {"AVP-24V", [](const auto& c) { return fmt3(c.avp[3]); }},
        {"Acc_pi/6", [](const auto& c) { return fmt3(c.acc_pi6); }},
        {"MedErr", [](const auto& c) { return fmt3(c.mederr_deg); }},
        {"MedAzErr", [](const auto& c) { return fmt3(c.curve.median_error_deg); }},
        {"16V_tol", [](const auto& c) { return fmt3(c.tol_16v); }},
    };
    if (report.mean.has_topk) {
        rows.emplace_back("Top1", [](const auto& c) { return c.has_topk ? fmt3(c.top1_accuracy) : "-"; });
        rows.emplace_back("TopK", [](const auto& c) { return c.has_topk ? fmt3(c.topk_accuracy) : "-"; });
    }

    std::size_t label_w = 8;
    for (const auto& r : rows) {
        label_w = std::max(label_w, r.first.size());
    }
    std::vector<std::size_t> widths;
    for (const auto* c : cols) {
        widths.push_back(std::max<std::size_t>(c->category.size(), 7));
    }
    std::ostringstream out;
    auto pad = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    out << pad("", label_w);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << "  " << pad(cols[i]->category, widths[i]);
    }
    out << '\n';
    for (const auto& [label, cell] : rows) {
        out << label << std::string(label_w - label.size(), ' ');
        for (std::size_t i = 0; i < cols.size(); ++i) {
            out << "  " << pad(cell(*cols[i]), widths[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string curve_csv(const EvalReport& report)
{
    std::ostringstream out;
    out << "delta_deg";
    for (const auto& c : report.categories) {
        out << ',' << c.category;
    }
    out << ",Avg.\n";
    for (std::size_t i = 0; i < report.mean.curve.points.size(); ++i) {
        out << report.mean.curve.points[i].first;
        for (const auto& c : report.categories) {
            out << ',';
            if (i < c.curve.points.size()) {
                out << fmt3(c.curve.points[i].second);
            }
        }
        out << ',' << fmt3(report.mean.curve.points[i].second) << '\n';
    }
    return out.str();
}

namespace {

void check_box(const Box& b)
{
    if (!(b.right > b.left) || !(b.bottom > b.top)) {
        throw InputError("bbox needs r > l and b > t");
    }
}

template <typename Parse>
auto read_lines(std::istream& in, const char* what, Parse parse)
{
    std::vector<decltype(parse(nlohmann::json{}))> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(parse(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw InputError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace

std::vector<DetectionRecord> read_detections(std::istream& in)
{
    return read_lines(in, "detections", [](const nlohmann::json& j) {
        DetectionRecord d;
        d.image_id = j.at("image_id").get<std::string>();
        d.category = j.at("category").get<std::string>();
        d.bbox = j.at("bbox").get<Box>();
        check_box(d.bbox);
        d.score = j.at("score").get<double>();
        d.viewpoint = j.at("viewpoint").get<ViewpointTuple>();
        if (j.contains("probabilities")) {
            const auto& p = j.at("probabilities");
            for (const AngleGroup g : kAngleGroups) {
                if (!p.contains(to_string(g))) {
                    continue;
                }
                auto v = p.at(to_string(g)).get<std::vector<double>>();
                const double sum = std::accumulate(v.begin(), v.end(), 0.0);
                if (v.empty() || std::abs(sum - 1.0) > 1e-6) {
                    throw InputError(std::string(to_string(g)) + " probabilities must sum to 1");
                }
                d.probabilities[static_cast<std::size_t>(g)] = std::move(v);
            }
        }
        return d;
    });
}

std::vector<GroundTruthRecord> read_groundtruths(std::istream& in)
{
    return read_lines(in, "groundtruth", [](const nlohmann::json& j) {
        GroundTruthRecord g;
        g.image_id = j.at("image_id").get<std::string>();
        g.category = j.at("category").get<std::string>();
        g.bbox = j.at("bbox").get<Box>();
        check_box(g.bbox);
        g.viewpoint = j.at("viewpoint").get<ViewpointTuple>();
        g.difficult = j.value("difficult", false);
        return g;
    });
}

} // namespace viewsynth

#include "viewsynth/toytrainer.hpp"

#include "viewsynth/errors.hpp"
#include "viewsynth/json_io.hpp"
#include "viewsynth/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>

namespace viewsynth {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

void check_shape(int hidden, int input_side, const std::vector<std::string>& classes)
{
    if (hidden < 1 || input_side < 1) {
        throw std::invalid_argument("hidden width and input side must be positive");
    }
    if (classes.empty()) {
        throw std::invalid_argument("model needs at least one class");
    }
    std::vector<std::string> sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("duplicate class name");
    }
}

} // namespace

ToyModel ToyModel::zeros(std::vector<std::string> classes, const BinLayout& layout, int hidden, int input_side)
{
    check_shape(hidden, input_side, classes);
    ToyModel m;
    m.input_side = input_side;
    m.hidden = hidden;
    m.layout = layout;
    m.classes = std::move(classes);
    m.params.assign(m.parameter_count(), 0.0);
    return m;
}

ToyModel ToyModel::random(std::vector<std::string> classes, const BinLayout& layout, std::uint64_t seed, int hidden,
                          int input_side)
{
    ToyModel m = zeros(std::move(classes), layout, hidden, input_side);
    Rng rng(stream_seed(seed, "model-init", 0));
    const double trunk_scale = 1.0 / std::sqrt(static_cast<double>(m.inputs()));
    const double head_scale = 1.0 / std::sqrt(static_cast<double>(m.hidden));
    std::uniform_real_distribution<double> trunk(-trunk_scale, trunk_scale);
    std::uniform_real_distribution<double> head(-head_scale, head_scale);
    const std::size_t trunk_w = static_cast<std::size_t>(m.hidden) * m.inputs();
    for (std::size_t i = 0; i < trunk_w; ++i) {
        m.params[i] = trunk(rng);
    }
    for (int c = 0; c < m.num_classes(); ++c) {
        const std::size_t off = m.head_offset(c);
        const std::size_t head_w = static_cast<std::size_t>(m.head_outputs()) * m.hidden;
        for (std::size_t i = 0; i < head_w; ++i) {
            m.params[off + i] = head(rng);
        }
    }
    return m;
}

std::size_t ToyModel::trunk_size() const
{
    return static_cast<std::size_t>(hidden) * inputs() + hidden;
}

std::size_t ToyModel::head_size() const
{
    return static_cast<std::size_t>(head_outputs()) * hidden + head_outputs();
}

std::size_t ToyModel::head_offset(int class_id) const
{
    if (class_id < 0 || class_id >= num_classes()) {
        throw std::out_of_range("unknown class id " + std::to_string(class_id));
    }
    return trunk_size() + static_cast<std::size_t>(class_id) * head_size();
}

std::size_t ToyModel::parameter_count() const
{
    return trunk_size() + classes.size() * head_size();
}

int ToyModel::class_id(const std::string& name) const
{
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) {
        throw std::out_of_range("unknown class '" + name + "'");
    }
    return static_cast<int>(it - classes.begin());
}

std::vector<double> image_features(const RgbImage& image, int side)
{
    if (side < 1) {
        throw std::invalid_argument("feature side must be positive");
    }
    if (image.width < 1 || image.height < 1) {
        throw std::invalid_argument("empty image");
    }
    std::vector<double> gray(static_cast<std::size_t>(image.width) * image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::uint8_t* p = image.at(x, y);
            gray[static_cast<std::size_t>(y) * image.width + x] = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
        }
    }
    // Area-weighted box filter: output cell (i, j) covers a fractional source rectangle.
    const double sx = static_cast<double>(image.width) / side;
    const double sy = static_cast<double>(image.height) / side;
    std::vector<double> out(static_cast<std::size_t>(side) * side);
    for (int j = 0; j < side; ++j) {
        const double y0 = j * sy;
        const double y1 = (j + 1) * sy;
        for (int i = 0; i < side; ++i) {
            const double x0 = i * sx;
            const double x1 = (i + 1) * sx;
            double sum = 0.0;
            double area = 0.0;
            for (int y = static_cast<int>(y0); y < image.height && y < y1; ++y) {
                const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
                for (int x = static_cast<int>(x0); x < image.width && x < x1; ++x) {
                    const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
                    sum += wx * wy * gray[static_cast<std::size_t>(y) * image.width + x];
                    area += wx * wy;
                }
            }
            out[static_cast<std::size_t>(j) * side + i] = sum / area - 0.5;
        }
    }
    return out;
}

namespace {

struct Activations
{
    Eigen::VectorXd pre;    // trunk pre-activation
    Eigen::VectorXd hidden; // after ReLU
    Eigen::VectorXd logits; // own head, concatenated groups
};

Activations run_forward(const ToyModel& model, std::span<const double> features, int class_id)
{
    if (static_cast<int>(features.size()) != model.inputs()) {
        throw std::invalid_argument("feature length " + std::to_string(features.size()) + " does not match model input " +
                                    std::to_string(model.inputs()));
    }
    const std::size_t head = model.head_offset(class_id);
    const double* p = model.params.data();
    const ConstMatMap w1(p, model.hidden, model.inputs());
    const ConstVecMap b1(p + static_cast<std::size_t>(model.hidden) * model.inputs(), model.hidden);
    const ConstMatMap w2(p + head, model.head_outputs(), model.hidden);
    const ConstVecMap b2(p + head + static_cast<std::size_t>(model.head_outputs()) * model.hidden,
                         model.head_outputs());
    const ConstVecMap x(features.data(), model.inputs());

    Activations a;
    a.pre = w1 * x + b1;
    a.hidden = a.pre.cwiseMax(0.0);
    a.logits = w2 * a.hidden + b2;
    return a;
}

std::span<const double> group_span(const Eigen::VectorXd& logits, const BinLayout& layout, AngleGroup g)
{
    return {logits.data() + layout.offset(g), static_cast<std::size_t>(layout.bins(g))};
}

ModelGradient gradient_impl(const ToyModel& model, std::span<const TrainSample> batch, LossKind kind,
                            const GeometricLoss* geometric)
{
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
    ModelGradient out;
    out.grad.assign(model.params.size(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    const int bins = model.head_outputs();
    const double* p = model.params.data();
    MatMap gw1(out.grad.data(), model.hidden, model.inputs());
    VecMap gb1(out.grad.data() + static_cast<std::size_t>(model.hidden) * model.inputs(), model.hidden);

    for (const TrainSample& s : batch) {
        const Activations a = run_forward(model, s.features, s.class_id);
        Eigen::VectorXd dz(bins);
        if (kind == LossKind::geometric) {
            // Full multi-head logits so the shared batch loss can enforce class isolation.
            std::vector<double> all(static_cast<std::size_t>(model.num_classes()) * bins, 0.0);
            std::copy(a.logits.data(), a.logits.data() + bins,
                      all.begin() + static_cast<std::ptrdiff_t>(s.class_id) * bins);
            const LossSample ls{all, s.class_id, s.gt, s.weight};
            const BatchLossOutput bl = batch_loss(std::span(&ls, 1), model.num_classes(), *geometric);
            out.loss += bl.loss * inv_batch;
            const auto& g = bl.grad_head_logits.front();
            for (int k = 0; k < bins; ++k) {
                dz[k] = g[static_cast<std::size_t>(s.class_id) * bins + k];
            }
        } else {
            for (const AngleGroup grp : kAngleGroups) {
                const LossOutput lo = cross_entropy_backward(group_span(a.logits, model.layout, grp), s.gt[grp]);
                out.loss += s.weight * lo.loss * inv_batch;
                for (int k = 0; k < model.layout.bins(grp); ++k) {
                    dz[model.layout.offset(grp) + k] = s.weight * lo.grad_logits[static_cast<std::size_t>(k)];
                }
            }
        }
        dz *= inv_batch;

        const std::size_t head = model.head_offset(s.class_id);
        MatMap gw2(out.grad.data() + head, bins, model.hidden);
        VecMap gb2(out.grad.data() + head + static_cast<std::size_t>(bins) * model.hidden, bins);
        const ConstMatMap w2(p + head, bins, model.hidden);
        gw2.noalias() += dz * a.hidden.transpose();
        gb2 += dz;
        Eigen::VectorXd dh = w2.transpose() * dz;
        for (int i = 0; i < model.hidden; ++i) {
            if (a.pre[i] <= 0.0) {
                dh[i] = 0.0;
            }
        }
        const ConstVecMap x(s.features.data(), model.inputs());
        gw1.noalias() += dh * x.transpose();
        gb1 += dh;
    }
    return out;
}

} // namespace

GroupLogits forward(const ToyModel& model, std::span<const double> features, int class_id)
{
    const Activations a = run_forward(model, features, class_id);
    GroupLogits out;
    for (const AngleGroup g : kAngleGroups) {
        const auto s = group_span(a.logits, model.layout, g);
        out[static_cast<std::size_t>(g)].assign(s.begin(), s.end());
    }
    return out;
}

Prediction predict(const ToyModel& model, std::span<const double> features, int class_id)
{
    const GroupLogits logits = forward(model, features, class_id);
    Prediction pred;
    std::array<int, 3> best{};
    for (const AngleGroup g : kAngleGroups) {
        const auto i = static_cast<std::size_t>(g);
        pred.probabilities[i] = softmax(logits[i]);
        const auto& probs = pred.probabilities[i];
        best[i] = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    pred.bins = {best[0], best[1], best[2]};
    pred.viewpoint = bin_center(pred.bins, model.layout);
    return pred;
}

ModelGradient model_gradient(const ToyModel& model, std::span<const TrainSample> batch, const LossSpec& loss)
{
    std::optional<GeometricLoss> geometric;
    if (loss.kind == LossKind::geometric) {
        LossConfig cfg = loss.config;
        cfg.layout = model.layout;
        geometric.emplace(cfg);
    }
    return gradient_impl(model, batch, loss.kind, geometric ? &*geometric : nullptr);
}

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw InputError("learning_rate must be positive");
    }
    if (epochs < 1) {
        throw InputError("epochs must be positive");
    }
    if (batch_size < 1) {
        throw InputError("batch_size must be positive");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InputError("sigma must be positive");
    }
    for (const auto& [source, w] : source_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InputError("source weight for '" + source + "' must be non-negative");
        }
    }
}

TrainResult train(ToyModel& model, std::span<const TrainSample> samples, const TrainConfig& config)
{
    config.validate();
    if (!(config.layout == model.layout)) {
        throw std::invalid_argument("training layout differs from the model layout");
    }
    if (samples.empty()) {
        throw InputError("no training samples");
    }
    std::optional<GeometricLoss> geometric;
    if (config.loss == LossKind::geometric) {
        LossConfig cfg;
        cfg.sigma = config.sigma;
        cfg.layout = model.layout;
        geometric.emplace(cfg);
    }

    TrainResult result;
    std::vector<std::size_t> order(samples.size());
    std::vector<TrainSample> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng rng(stream_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(samples[order[i]]);
            }
            const ModelGradient g = gradient_impl(model, batch, config.loss, geometric ? &*geometric : nullptr);
            for (std::size_t i = 0; i < model.params.size(); ++i) {
                model.params[i] -= config.learning_rate * g.grad[i];
            }
            result.step_losses.push_back(g.loss);
            epoch_sum += g.loss;
            ++steps;
        }
        result.epoch_losses.push_back(epoch_sum / static_cast<double>(steps));
    }
    return result;
}

std::vector<TrainSample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                                      const ToyModel& model, const std::map<std::string, double>& source_weights)
{
    std::vector<TrainSample> out;
    out.reserve(manifest.records.size());
    for (const DatasetRecord& r : manifest.records) {
        TrainSample s;
        try {
            s.class_id = model.class_id(r.category);
        } catch (const std::out_of_range&) {
            throw InputError("record " + r.image + ": category '" + r.category + "' is not a model class");
        }
        const RgbImage image = read_rgb(dataset_dir / r.image);
        s.features = image_features(image, model.input_side);
        s.gt = discretize(r.viewpoint, model.layout);
        if (const auto it = source_weights.find(r.source); it != source_weights.end()) {
            s.weight = it->second;
        }
        out.push_back(std::move(s));
    }
    return out;
}

TrainResult train(ToyModel& model, const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                  const TrainConfig& config)
{
    const auto samples = load_samples(manifest, dataset_dir, model, config.source_weights);
    return train(model, samples, config);
}

nlohmann::json model_to_json(const ToyModel& model)
{
    return {{"format", "viewsynth-toymodel"}, {"version", 1},          {"input_side", model.input_side},
            {"hidden", model.hidden},         {"layout", model.layout}, {"classes", model.classes},
            {"parameters", model.params}};
}

ToyModel model_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format").get<std::string>() != "viewsynth-toymodel") {
            throw InputError("not a toy model document");
        }
        ToyModel m = ToyModel::zeros(j.at("classes").get<std::vector<std::string>>(), j.at("layout").get<BinLayout>(),
                                     j.at("hidden").get<int>(), j.at("input_side").get<int>());
        auto params = j.at("parameters").get<std::vector<double>>();
        if (params.size() != m.params.size()) {
            throw InputError("parameter count " + std::to_string(params.size()) + " does not match shape (" +
                             std::to_string(m.params.size()) + ")");
        }
        m.params = std::move(params);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("model: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("model: ") + e.what());
    }
}

} // namespace viewsynth

#include "omnifuse/metrics.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "csv.h"
#include "omnifuse/errors.h"

namespace omnifuse {

namespace {

using Points = Eigen::Matrix<double, 3, Eigen::Dynamic>;

Points to_matrix(std::span<const Eigen::Vector3d> pts) {
    Points m(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        m.col(static_cast<Eigen::Index>(i)) = pts[i];
    return m;
}

void check_pair(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt) {
    if (pred.size() != gt.size())
        throw InputError("point sets differ in size: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(gt.size()));
    if (pred.empty())
        throw InputError("empty point sets");
}

double mean_distance(const Points &a, const Points &b) { return (a - b).colwise().norm().mean(); }

void check_rank(const Points &centered, const char *which) {
    const Eigen::JacobiSVD<Points> svd(centered);
    const auto &s = svd.singularValues();
    if (!(s(0) > 0.0) || s(1) <= 1e-9 * s(0))
        throw AlignmentError(std::string(which) + " points are collinear or coincident");
}

} // namespace

double mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt) {
    check_pair(pred, gt);
    return mean_distance(to_matrix(pred), to_matrix(gt));
}

double n_mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt, double *scale_out) {
    check_pair(pred, gt);
    const Points p = to_matrix(pred), g = to_matrix(gt);
    const Points pc = p.colwise() - p.rowwise().mean();
    const Eigen::Vector3d g_mean = g.rowwise().mean();
    const Points gc = g.colwise() - g_mean;
    const double pp = pc.squaredNorm();
    if (!(pp > 0.0))
        throw InputError("prediction has no spread to scale");
    const double s = (pc.array() * gc.array()).sum() / pp;
    if (scale_out)
        *scale_out = s;
    const Points aligned = (s * pc).colwise() + g_mean;
    return mean_distance(aligned, g);
}

double pa_mpjpe(std::span<const Eigen::Vector3d> pred, std::span<const Eigen::Vector3d> gt, bool with_scale) {
    check_pair(pred, gt);
    if (pred.size() < 3)
        throw AlignmentError("alignment needs at least 3 points");
    const Points p = to_matrix(pred), g = to_matrix(gt);
    check_rank(p.colwise() - p.rowwise().mean(), "predicted");
    check_rank(g.colwise() - g.rowwise().mean(), "ground-truth");
    const Eigen::Matrix4d t = Eigen::umeyama(p, g, with_scale);
    const Points aligned = (t.topLeftCorner<3, 3>() * p).colwise() + t.topRightCorner<3, 1>();
    return mean_distance(aligned, g);
}

PoseErrorReport pose_error_report(const Skeleton3D &pred_m, const Skeleton3D &gt_m, OcclusionScenario scenario) {
    PoseErrorReport r;
    r.scenario = scenario;
    r.mpjpe_mm = mpjpe(pred_m, gt_m) * 1000.0;
    r.n_mpjpe_mm = n_mpjpe(pred_m, gt_m) * 1000.0;
    r.pa_mpjpe_mm = pa_mpjpe(pred_m, gt_m) * 1000.0;
    for (std::size_t j = 0; j < kNumJoints; ++j)
        r.per_joint_mm[j] = (pred_m[j] - gt_m[j]).norm() * 1000.0;
    return r;
}

void PoseErrorSummary::add(const PoseErrorReport &r) {
    ++count;
    const double w = 1.0 / static_cast<double>(count);
    mpjpe_mm += (r.mpjpe_mm - mpjpe_mm) * w;
    n_mpjpe_mm += (r.n_mpjpe_mm - n_mpjpe_mm) * w;
    pa_mpjpe_mm += (r.pa_mpjpe_mm - pa_mpjpe_mm) * w;
    for (std::size_t j = 0; j < kNumJoints; ++j)
        per_joint_mm[j] += (r.per_joint_mm[j] - per_joint_mm[j]) * w;
}

double localization_mae(std::span<const LocalizationSample> samples, Axis axis) {
    if (samples.empty())
        throw InputError("localization MAE of an empty sample set");
    const int k = axis == Axis::X ? 0 : 1;
    double sum = 0.0;
    for (const auto &s : samples)
        sum += std::abs(s.pred(k) - s.truth(k));
    return 100.0 * sum / static_cast<double>(samples.size());
}

double matching_accuracy(const Assignment &assignment, std::span<const TruthPair> truth) {
    std::set<std::size_t> people;
    std::set<std::pair<std::size_t, std::size_t>> valid;
    for (const auto &t : truth) {
        people.insert(t.pose_index);
        valid.emplace(t.pose_index, t.detection_index);
    }
    if (people.empty())
        return 100.0;
    std::size_t correct = 0;
    for (const auto &p : assignment.pairs)
        correct += valid.count({p.pose_index, p.detection_index});
    return 100.0 * static_cast<double>(correct) / static_cast<double>(people.size());
}

Eigen::Vector2d HeatmapGrid::cell_center(std::size_t ix, std::size_t iz) const {
    return origin + cell_size * Eigen::Vector2d(static_cast<double>(ix) + 0.5, static_cast<double>(iz) + 0.5);
}

std::optional<std::pair<std::size_t, std::size_t>> HeatmapGrid::cell_of(const Eigen::Vector2d &xz) const {
    const Eigen::Vector2d rel = (xz - origin) / cell_size;
    if (!(rel.x() >= 0.0 && rel.y() >= 0.0))
        return std::nullopt;
    const auto ix = static_cast<std::size_t>(std::floor(rel.x()));
    const auto iz = static_cast<std::size_t>(std::floor(rel.y()));
    if (ix >= nx || iz >= nz)
        return std::nullopt;
    return std::make_pair(ix, iz);
}

HeatmapGrid build_heatmap(std::span<const LocalizationSample> samples, double cell_size, const HeatmapBounds &bounds) {
    if (!(cell_size > 0.0))
        throw InputError("heatmap cell size must be positive");
    if (!(bounds.max_x > bounds.min_x) || !(bounds.max_z > bounds.min_z))
        throw InputError("heatmap bounds are empty");
    HeatmapGrid g;
    g.cell_size = cell_size;
    g.origin = {bounds.min_x, bounds.min_z};
    g.nx = static_cast<std::size_t>(std::ceil((bounds.max_x - bounds.min_x) / cell_size - 1e-9));
    g.nz = static_cast<std::size_t>(std::ceil((bounds.max_z - bounds.min_z) / cell_size - 1e-9));
    g.cells.assign(g.nx * g.nz, HeatmapCell{});
    for (const auto &s : samples) {
        const auto cell = g.cell_of(s.truth);
        if (!cell)
            continue;
        HeatmapCell &c = g.cells[cell->second * g.nx + cell->first];
        c.sum_abs_x += std::abs(s.pred.x() - s.truth.x());
        c.sum_abs_z += std::abs(s.pred.y() - s.truth.y());
        ++c.n;
    }
    return g;
}

void write_heatmap_csv(std::ostream &out, const HeatmapGrid &grid) {
    out << "cell_x,cell_z,mae_x_m,mae_z_m,n\n";
    for (std::size_t iz = 0; iz < grid.nz; ++iz) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            const Eigen::Vector2d c = grid.cell_center(ix, iz);
            const HeatmapCell &cell = grid.at(ix, iz);
            out << detail::fmt_double(c.x()) << ',' << detail::fmt_double(c.y()) << ',';
            if (cell.empty())
                out << ",,0\n";
            else
                out << detail::fmt_double(cell.mae_x_m()) << ',' << detail::fmt_double(cell.mae_z_m()) << ','
                    << cell.n << '\n';
        }
    }
}

} // namespace omnifuse

#include "omnifuse/calibration.h"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include <Eigen/LU>
#include <Eigen/SVD>

#include <json.hpp>

#include "csv.h"

namespace omnifuse {

using nlohmann::json;

AffineCalibration AffineCalibration::identity(int radar_id) {
    AffineCalibration cal;
    cal.radar_id = radar_id;
    return cal;
}

AffineCalibration AffineCalibration::inverse() const {
    const double det = matrix.determinant();
    if (!(std::abs(det) > 1e-9))
        throw DegenerateFitError("affine calibration is not invertible");
    AffineCalibration inv = *this;
    inv.matrix = matrix.inverse();
    inv.translation = -inv.matrix * translation;
    return inv;
}

CalibrationSample average_grid_readings(const GridRecording &rec) {
    if (rec.readings.empty())
        throw InputError("grid recording for radar " + std::to_string(rec.radar_id) + " has no readings");
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const auto &r : rec.readings)
        sum += r;
    return {sum / static_cast<double>(rec.readings.size()), rec.true_position};
}

Eigen::Vector2d apply_affine(const AffineCalibration &cal, const Eigen::Vector2d &raw) {
    return cal.matrix * raw + cal.translation;
}

namespace {

// Smallest-to-largest singular value ratio of the design matrix.
double conditioning(const Eigen::MatrixXd &design) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto &s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0.0))
        return 0.0;
    return s(s.size() - 1) / s(0);
}

AffineCalibration unpack(const Eigen::VectorXd &p, int radar_id) {
    AffineCalibration cal;
    cal.radar_id = radar_id;
    cal.matrix << p(0), p(1), p(2), p(3);
    cal.translation << p(4), p(5);
    return cal;
}

double rms(std::span<const CalibrationSample> samples, const AffineCalibration &cal) {
    double ss = 0.0;
    for (const auto &s : samples)
        ss += (apply_affine(cal, s.raw) - s.truth).squaredNorm();
    return std::sqrt(ss / static_cast<double>(samples.size()));
}

} // namespace

AffineCalibration fit_affine_lm(std::span<const CalibrationSample> samples, const LMOptions &opts, int radar_id,
                                LMResult *diagnostics) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (n < 3)
        throw DegenerateFitError("affine fit needs at least 3 samples, got " + std::to_string(n));
    Eigen::MatrixXd design(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        design.row(i) << samples[i].raw.x(), samples[i].raw.y(), 1.0;
    if (conditioning(design) < 1e-9)
        throw DegenerateFitError("calibration grid is collinear");

    auto residuals = [&](const Eigen::VectorXd &p, Eigen::VectorXd &r, Eigen::MatrixXd *J) {
        r.resize(2 * n);
        if (J)
            J->setZero(2 * n, 6);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = samples[i].raw.x(), z = samples[i].raw.y();
            r(2 * i) = p(0) * x + p(1) * z + p(4) - samples[i].truth.x();
            r(2 * i + 1) = p(2) * x + p(3) * z + p(5) - samples[i].truth.y();
            if (J) {
                J->row(2 * i) << x, z, 0.0, 0.0, 1.0, 0.0;
                J->row(2 * i + 1) << 0.0, 0.0, x, z, 0.0, 1.0;
            }
        }
    };

    Eigen::VectorXd x0(6);
    x0 << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
    LMResult result = levenberg_marquardt(residuals, x0, opts);
    if (diagnostics)
        *diagnostics = result;

    AffineCalibration cal = unpack(result.params, radar_id);
    cal.sample_count = static_cast<int>(n);
    cal.fit_rms_m = rms(samples, cal);
    if (!result.converged)
        throw ConvergenceError("affine fit did not converge within " + std::to_string(opts.max_iters) + " iterations",
                               cal);
    if (!(std::abs(cal.matrix.determinant()) > 1e-9))
        throw DegenerateFitError("fitted affine matrix is singular");
    return cal;
}

bool on_grid(std::span<const GridRecording> recs, double spacing_m, double tol_m) {
    auto aligned = [&](double v) { return std::abs(v / spacing_m - std::round(v / spacing_m)) * spacing_m <= tol_m; };
    for (const auto &r : recs) {
        if (!aligned(r.true_position.x()) || !aligned(r.true_position.y()))
            return false;
    }
    return true;
}

RadarImageMap RadarImageMap::from_camera(const CameraModel &cam) {
    RadarImageMap map;
    map.width_px = cam.width_px;
    map.slope_px_per_rad = cam.px_per_rad();
    double offset = cam.width_px / 2.0 - cam.yaw_offset_rad * cam.px_per_rad();
    offset = std::fmod(offset, static_cast<double>(cam.width_px));
    if (offset < 0.0)
        offset += cam.width_px;
    map.offset_px = offset;
    return map;
}

namespace {

double world_azimuth(const Eigen::Vector2d &xz) {
    if (xz.squaredNorm() == 0.0)
        throw DomainError("azimuth undefined at the rig origin");
    return std::atan2(xz.x(), xz.y());
}

double wrap_column(double u, double width) {
    double w = std::fmod(u, width);
    if (w < 0.0)
        w += width;
    if (w >= width)
        w = 0.0;
    return w;
}

} // namespace

RadarImageMap fit_radar_to_image(std::span<const ImageSample> samples, const CameraModel &cam) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    if (n < 3)
        throw DegenerateFitError("radar-to-image fit needs at least 3 samples, got " + std::to_string(n));
    const double width = cam.width_px;
    const double nominal = cam.px_per_rad();

    Eigen::VectorXd az(n);
    for (Eigen::Index i = 0; i < n; ++i)
        az(i) = world_azimuth(samples[i].world_xz);

    // Circular mean of the per-sample offsets under the nominal slope.
    double s = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q = samples[i].observed_u - nominal * az(i);
        s += std::sin(kTwoPi * q / width);
        c += std::cos(kTwoPi * q / width);
    }
    const double q0 = std::atan2(s, c) / kTwoPi * width;

    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double predicted = nominal * az(i) + q0;
        const double u = samples[i].observed_u;
        target(i) = u + width * std::round((predicted - u) / width);
        design.row(i) << az(i), 1.0;
    }
    if (conditioning(design) < 1e-9)
        throw DegenerateFitError("radar-to-image samples do not span distinct azimuths");

    const Eigen::Vector2d coef = design.completeOrthogonalDecomposition().solve(target);
    const Eigen::VectorXd resid = design * coef - target;

    RadarImageMap map;
    map.width_px = cam.width_px;
    map.slope_px_per_rad = coef(0);
    map.offset_px = wrap_column(coef(1), width);
    map.fit_rms_px = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
    map.sample_count = static_cast<int>(n);
    return map;
}

double radar_to_image_x(const RadarImageMap &map, const Eigen::Vector2d &xz) {
    return wrap_column(map.slope_px_per_rad * world_azimuth(xz) + map.offset_px, map.width_px);
}

// --- files -----------------------------------------------------------------

std::vector<GridRecording> read_grid_csv(std::istream &in, const std::string &source) {
    detail::CsvReader reader(in, source, {"radar_id", "true_x", "true_z", "raw_x", "raw_z", "t"});
    std::vector<GridRecording> recs;
    std::map<std::tuple<int, double, double>, std::size_t> index;
    std::vector<std::string_view> row;
    while (reader.next(row)) {
        const int radar = reader.parse_int(row[0]);
        const double tx = reader.parse_double(row[1]);
        const double tz = reader.parse_double(row[2]);
        const Eigen::Vector2d raw(reader.parse_double(row[3]), reader.parse_double(row[4]));
        const double t = reader.parse_double(row[5]);
        auto key = std::make_tuple(radar, tx, tz);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, recs.size()).first;
            GridRecording rec;
            rec.radar_id = radar;
            rec.true_position = {tx, tz};
            recs.push_back(std::move(rec));
        }
        recs[it->second].readings.push_back(raw);
        recs[it->second].timestamps.push_back(t);
    }
    return recs;
}

void write_grid_csv(std::ostream &out, std::span<const GridRecording> recs) {
    out << "radar_id,true_x,true_z,raw_x,raw_z,t\n";
    for (const auto &rec : recs) {
        for (std::size_t i = 0; i < rec.readings.size(); ++i) {
            const double t = i < rec.timestamps.size() ? rec.timestamps[i] : 0.0;
            out << rec.radar_id << ',' << detail::fmt_double(rec.true_position.x()) << ','
                << detail::fmt_double(rec.true_position.y()) << ',' << detail::fmt_double(rec.readings[i].x()) << ','
                << detail::fmt_double(rec.readings[i].y()) << ',' << detail::fmt_double(t) << '\n';
        }
    }
}

std::vector<RadarImageSample> read_image_samples_csv(std::istream &in, const std::string &source) {
    detail::CsvReader reader(in, source, {"radar_id", "x", "z", "mean_x"});
    std::vector<RadarImageSample> out;
    std::vector<std::string_view> row;
    while (reader.next(row)) {
        RadarImageSample s;
        s.radar_id = reader.parse_int(row[0]);
        s.sample.world_xz = {reader.parse_double(row[1]), reader.parse_double(row[2])};
        s.sample.observed_u = reader.parse_double(row[3]);
        out.push_back(s);
    }
    return out;
}

void write_image_samples_csv(std::ostream &out, std::span<const RadarImageSample> samples) {
    out << "radar_id,x,z,mean_x\n";
    for (const auto &s : samples) {
        out << s.radar_id << ',' << detail::fmt_double(s.sample.world_xz.x()) << ','
            << detail::fmt_double(s.sample.world_xz.y()) << ',' << detail::fmt_double(s.sample.observed_u) << '\n';
    }
}

void write_calibration_jsonl(std::ostream &out, std::span<const RadarCalibration> cals) {
    for (const auto &c : cals) {
        const auto &a = c.affine;
        json doc = {
            {"schema_version", 1},
            {"radar_id", a.radar_id},
            {"matrix", {a.matrix(0, 0), a.matrix(0, 1), a.matrix(1, 0), a.matrix(1, 1)}},
            {"translation", {a.translation.x(), a.translation.y()}},
            {"fit_rms_m", a.fit_rms_m},
            {"sample_count", a.sample_count},
            {"image_map",
             {{"slope_px_per_rad", c.image_map.slope_px_per_rad},
              {"offset_px", c.image_map.offset_px},
              {"width_px", c.image_map.width_px},
              {"fit_rms_px", c.image_map.fit_rms_px},
              {"sample_count", c.image_map.sample_count}}},
            {"mae_cm",
             {{"before", {{"x", c.pre_mae_x_cm}, {"z", c.pre_mae_z_cm}}},
              {"after", {{"x", c.post_mae_x_cm}, {"z", c.post_mae_z_cm}}}}},
        };
        out << doc.dump() << '\n';
    }
}

std::vector<RadarCalibration> read_calibration_jsonl(std::istream &in, const std::string &source) {
    std::vector<RadarCalibration> cals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const json doc = json::parse(line);
            if (doc.at("schema_version").get<int>() != 1)
                throw ParseError(source, lineno, "unsupported schema_version");
            RadarCalibration c;
            c.affine.radar_id = doc.at("radar_id").get<int>();
            const auto m = doc.at("matrix").get<std::vector<double>>();
            const auto t = doc.at("translation").get<std::vector<double>>();
            if (m.size() != 4 || t.size() != 2)
                throw ParseError(source, lineno, "matrix needs 4 values and translation 2");
            c.affine.matrix << m[0], m[1], m[2], m[3];
            c.affine.translation << t[0], t[1];
            c.affine.fit_rms_m = doc.value("fit_rms_m", 0.0);
            c.affine.sample_count = doc.value("sample_count", 0);
            const auto &im = doc.at("image_map");
            c.image_map.slope_px_per_rad = im.at("slope_px_per_rad").get<double>();
            c.image_map.offset_px = im.at("offset_px").get<double>();
            c.image_map.width_px = im.at("width_px").get<int>();
            c.image_map.fit_rms_px = im.value("fit_rms_px", 0.0);
            c.image_map.sample_count = im.value("sample_count", 0);
            if (doc.contains("mae_cm")) {
                const auto &mae = doc["mae_cm"];
                c.pre_mae_x_cm = mae.at("before").at("x").get<double>();
                c.pre_mae_z_cm = mae.at("before").at("z").get<double>();
                c.post_mae_x_cm = mae.at("after").at("x").get<double>();
                c.post_mae_z_cm = mae.at("after").at("z").get<double>();
            }
            cals.push_back(c);
        } catch (const json::exception &e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    return cals;
}

} // namespace omnifuse

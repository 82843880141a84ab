#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "omnifuse/errors.h"
#include "omnifuse/geometry.h"
#include "omnifuse/lm.h"

namespace omnifuse {

// One dwell of a person standing at a surveyed grid point while a radar
// records. Readings are raw radar-frame (x, z) meters.
struct GridRecording {
    int radar_id = 0;
    Eigen::Vector2d true_position = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> readings;
    std::vector<double> timestamps;
};

struct CalibrationSample {
    Eigen::Vector2d raw = Eigen::Vector2d::Zero();
    Eigen::Vector2d truth = Eigen::Vector2d::Zero();
};

// Maps a radar's raw (x, z) readings into the world frame: world = A raw + t.
struct AffineCalibration {
    int radar_id = 0;
    Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
    double fit_rms_m = 0.0;
    int sample_count = 0;

    static AffineCalibration identity(int radar_id);

    // Throws DegenerateFitError when |det A| <= 1e-9.
    AffineCalibration inverse() const;
};

class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string &what, AffineCalibration best) : Error(what), best_(std::move(best)) {}
    const AffineCalibration &best_so_far() const { return best_; }

  private:
    AffineCalibration best_;
};

// Component-wise mean of the readings, paired with the surveyed position.
CalibrationSample average_grid_readings(const GridRecording &rec);

// Joint 6-parameter affine fit by Levenberg-Marquardt, started from identity.
// Throws DegenerateFitError for fewer than 3 samples or a collinear grid and
// ConvergenceError when max_iters is exhausted.
AffineCalibration fit_affine_lm(std::span<const CalibrationSample> samples, const LMOptions &opts = {},
                                int radar_id = 0, LMResult *diagnostics = nullptr);

Eigen::Vector2d apply_affine(const AffineCalibration &cal, const Eigen::Vector2d &raw);

// True when every position sits on a lattice of the given spacing.
bool on_grid(std::span<const GridRecording> recs, double spacing_m, double tol_m = 1e-6);

// Affine map from world azimuth atan2(x, z) to panorama column:
//   u = slope * azimuth + offset   (mod width)
struct RadarImageMap {
    double slope_px_per_rad = 0.0;
    double offset_px = 0.0; // in [0, width)
    int width_px = 0;
    double fit_rms_px = 0.0;
    int sample_count = 0;

    // The map implied by an exact camera model.
    static RadarImageMap from_camera(const CameraModel &cam);
};

struct ImageSample {
    Eigen::Vector2d world_xz = Eigen::Vector2d::Zero(); // corrected radar position
    double observed_u = 0.0;                            // mean image x of the person
};

// Least-squares (pseudo-inverse) fit of the azimuth-affine map. Observed
// columns are unwrapped against the camera's nominal slope first, so the
// panorama seam does not break the linear fit. Throws DegenerateFitError for
// fewer than 3 samples or a rank-deficient design.
RadarImageMap fit_radar_to_image(std::span<const ImageSample> samples, const CameraModel &cam);

// Column for a world position, wrapped into [0, width). Throws DomainError at the origin.
double radar_to_image_x(const RadarImageMap &map, const Eigen::Vector2d &xz);

// --- files -----------------------------------------------------------------

// CSV with header `radar_id,true_x,true_z,raw_x,raw_z,t`, one row per reading.
// Rows are grouped by (radar_id, true position) in first-seen order.
std::vector<GridRecording> read_grid_csv(std::istream &in, const std::string &source = "<grid>");
void write_grid_csv(std::ostream &out, std::span<const GridRecording> recs);

// CSV with header `radar_id,x,z,mean_x`. On disk x, z are the radar's
// averaged raw reading; the calibrate command applies the fitted affine
// before fitting the image map.
struct RadarImageSample {
    int radar_id = 0;
    ImageSample sample;
};
std::vector<RadarImageSample> read_image_samples_csv(std::istream &in, const std::string &source = "<samples>");
void write_image_samples_csv(std::ostream &out, std::span<const RadarImageSample> samples);

struct RadarCalibration {
    AffineCalibration affine;
    RadarImageMap image_map;
    // Mean absolute error on the fitting grid before and after correction, cm.
    double pre_mae_x_cm = 0.0, pre_mae_z_cm = 0.0;
    double post_mae_x_cm = 0.0, post_mae_z_cm = 0.0;
};

// JSON Lines, one document per radar.
void write_calibration_jsonl(std::ostream &out, std::span<const RadarCalibration> cals);
std::vector<RadarCalibration> read_calibration_jsonl(std::istream &in, const std::string &source = "<calibration>");

} // namespace omnifuse

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "difflow/field.hpp"
#include "difflow/kinematics.hpp"

namespace difflow {

// One sampled row of the run's time series. residual_theta and residual_r are
// grid sup norms of the rotation-angle and radial evolution equations; they
// are computed against the actual stepping velocity, so under the comparison
// heat flow they measure how far that flow strays from the closed system.
struct DiagnosticsRecord {
    double t = 0.0;
    double E = 0.0;  // Dirichlet energy, (1/2) integral of |Du|^2
    double q = 0.0;  // integral of |lap u|^2
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double dE_dt_lhs = 0.0;  // backward difference of E between records; 0 at the first
    double dE_dt_rhs = 0.0;  // -integral of coeff (lap u)^2, coeff = stepping coefficient
    double residual_theta = 0.0;
    double residual_r = 0.0;
    double affine_residual = 0.0;  // sup |v - mean v|
    double min_det = 0.0;
    bool degenerate = false;
};

double energy(const MapField& field);
double second_energy(const MapField& field);

// Builds a record from quantities the stepper already holds: the gradient and
// Laplacian of the current field and the pointwise stepping coefficient
// (diffusion-weighted flow: F; comparison heat flow: 1). dE_dt_lhs is left 0;
// the run loop fills it from consecutive records.
DiagnosticsRecord compute_record(const MapField& field, const StencilGeometry& geom,
                                 const GradientField& grad, const VecGrid& lap,
                                 const ScalarGrid& coeff);

// |dE/dt - average rhs| over one consecutive record pair, the discrete form of
// the energy identity dE/dt = -integral F (lap u)^2.
double energy_identity_check(const DiagnosticsRecord& before, const DiagnosticsRecord& after);

struct BoundReport {
    bool ok = false;
    bool lower_ok = false;
    bool upper_ok = false;
    double slack = 0.0;
    // Worst drop of lambda_min below its initial value and worst rise of
    // lambda_max above its initial value (0 when the bounds only contract).
    double lower_excursion = 0.0;
    double upper_excursion = 0.0;
    double lower_excursion_time = 0.0;
    double upper_excursion_time = 0.0;
};

// Checks that the extremal singular values never escape their initial range
// by more than slack = c_slack h^2 ; the default c_slack is 10 times the
// initial lambda range (so affine initial data gets an exact check).
BoundReport bound_preservation(const std::vector<DiagnosticsRecord>& series, double h,
                               std::optional<double> c_slack = {});

// Empirical envelope for the flow's ellipticity constants over a series:
// max(lambda_max, 1/lambda_min, r_max, 1/r_min).
double lambda_envelope(const std::vector<DiagnosticsRecord>& series);

struct AffineFit {
    Mat2 linear;  // the lift's linear part, forced by periodicity
    Vec2 translation;
    double residual = 0.0;  // sup |v - translation|
};

AffineFit affine_fit(const MapField& field);

struct DecayFit {
    bool ok = false;  // false when fewer than 10 usable points follow the transient
    double omega = 0.0;
    double quality = 0.0;  // coefficient of determination of the log-linear fit
    int points = 0;
};

// Least-squares slope of log q versus t, restricted to the post-transient
// window starting at the first record with q < q(0)/2.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& t_and_q);

// Scalar slices (r, theta, F) retained over a time window for the parabolic
// oscillation estimator. Slices are stored as floats; the estimator's
// tolerances are far above float precision.
class SpaceTimeSamples {
  public:
    SpaceTimeSamples(const Lattice& domain, int n1, int n2);

    void add_slice(double t, const GradientField& grad);

    int slice_count() const { return static_cast<int>(times_.size()); }
    double time(int k) const { return times_[k]; }
    const Lattice& domain() const { return domain_; }
    int n1() const { return n1_; }
    int n2() const { return n2_; }

    float radial(int k, int i, int j) const { return r_[k][idx(i, j)]; }
    float angle(int k, int i, int j) const { return theta_[k][idx(i, j)]; }
    float diffusion(int k, int i, int j) const { return f_[k][idx(i, j)]; }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n2_ + j; }

    Lattice domain_;
    int n1_;
    int n2_;
    std::vector<double> times_;
    std::vector<std::vector<float>> r_, theta_, f_;
};

enum class HolderQuantity { radial, angle, diffusion };

struct HolderEntry {
    double radius = 0.0;
    double max_osc = 0.0;
};

struct HolderReport {
    double alpha = 0.0;
    double seminorm = 0.0;  // sup over cylinders of osc / R^alpha
    std::vector<HolderEntry> entries;
    int discarded_cylinders = 0;       // angle cylinders crossing a branch cut
    bool insufficient_resolution = false;  // fewer than 4 radii usable
};

// Oscillation over backward parabolic cylinders Q(X0, R): torus distance to
// the center below R in space, times in (t0 - R^2, t0]. Centers are a
// deterministic centers_per_axis x centers_per_axis subgrid at the latest
// slice. The angle is lifted to the branch nearest the center value; a
// cylinder where any sample strays more than pi/2 from that anchor is
// discarded and counted instead of contributing a meaningless oscillation.
HolderReport holder_seminorm(const SpaceTimeSamples& samples, HolderQuantity quantity,
                             double alpha, const std::vector<double>& radii,
                             int centers_per_axis = 4);

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& series);
void write_holder_csv(std::ostream& out, const std::vector<HolderReport>& reports);

}  // namespace difflow

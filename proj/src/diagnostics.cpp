#include "difflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "difflow/format.hpp"
#include "difflow/parallel.hpp"

namespace difflow {

namespace {

ScalarGrid squared_gradient_density(const GradientField& grad) {
    ScalarGrid out(grad.n1, grad.n2);
    for (std::size_t k = 0; k < grad.cells.size(); ++k) {
        out.cells[k] = frobenius2(grad.cells[k]);
    }
    return out;
}

ScalarGrid squared_laplacian_density(const VecGrid& lap) {
    ScalarGrid out(lap.n1, lap.n2);
    for (std::size_t k = 0; k < lap.cells.size(); ++k) {
        out.cells[k] = norm2(lap.cells[k]);
    }
    return out;
}

}  // namespace

double energy(const MapField& field) {
    const ScalarGrid density = squared_gradient_density(gradient(field));
    return 0.5 * integrate(density, field.pair.domain);
}

double second_energy(const MapField& field) {
    const ScalarGrid density = squared_laplacian_density(laplacian(field));
    return integrate(density, field.pair.domain);
}

DiagnosticsRecord compute_record(const MapField& field, const StencilGeometry& geom,
                                 const GradientField& grad, const VecGrid& lap,
                                 const ScalarGrid& coeff) {
    DiagnosticsRecord rec;
    rec.t = field.time;

    {
        const ScalarGrid density = squared_gradient_density(grad);
        rec.E = 0.5 * integrate(density, field.pair.domain);
    }
    {
        ScalarGrid density = squared_laplacian_density(lap);
        rec.q = integrate(density, field.pair.domain);
        for (std::size_t k = 0; k < density.cells.size(); ++k) density.cells[k] *= coeff.cells[k];
        rec.dE_dt_rhs = -integrate(density, field.pair.domain);
    }

    bool first = true;
    for (const Mat2& du : grad.cells) {
        const PointKinematics kin = point_kinematics(du);
        if (first) {
            rec.lambda_min = kin.lambda1;
            rec.lambda_max = kin.lambda2;
            rec.r_min = rec.r_max = kin.r;
            rec.min_det = kin.det;
            first = false;
        } else {
            rec.lambda_min = std::min(rec.lambda_min, kin.lambda1);
            rec.lambda_max = std::max(rec.lambda_max, kin.lambda2);
            rec.r_min = std::min(rec.r_min, kin.r);
            rec.r_max = std::max(rec.r_max, kin.r);
            rec.min_det = std::min(rec.min_det, kin.det);
        }
    }
    rec.degenerate = rec.min_det <= 0.0;

    {
        const AffineFit fit = affine_fit(field);
        rec.affine_residual = fit.residual;
    }

    // Grid residuals of the radial and angular evolution equations. All
    // derivatives go through the smooth scalars s = tr Du and w = u^2_1 - u^1_2
    // (r and theta themselves are not differenced, so no unwrapping enters),
    // and the time derivative comes from the actual stepping velocity
    // tdot = coeff * lap u.
    const int n1 = grad.n1, n2 = grad.n2;
    ScalarGrid s_grid(n1, n2), w_grid(n1, n2), td1(n1, n2), td2(n1, n2);
    for (std::size_t k = 0; k < grad.cells.size(); ++k) {
        const Mat2& du = grad.cells[k];
        s_grid.cells[k] = du.a + du.d;
        w_grid.cells[k] = du.b - du.c;
        td1.cells[k] = coeff.cells[k] * lap.cells[k].x;
        td2.cells[k] = coeff.cells[k] * lap.cells[k].y;
    }
    const VecGrid ds = scalar_gradient(s_grid, geom);
    const VecGrid dw = scalar_gradient(w_grid, geom);
    const ScalarGrid ls = scalar_laplacian(s_grid, geom);
    const ScalarGrid lw = scalar_laplacian(w_grid, geom);
    const VecGrid dtd1 = scalar_gradient(td1, geom);
    const VecGrid dtd2 = scalar_gradient(td2, geom);

    double worst_r = 0.0, worst_theta = 0.0;
    for (std::size_t k = 0; k < s_grid.cells.size(); ++k) {
        const double s = s_grid.cells[k];
        const double w = w_grid.cells[k];
        const double r2 = s * s + w * w;
        if (r2 < 1e-20) continue;
        const double r = std::sqrt(r2);
        const double fp = 1.0 / r2;

        const Vec2 dsk = ds.cells[k], dwk = dw.cells[k];
        const Vec2 dr = (dsk * s + dwk * w) * (1.0 / r);
        const Vec2 dth = (dwk * s - dsk * w) * fp;
        const double lap_r =
            (norm2(dsk) + norm2(dwk) + s * ls.cells[k] + w * lw.cells[k]) / r - norm2(dr) / r;
        const double lap_th =
            (s * lw.cells[k] - w * ls.cells[k]) * fp - 2.0 * dot(dth, dr) / r;

        const double sdot = dtd1.cells[k].x + dtd2.cells[k].y;
        const double wdot = dtd2.cells[k].x - dtd1.cells[k].y;
        const double rdot = (s * sdot + w * wdot) / r;
        const double thdot = (s * wdot - w * sdot) * fp;

        const double cross = dr.x * dth.y - dr.y * dth.x;
        const double rhs_r = -norm2(dth) / r - 2.0 * norm2(dr) / (r2 * r) + 2.0 * cross * fp;
        worst_theta = std::max(worst_theta, std::abs(thdot - fp * lap_th));
        worst_r = std::max(worst_r, std::abs(rdot - fp * lap_r - rhs_r));
    }
    rec.residual_theta = worst_theta;
    rec.residual_r = worst_r;
    return rec;
}

double energy_identity_check(const DiagnosticsRecord& before, const DiagnosticsRecord& after) {
    const double dt = after.t - before.t;
    if (dt == 0.0) return 0.0;
    const double lhs = (after.E - before.E) / dt;
    const double rhs = 0.5 * (before.dE_dt_rhs + after.dE_dt_rhs);
    return std::abs(lhs - rhs);
}

BoundReport bound_preservation(const std::vector<DiagnosticsRecord>& series, double h,
                               std::optional<double> c_slack) {
    if (series.empty()) throw std::invalid_argument("bound_preservation needs a nonempty series");
    const double lmin0 = series.front().lambda_min;
    const double lmax0 = series.front().lambda_max;
    const double c = c_slack.value_or(10.0 * (lmax0 - lmin0));
    BoundReport report;
    report.slack = c * h * h;
    for (const DiagnosticsRecord& rec : series) {
        const double drop = lmin0 - rec.lambda_min;
        if (drop > report.lower_excursion) {
            report.lower_excursion = drop;
            report.lower_excursion_time = rec.t;
        }
        const double rise = rec.lambda_max - lmax0;
        if (rise > report.upper_excursion) {
            report.upper_excursion = rise;
            report.upper_excursion_time = rec.t;
        }
    }
    report.lower_ok = report.lower_excursion <= report.slack;
    report.upper_ok = report.upper_excursion <= report.slack;
    report.ok = report.lower_ok && report.upper_ok;
    return report;
}

double lambda_envelope(const std::vector<DiagnosticsRecord>& series) {
    double envelope = 0.0;
    for (const DiagnosticsRecord& rec : series) {
        if (rec.lambda_min <= 0.0 || rec.r_min <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        envelope = std::max({envelope, rec.lambda_max, 1.0 / rec.lambda_min, rec.r_max,
                             1.0 / rec.r_min});
    }
    return envelope;
}

AffineFit affine_fit(const MapField& field) {
    AffineFit fit;
    fit.linear = field.pair.linear_part;
    Vec2 sum{0.0, 0.0};
    for (const Vec2& value : field.v) sum += value;
    fit.translation = sum * (1.0 / static_cast<double>(field.v.size()));
    for (const Vec2& value : field.v) {
        fit.residual = std::max(fit.residual, norm(value - fit.translation));
    }
    return fit;
}

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& t_and_q) {
    DecayFit fit;
    if (t_and_q.empty()) return fit;
    const double threshold = 0.5 * t_and_q.front().second;
    std::vector<std::pair<double, double>> window;  // (t, log q)
    bool past_transient = false;
    for (const auto& [t, q] : t_and_q) {
        if (!past_transient && q < threshold) past_transient = true;
        if (past_transient && q > 0.0) window.emplace_back(t, std::log(q));
    }
    fit.points = static_cast<int>(window.size());
    if (fit.points < 10) return fit;

    double mean_t = 0.0, mean_y = 0.0;
    for (const auto& [t, y] : window) {
        mean_t += t;
        mean_y += y;
    }
    mean_t /= fit.points;
    mean_y /= fit.points;
    double stt = 0.0, sty = 0.0, syy = 0.0;
    for (const auto& [t, y] : window) {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if (stt == 0.0) return fit;
    const double slope = sty / stt;
    fit.omega = -slope;
    double ss_res = 0.0;
    for (const auto& [t, y] : window) {
        const double predicted = mean_y + slope * (t - mean_t);
        ss_res += (y - predicted) * (y - predicted);
    }
    fit.quality = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res <= 1e-30 ? 1.0 : 0.0);
    fit.ok = true;
    return fit;
}

SpaceTimeSamples::SpaceTimeSamples(const Lattice& domain, int n1, int n2)
    : domain_(domain), n1_(n1), n2_(n2) {}

void SpaceTimeSamples::add_slice(double t, const GradientField& grad) {
    if (grad.n1 != n1_ || grad.n2 != n2_) {
        throw std::invalid_argument("slice resolution does not match the sample store");
    }
    const std::size_t count = grad.cells.size();
    std::vector<float> r(count), theta(count), f(count);
    for (std::size_t k = 0; k < count; ++k) {
        const PointKinematics kin = point_kinematics(grad.cells[k]);
        r[k] = static_cast<float>(kin.r);
        theta[k] = static_cast<float>(kin.theta);
        f[k] = static_cast<float>(kin.F);
    }
    times_.push_back(t);
    r_.push_back(std::move(r));
    theta_.push_back(std::move(theta));
    f_.push_back(std::move(f));
}

namespace {

constexpr double pi = std::numbers::pi;

// Squared torus distance: minimum over the 3x3 block of lattice translates.
double torus_distance2(const Lattice& domain, const Vec2& x, const Vec2& center) {
    const Vec2 diff = x - center;
    double best = std::numeric_limits<double>::infinity();
    for (int z1 = -1; z1 <= 1; ++z1) {
        for (int z2 = -1; z2 <= 1; ++z2) {
            const Vec2 shifted =
                diff + domain.from_lattice({static_cast<double>(z1), static_cast<double>(z2)});
            best = std::min(best, norm2(shifted));
        }
    }
    return best;
}

}  // namespace

HolderReport holder_seminorm(const SpaceTimeSamples& samples, HolderQuantity quantity,
                             double alpha, const std::vector<double>& radii,
                             int centers_per_axis) {
    if (samples.slice_count() == 0) throw std::invalid_argument("no slices stored");
    if (centers_per_axis < 1) throw std::invalid_argument("need at least one center per axis");
    HolderReport report;
    report.alpha = alpha;

    const int n1 = samples.n1(), n2 = samples.n2();
    const int last = samples.slice_count() - 1;
    const double t0 = samples.time(last);
    const Lattice& domain = samples.domain();

    auto value = [&](int k, int i, int j) -> double {
        switch (quantity) {
            case HolderQuantity::radial: return samples.radial(k, i, j);
            case HolderQuantity::angle: return samples.angle(k, i, j);
            default: return samples.diffusion(k, i, j);
        }
    };
    auto grid_point = [&](int i, int j) {
        return domain.from_lattice(
            {static_cast<double>(i) / n1, static_cast<double>(j) / n2});
    };

    int usable_radii = 0;
    for (const double radius : radii) {
        // Slices inside the backward window (t0 - R^2, t0].
        int first_slice = last;
        while (first_slice > 0 && samples.time(first_slice - 1) > t0 - radius * radius) {
            --first_slice;
        }
        const int slices = last - first_slice + 1;
        HolderEntry entry{radius, 0.0};
        bool radius_usable = slices >= 2;

        if (radius_usable) {
            bool any_ball_nontrivial = false;
            for (int ci = 0; ci < centers_per_axis; ++ci) {
                for (int cj = 0; cj < centers_per_axis; ++cj) {
                    const int center_i = (ci * n1) / centers_per_axis;
                    const int center_j = (cj * n2) / centers_per_axis;
                    const Vec2 center = grid_point(center_i, center_j);

                    std::vector<std::size_t> ball;
                    for (int i = 0; i < n1; ++i) {
                        for (int j = 0; j < n2; ++j) {
                            if (torus_distance2(domain, grid_point(i, j), center) <
                                radius * radius) {
                                ball.push_back(static_cast<std::size_t>(i) * n2 + j);
                            }
                        }
                    }
                    if (ball.size() >= 2) any_ball_nontrivial = true;

                    const double anchor = value(last, center_i, center_j);
                    double lo = anchor, hi = anchor;
                    bool discard = false;
                    for (int k = first_slice; k <= last && !discard; ++k) {
                        for (const std::size_t idx : ball) {
                            const int i = static_cast<int>(idx) / n2;
                            const int j = static_cast<int>(idx) % n2;
                            double sample = value(k, i, j);
                            if (quantity == HolderQuantity::angle) {
                                sample += 2.0 * pi * std::round((anchor - sample) / (2.0 * pi));
                                if (std::abs(sample - anchor) > 0.5 * pi) {
                                    discard = true;
                                    break;
                                }
                            }
                            lo = std::min(lo, sample);
                            hi = std::max(hi, sample);
                        }
                    }
                    if (discard) {
                        ++report.discarded_cylinders;
                        continue;
                    }
                    entry.max_osc = std::max(entry.max_osc, hi - lo);
                }
            }
            radius_usable = any_ball_nontrivial;
        }

        if (radius_usable) {
            ++usable_radii;
            report.entries.push_back(entry);
            report.seminorm =
                std::max(report.seminorm, entry.max_osc / std::pow(radius, alpha));
        }
    }
    report.insufficient_resolution = usable_radii < 4;
    return report;
}

namespace {

void append_row(std::string& out, const double* values, int count) {
    for (int k = 0; k < count; ++k) {
        if (k > 0) out.push_back(',');
        append_double(out, values[k]);
    }
    out.push_back('\n');
}

}  // namespace

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& series) {
    std::string text =
        "t,E,q,lambda_min,lambda_max,r_min,r_max,dE_dt_lhs,dE_dt_rhs,"
        "residual_theta,residual_r,affine_residual,min_det\n";
    for (const DiagnosticsRecord& rec : series) {
        const double row[] = {rec.t,          rec.E,
                              rec.q,          rec.lambda_min,
                              rec.lambda_max, rec.r_min,
                              rec.r_max,      rec.dE_dt_lhs,
                              rec.dE_dt_rhs,  rec.residual_theta,
                              rec.residual_r, rec.affine_residual,
                              rec.min_det};
        append_row(text, row, 13);
    }
    out << text;
}

void write_holder_csv(std::ostream& out, const std::vector<HolderReport>& reports) {
    std::string text = "alpha,R,osc,seminorm\n";
    for (const HolderReport& report : reports) {
        for (const HolderEntry& entry : report.entries) {
            const double row[] = {report.alpha, entry.radius, entry.max_osc, report.seminorm};
            append_row(text, row, 4);
        }
    }
    out << text;
}

}  // namespace difflow

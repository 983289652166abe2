#include "difflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace difflow {

namespace {

// First-derivative data shared by the identity checks. Everything is evaluated
// at the jet's base point; derivatives of composite quantities come from the
// closed form F = ((a+d)^2 + (c-b)^2)^-1 on the det > 0 branch.
struct JetCalculus {
    double s, w, r2, r, F;
    double s_j[2], w_j[2];
    double lap[2];
    double lapg[2][2];  // [alpha][j] = d_j lap u^alpha
    double F_j[2];
    double T_j[2][2];  // [alpha][j] = d_j (F lap u^alpha)
    double r_j[2], th_j[2];

    explicit JetCalculus(const Jet& jet) {
        const Mat2& du = jet.du;
        s = du.a + du.d;
        w = du.b - du.c;
        r2 = s * s + w * w;
        r = std::sqrt(r2);
        F = 1.0 / r2;
        for (int alpha = 0; alpha < 2; ++alpha) {
            lap[alpha] = jet.laplacian(alpha);
            for (int j = 0; j < 2; ++j) lapg[alpha][j] = jet.laplacian_grad(alpha, j);
        }
        for (int j = 0; j < 2; ++j) {
            s_j[j] = jet.d2[0][0][j] + jet.d2[1][1][j];
            w_j[j] = jet.d2[1][0][j] - jet.d2[0][1][j];
            F_j[j] = -2.0 * (s * s_j[j] + w * w_j[j]) * F * F;
            r_j[j] = (s * s_j[j] + w * w_j[j]) / r;
            th_j[j] = (s * w_j[j] - w * s_j[j]) / r2;
        }
        for (int alpha = 0; alpha < 2; ++alpha) {
            for (int j = 0; j < 2; ++j) {
                T_j[alpha][j] = F_j[j] * lap[alpha] + F * lapg[alpha][j];
            }
        }
    }
};

double minimizing_tolerance(const Jet& jet) { return 1e-12 * std::max(1.0, jet_magnitude(jet)); }

}  // namespace

double jet_magnitude(const Jet& jet) {
    double m = std::max(std::max(std::abs(jet.du.a), std::abs(jet.du.b)),
                        std::max(std::abs(jet.du.c), std::abs(jet.du.d)));
    for (int alpha = 0; alpha < 2; ++alpha) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                m = std::max(m, std::abs(jet.d2[alpha][j][k]));
                for (int l = 0; l < 2; ++l) m = std::max(m, std::abs(jet.d3[alpha][j][k][l]));
            }
        }
    }
    return m;
}

Mat2 jet_gradient_at(const Jet& jet, const Vec2& x) {
    const double xv[2] = {x.x, x.y};
    Mat2 out = jet.du;
    for (int alpha = 0; alpha < 2; ++alpha) {
        for (int j = 0; j < 2; ++j) {
            double entry = 0.0;
            for (int k = 0; k < 2; ++k) {
                entry += jet.d2[alpha][j][k] * xv[k];
                for (int l = 0; l < 2; ++l) {
                    entry += 0.5 * jet.d3[alpha][j][k][l] * xv[k] * xv[l];
                }
            }
            out(alpha, j) += entry;
        }
    }
    return out;
}

Vec2 jet_laplacian_at(const Jet& jet, const Vec2& x) {
    const double xv[2] = {x.x, x.y};
    double out[2];
    for (int alpha = 0; alpha < 2; ++alpha) {
        out[alpha] = jet.laplacian(alpha);
        for (int k = 0; k < 2; ++k) out[alpha] += jet.laplacian_grad(alpha, k) * xv[k];
    }
    return {out[0], out[1]};
}

Jet jet_rotate(const Jet& jet, double angle) {
    const Mat2 rot = rotation(angle);
    Jet out;
    out.du = rot * jet.du * transpose(rot);
    for (int alpha = 0; alpha < 2; ++alpha) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                double acc2 = 0.0;
                for (int beta = 0; beta < 2; ++beta) {
                    for (int p = 0; p < 2; ++p) {
                        for (int q = 0; q < 2; ++q) {
                            acc2 += rot(alpha, beta) * jet.d2[beta][p][q] * rot(j, p) * rot(k, q);
                        }
                    }
                }
                out.d2[alpha][j][k] = acc2;
                for (int l = 0; l < 2; ++l) {
                    double acc3 = 0.0;
                    for (int beta = 0; beta < 2; ++beta) {
                        for (int p = 0; p < 2; ++p) {
                            for (int q = 0; q < 2; ++q) {
                                for (int m = 0; m < 2; ++m) {
                                    acc3 += rot(alpha, beta) * jet.d3[beta][p][q][m] * rot(j, p) *
                                            rot(k, q) * rot(l, m);
                                }
                            }
                        }
                    }
                    out.d3[alpha][j][k][l] = acc3;
                }
            }
        }
    }
    return out;
}

Sym2 reaction_term(const Jet& jet, ReactionForm form) {
    const JetCalculus calc(jet);
    if (!(calc.r >= 1e-14)) {
        throw std::domain_error("reaction term undefined where lambda1 + lambda2 vanishes");
    }
    const double* grad = form == ReactionForm::displayed ? calc.s_j : calc.r_j;
    double b[2];  // u^alpha_i lap u^alpha summed over alpha
    for (int i = 0; i < 2; ++i) {
        b[i] = jet.du(0, i) * calc.lap[0] + jet.du(1, i) * calc.lap[1];
    }
    auto entry = [&](int i, int j) {
        double quad = 0.0;
        for (int alpha = 0; alpha < 2; ++alpha) {
            for (int k = 0; k < 2; ++k) {
                quad += jet.d2[alpha][k][i] * jet.d2[alpha][k][j];
            }
        }
        return -2.0 * calc.F * (quad + (grad[i] * b[j] + grad[j] * b[i]) / calc.r);
    };
    return {entry(0, 0), entry(0, 1), entry(1, 1)};
}

double verify_evolution_of_S(const Jet& jet, ReactionForm form, BarrierSide side) {
    const JetCalculus calc(jet);
    const Sym2 n = reaction_term(jet, form);
    const double sign = side == BarrierSide::lower ? 1.0 : -1.0;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            double hdot = 0.0, laph = 0.0;
            for (int alpha = 0; alpha < 2; ++alpha) {
                hdot += calc.T_j[alpha][i] * jet.du(alpha, j) +
                        jet.du(alpha, i) * calc.T_j[alpha][j];
                double mixed = 0.0;
                for (int k = 0; k < 2; ++k) mixed += jet.d2[alpha][k][i] * jet.d2[alpha][k][j];
                laph += calc.lapg[alpha][i] * jet.du(alpha, j) +
                        jet.du(alpha, i) * calc.lapg[alpha][j] + 2.0 * mixed;
            }
            // Lower barrier: S = h - m^2 delta. Upper barrier: S = M^2 delta - h,
            // which flips every S-derivative and the reaction term.
            const double sdot = sign * hdot;
            const double laps = sign * laph;
            const double reaction = sign * n(i, j);
            worst = std::max(worst, std::abs(sdot - calc.F * laps - reaction));
        }
    }
    return worst;
}

void require_minimizing(const Jet& jet) {
    const double tol = minimizing_tolerance(jet);
    if (std::abs(jet.du.b) > tol || std::abs(jet.du.c) > tol) {
        throw std::invalid_argument("minimizing frame requires diagonal du");
    }
    if (!(jet.du.a > 0.0) || jet.du.d < jet.du.a - tol) {
        throw std::invalid_argument("minimizing frame requires 0 < lambda1 <= lambda2");
    }
    if (std::abs(jet.d2[0][0][0]) > tol || std::abs(jet.d2[0][0][1]) > tol) {
        throw std::invalid_argument("minimizing frame requires u^1_{1i} = 0");
    }
}

QQuantity q_quantity(const Jet& jet) {
    require_minimizing(jet);
    const double l1 = jet.du.a;
    const double l2 = jet.du.d;
    const double tol = minimizing_tolerance(jet);
    if (l2 - l1 <= tol) {
        throw std::invalid_argument("q_quantity needs lambda2 > lambda1; use q_case1");
    }
    const double r = l1 + l2;
    const double f = 1.0 / (r * r);
    const double u211 = jet.d2[1][0][0];
    const double u212 = jet.d2[1][0][1];
    const double u122 = jet.d2[0][1][1];
    const double gap = l2 * l2 - l1 * l1;

    QQuantity out;
    const double sum = u212 + u122;
    out.closed_form = 2.0 * l1 * l1 * f / gap * (u211 * u211 + sum * sum);

    // sup over linear extensions of 2 G_k d_k S12 - |G|^2 S22, attained at
    // G_k = d_k S12 / S22.
    const double ds12_1 = l2 * u211;
    const double ds12_2 = l1 * u122 + l2 * u212;
    const double sup = (ds12_1 * ds12_1 + ds12_2 * ds12_2) / gap;
    out.by_search = reaction_term(jet).xx + 2.0 * f * sup;
    return out;
}

Case1Classification q_case1(const Jet& jet) {
    require_minimizing(jet);
    const double tol = minimizing_tolerance(jet);
    if (std::abs(jet.du.d - jet.du.a) > tol) {
        throw std::invalid_argument("q_case1 needs lambda1 = lambda2");
    }
    if (std::abs(jet.d2[1][1][0]) > tol || std::abs(jet.d2[1][1][1]) > tol) {
        throw std::invalid_argument("q_case1 needs u^2_{2i} = 0");
    }
    const double lambda = jet.du.a;
    const double c1 = lambda * jet.d2[1][0][0];  // d_1 S12 = lambda u^2_11
    const double c2 = lambda * jet.d2[0][1][1];  // d_2 S12 = lambda u^1_22
    const double scale = std::max(1.0, jet_magnitude(jet));
    if (std::abs(c1) <= 1e-12 * scale * scale && std::abs(c2) <= 1e-12 * scale * scale) {
        return Case1Classification::zero;
    }
    return Case1Classification::unbounded_above;
}

RThetaResiduals verify_rtheta_system(const Jet& jet) {
    const JetCalculus calc(jet);
    RThetaResiduals out;
    if (!(calc.r >= 1e-14)) {
        out.degenerate = true;
        out.residual_r = out.residual_theta = out.residual_r_single_cross =
            std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double s = calc.s, w = calc.w, r = calc.r, r2 = calc.r2;

    double s_jk[2][2], w_jk[2][2];
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            s_jk[j][k] = jet.d3[0][0][j][k] + jet.d3[1][1][j][k];
            w_jk[j][k] = jet.d3[1][0][j][k] - jet.d3[0][1][j][k];
        }
    }
    double lap_r = 0.0, lap_th = 0.0;
    for (int j = 0; j < 2; ++j) {
        const double num_r = calc.s_j[j] * calc.s_j[j] + s * s_jk[j][j] +
                             calc.w_j[j] * calc.w_j[j] + w * w_jk[j][j];
        lap_r += num_r / r - (s * calc.s_j[j] + w * calc.w_j[j]) * calc.r_j[j] / r2;
        const double num_th = calc.s_j[j] * calc.w_j[j] + s * w_jk[j][j] -
                              calc.w_j[j] * calc.s_j[j] - w * s_jk[j][j];
        lap_th += num_th / r2 - (s * calc.w_j[j] - w * calc.s_j[j]) * 2.0 * calc.r_j[j] / (r2 * r);
    }

    const double sdot = calc.T_j[0][0] + calc.T_j[1][1];
    const double wdot = calc.T_j[1][0] - calc.T_j[0][1];
    const double rdot = (s * sdot + w * wdot) / r;
    const double thdot = (s * wdot - w * sdot) / r2;

    const double dr2 = calc.r_j[0] * calc.r_j[0] + calc.r_j[1] * calc.r_j[1];
    const double dth2 = calc.th_j[0] * calc.th_j[0] + calc.th_j[1] * calc.th_j[1];
    const double cross = calc.r_j[0] * calc.th_j[1] - calc.r_j[1] * calc.th_j[0];

    out.residual_theta = std::abs(thdot - calc.F * lap_th);
    const double base = -dth2 / r - 2.0 * dr2 / (r2 * r);
    out.residual_r = std::abs(rdot - calc.F * lap_r - (base + 2.0 * cross / r2));
    out.residual_r_single_cross = std::abs(rdot - calc.F * lap_r - (base + cross / r2));
    return out;
}

std::uint64_t JetSampler::next_word() {
    // splitmix64; fixed-width arithmetic keeps sampled jets identical across
    // platforms and standard-library implementations.
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double JetSampler::uniform() { return static_cast<double>(next_word() >> 11) * 0x1.0p-53; }

double JetSampler::symmetric() { return 2.0 * uniform() - 1.0; }

Jet JetSampler::general_jet() {
    Jet jet;
    do {
        jet.du = {symmetric(), symmetric(), symmetric(), symmetric()};
    } while (det(jet.du) <= 0.1);
    for (int alpha = 0; alpha < 2; ++alpha) {
        for (int j = 0; j < 2; ++j) {
            for (int k = j; k < 2; ++k) {
                jet.set_d2(alpha, j, k, symmetric());
                for (int l = k; l < 2; ++l) jet.set_d3(alpha, j, k, l, symmetric());
            }
        }
    }
    return jet;
}

Jet JetSampler::symmetric_du_jet() {
    Jet jet = general_jet();
    // Positive trace plus positive determinant keeps du positive definite, the
    // shape a first derivative takes in the frame adapted to its singular
    // vectors. That is the regime where the trace form of the reaction is
    // valid, since there r equals s.
    do {
        const double mixed = symmetric();
        jet.du = {symmetric(), mixed, mixed, symmetric()};
    } while (det(jet.du) <= 0.1 || jet.du.a + jet.du.d <= 0.1);
    return jet;
}

Jet JetSampler::minimizing_jet() {
    Jet jet;
    double lo, hi;
    do {
        lo = uniform();
        hi = uniform();
        if (lo > hi) std::swap(lo, hi);
    } while (lo * hi <= 0.1 || hi - lo <= 0.1);
    jet.du = {lo, 0.0, 0.0, hi};
    jet.set_d2(0, 1, 1, symmetric());
    jet.set_d2(1, 0, 0, symmetric());
    jet.set_d2(1, 0, 1, symmetric());
    jet.set_d2(1, 1, 1, symmetric());
    return jet;
}

Jet JetSampler::case1_jet(bool force_zero) {
    Jet jet;
    const double lambda = 0.4 + uniform();  // det = lambda^2 stays above 0.1
    jet.du = {lambda, 0.0, 0.0, lambda};
    if (!force_zero) {
        jet.set_d2(1, 0, 0, symmetric());
        jet.set_d2(0, 1, 1, symmetric());
    }
    return jet;
}

namespace {

Jet reference_affine_jet() { return Jet::affine(Mat2{0.8, 0.3, -0.2, 1.1}); }

double relative_scale(const Jet& jet) {
    const double m = std::max(1.0, jet_magnitude(jet));
    return m * m * m;
}

}  // namespace

std::vector<IdentityCheck> run_oracle_checks(std::uint64_t seed, int trials,
                                             std::optional<double> tolerance_override) {
    std::vector<IdentityCheck> table;
    auto add = [&](const std::string& name, double default_tol, double max_residual, int count) {
        IdentityCheck row;
        row.name = name;
        row.trials = count;
        row.max_residual = max_residual;
        row.tolerance = tolerance_override.value_or(default_tol);
        row.pass = max_residual <= row.tolerance;
        table.push_back(row);
    };

    {
        JetSampler sampler(seed + 1);
        double worst = verify_evolution_of_S(reference_affine_jet(), ReactionForm::displayed);
        for (int t = 0; t < trials; ++t) {
            const Jet jet = sampler.symmetric_du_jet();
            worst = std::max(worst, verify_evolution_of_S(jet, ReactionForm::displayed) /
                                        relative_scale(jet));
        }
        add("evolution of S (adapted frame)", 1e-9, worst, trials);
    }
    {
        JetSampler sampler(seed + 2);
        double worst = verify_evolution_of_S(reference_affine_jet(), ReactionForm::radial);
        for (int t = 0; t < trials; ++t) {
            const Jet jet = sampler.general_jet();
            worst = std::max(worst,
                             verify_evolution_of_S(jet, ReactionForm::radial) / relative_scale(jet));
        }
        add("evolution of S (general jets)", 1e-9, worst, trials);
    }
    {
        JetSampler sampler(seed + 3);
        double worst = verify_evolution_of_S(reference_affine_jet(), ReactionForm::radial,
                                             BarrierSide::upper);
        for (int t = 0; t < trials; ++t) {
            const Jet jet = sampler.general_jet();
            worst = std::max(worst, verify_evolution_of_S(jet, ReactionForm::radial,
                                                          BarrierSide::upper) /
                                        relative_scale(jet));
        }
        add("evolution of S (upper barrier)", 1e-9, worst, trials);
    }
    {
        JetSampler sampler(seed + 4);
        double worst_gap = 0.0;
        double most_negative = 0.0;
        for (int t = 0; t < trials; ++t) {
            const Jet jet = sampler.minimizing_jet();
            const QQuantity q = q_quantity(jet);
            // The two evaluations cancel large reaction and supremum terms
            // against each other, so agreement is measured relative to the
            // size of those terms rather than of Q itself.
            const double term_scale =
                std::max(1.0, std::abs(reaction_term(jet).xx) + std::abs(q.by_search));
            worst_gap = std::max(worst_gap, std::abs(q.closed_form - q.by_search) / term_scale);
            most_negative = std::min(most_negative, std::min(q.closed_form, q.by_search));
        }
        add("case-2 Q agreement", 1e-10, worst_gap, trials);
        add("case-2 Q nonnegativity", 1e-12, -most_negative, trials);
    }
    {
        JetSampler sampler(seed + 5);
        int mismatches = 0;
        for (int t = 0; t < trials; ++t) {
            const bool force_zero = (t % 2) == 0;
            const Jet jet = sampler.case1_jet(force_zero);
            const bool coefficients_zero =
                jet.d2[1][0][0] == 0.0 && jet.d2[0][1][1] == 0.0;
            const Case1Classification expected = coefficients_zero
                                                     ? Case1Classification::zero
                                                     : Case1Classification::unbounded_above;
            if (q_case1(jet) != expected) ++mismatches;
        }
        add("case-1 classification", 0.5, static_cast<double>(mismatches), trials);
    }
    {
        JetSampler sampler(seed + 6);
        const RThetaResiduals affine = verify_rtheta_system(reference_affine_jet());
        double worst_r = affine.residual_r;
        double worst_theta = affine.residual_theta;
        for (int t = 0; t < trials; ++t) {
            const Jet jet = sampler.general_jet();
            const RThetaResiduals res = verify_rtheta_system(jet);
            const double scale = relative_scale(jet);
            worst_r = std::max(worst_r, res.residual_r / scale);
            worst_theta = std::max(worst_theta, res.residual_theta / scale);
        }
        add("r-theta system (theta)", 1e-9, worst_theta, trials);
        add("r-theta system (r)", 1e-9, worst_r, trials);
    }
    return table;
}

}  // namespace difflow

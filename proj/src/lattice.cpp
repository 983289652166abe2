#include "difflow/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace difflow {

Lattice::Lattice(const Mat2& basis) : basis_(basis), area_(det(basis)) {
    if (!(area_ > 1e-12)) {
        throw std::invalid_argument("lattice basis must be oriented and nondegenerate");
    }
    inverse_ = inverse(basis_);
}

Vec2 Lattice::wrap(const Vec2& x) const {
    const Vec2 xi = inverse_ * x;
    double z1 = std::floor(xi.x);
    double z2 = std::floor(xi.y);
    // floor can leave a fractional part that rounds up to exactly 1 when xi is
    // a hair below an integer; push such points to the low edge instead so the
    // result stays inside the half-open cell.
    if (xi.x - z1 >= 1.0) z1 += 1.0;
    if (xi.y - z2 >= 1.0) z2 += 1.0;
    return {x.x - (basis_.a * z1 + basis_.c * z2), x.y - (basis_.b * z1 + basis_.d * z2)};
}

HomomorphismCheck check_homomorphism(const TorusPair& pair, bool diffeomorphism_class) {
    const Mat2 k = pair.target.inverse_basis() * pair.linear_part * pair.domain.basis();
    HomomorphismCheck result;
    result.integer_part = {static_cast<int>(std::lround(k.a)), static_cast<int>(std::lround(k.b)),
                           static_cast<int>(std::lround(k.c)), static_cast<int>(std::lround(k.d))};
    result.max_deviation = std::max(
        std::max(std::abs(k.a - result.integer_part.a), std::abs(k.b - result.integer_part.b)),
        std::max(std::abs(k.c - result.integer_part.c), std::abs(k.d - result.integer_part.d)));
    result.ok = result.max_deviation <= 1e-9;
    if (diffeomorphism_class && std::abs(det(pair.linear_part)) < 1e-12) result.ok = false;
    return result;
}

TorusPair validated(TorusPair pair, bool diffeomorphism_class) {
    if (diffeomorphism_class && std::abs(det(pair.linear_part)) < 1e-12) {
        throw std::invalid_argument("linear part is singular but a diffeomorphism was requested");
    }
    const HomomorphismCheck check = check_homomorphism(pair, diffeomorphism_class);
    if (!check.ok) {
        throw std::invalid_argument(
            "linear part does not map the domain lattice into the target lattice");
    }
    return pair;
}

TorusPair make_torus_pair(const Lattice& domain, const Lattice& target, const IntMat2& k) {
    const Mat2 linear_part = target.basis() * to_mat2(k) * domain.inverse_basis();
    return TorusPair{domain, target, linear_part};
}

}  // namespace difflow

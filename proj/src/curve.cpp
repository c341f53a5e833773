#include "parobst/curve.hpp"

#include "parobst/grid.hpp"

namespace parobst {

std::vector<double> dyadic_radii(double r0, int count) {
    if (!(r0 > 0) || count < 1) throw DomainError("dyadic_radii needs r0 > 0 and count >= 1");
    std::vector<double> r;
    double v = r0;
    for (int i = 0; i < count; ++i, v /= 2) r.push_back(v);
    return r;
}

}  // namespace parobst

#pragma once

#include <string>
#include <vector>

namespace parobst {

/// A diagnostic sampled at a list of radii.
struct DiagnosticCurve {
    std::string name;
    std::vector<double> radii;
    std::vector<double> values;

    std::size_t size() const { return radii.size(); }
    void push(double r, double v) {
        radii.push_back(r);
        values.push_back(v);
    }
};

/// Dyadic radii r0, r0/2, ..., r0/2^(count-1).
std::vector<double> dyadic_radii(double r0, int count);

}  // namespace parobst

#include "parobst/exact.hpp"

#include <cmath>
#include <sstream>

namespace parobst {

namespace {

std::vector<double> parse_numbers(const std::string& s, const std::string& tag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("exact profile '" + tag + "': bad number '" + item + "'");
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ExactProfile halfspace(int n, Vec e, double offset) {
    if (n == 1) e[1] = 0;
    const double norm = std::hypot(e[0], e[1]);
    if (!(norm > 0)) throw DomainError("halfspace direction must be non-zero");
    e[0] /= norm;
    e[1] /= norm;
    ExactProfile p;
    p.tag = "halfspace";
    p.n = n;
    p.params = n == 1 ? fmt(e[0]) + ",0," + fmt(offset) : fmt(e[0]) + "," + fmt(e[1]) + "," + fmt(offset);
    p.value = [e, offset](const Point& q) {
        const double s = std::max(0.0, q.x[0] * e[0] + q.x[1] * e[1] - offset);
        return 0.5 * s * s;
    };
    p.grad = [e, offset](const Point& q) {
        const double s = std::max(0.0, q.x[0] * e[0] + q.x[1] * e[1] - offset);
        return Vec{s * e[0], s * e[1]};
    };
    p.rhs = [](const Point&) { return 1.0; };
    p.homogeneous = offset == 0.0;
    return p;
}

ExactProfile polynomial(int n, std::array<std::array<double, kMaxDim>, kMaxDim> M, double f) {
    if (n == 1) M[0][1] = M[1][0] = M[1][1] = 0;
    M[1][0] = M[0][1];
    const double m = M[0][0] + M[1][1] - f;
    ExactProfile p;
    p.tag = "polynomial";
    p.n = n;
    p.params = n == 1 ? fmt(M[0][0]) + ";" + fmt(f)
                      : fmt(M[0][0]) + "," + fmt(M[0][1]) + "," + fmt(M[1][1]) + ";" + fmt(f);
    p.value = [M, m](const Point& q) {
        const double quad = M[0][0] * q.x[0] * q.x[0] + 2 * M[0][1] * q.x[0] * q.x[1] +
                            M[1][1] * q.x[1] * q.x[1];
        return 0.5 * quad + m * q.t;
    };
    p.grad = [M](const Point& q) {
        return Vec{M[0][0] * q.x[0] + M[0][1] * q.x[1], M[1][0] * q.x[0] + M[1][1] * q.x[1]};
    };
    p.rhs = [f](const Point&) { return f; };
    p.homogeneous = true;
    return p;
}

ExactProfile time_barrier(int n, double t0, double sign) {
    if (sign != 1.0 && sign != -1.0) throw DomainError("time_barrier sign must be +1 or -1");
    ExactProfile p;
    p.tag = "time_barrier";
    p.n = n;
    p.params = fmt(t0) + "," + fmt(sign);
    p.value = [t0, sign](const Point& q) { return sign * std::max(0.0, q.t - t0); };
    p.grad = [](const Point&) { return Vec{0.0, 0.0}; };
    p.rhs = [sign](const Point&) { return -sign; };
    p.homogeneous = false;
    return p;
}

ExactProfile quartic(int n) {
    ExactProfile p;
    p.tag = "quartic";
    p.n = n;
    p.params = "";
    p.value = [](const Point& q) { return q.x[0] * q.x[0] * q.x[0] * q.x[0]; };
    p.grad = [](const Point& q) { return Vec{4 * q.x[0] * q.x[0] * q.x[0], 0.0}; };
    p.rhs = [](const Point& q) { return 12 * q.x[0] * q.x[0]; };
    p.homogeneous = false;
    return p;
}

ExactProfile make_exact(const std::string& tag, const std::string& params, int n) {
    if (tag == "halfspace") {
        auto v = parse_numbers(params, tag);
        Vec e{1.0, 0.0};
        double offset = 0;
        if (!v.empty()) e[0] = v[0];
        if (v.size() > 1) e[1] = v[1];
        if (v.size() > 2) offset = v[2];
        if (v.size() > 3) throw DomainError("halfspace takes at most 3 parameters");
        return halfspace(n, e, offset);
    }
    if (tag == "polynomial") {
        std::string mpart = params, fpart;
        if (auto semi = params.find(';'); semi != std::string::npos) {
            mpart = params.substr(0, semi);
            fpart = params.substr(semi + 1);
        }
        auto v = parse_numbers(mpart, tag);
        std::array<std::array<double, kMaxDim>, kMaxDim> M{};
        M[0][0] = 1.0;
        if (n == 1) {
            if (v.size() > 1) throw DomainError("polynomial in 1D takes one matrix entry");
            if (!v.empty()) M[0][0] = v[0];
        } else {
            if (!v.empty() && v.size() != 3) throw DomainError("polynomial in 2D takes M11,M12,M22");
            if (v.size() == 3) {
                M[0][0] = v[0];
                M[0][1] = M[1][0] = v[1];
                M[1][1] = v[2];
            }
        }
        double f = 1.0;
        if (!fpart.empty()) {
            auto fv = parse_numbers(fpart, tag);
            if (fv.size() != 1) throw DomainError("polynomial: expected one value after ';'");
            f = fv[0];
        }
        return polynomial(n, M, f);
    }
    if (tag == "time_barrier") {
        auto v = parse_numbers(params, tag);
        double t0 = -0.5, sign = -1.0;
        if (!v.empty()) t0 = v[0];
        if (v.size() > 1) sign = v[1];
        if (v.size() > 2) throw DomainError("time_barrier takes at most 2 parameters");
        return time_barrier(n, t0, sign);
    }
    if (tag == "quartic") {
        if (!parse_numbers(params, tag).empty()) throw DomainError("quartic takes no parameters");
        return quartic(n);
    }
    throw DomainError("unknown exact profile tag '" + tag + "'");
}

const std::vector<RegistryEntry>& exact_registry() {
    static const std::vector<RegistryEntry> reg = {
        {"halfspace", "u = 1/2 ((x.e - a)^+)^2, f = 1", "1,0,0"},
        {"polynomial", "u = 1/2 x^T M x + (tr M - f) t, f constant", "1;1"},
        {"time_barrier", "u = s (t - t0)^+, f = -s", "-0.5,-1"},
        {"quartic", "u = x1^4, f = 12 x1^2", ""},
    };
    return reg;
}

}  // namespace parobst

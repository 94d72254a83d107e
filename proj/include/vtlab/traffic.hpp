#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "vtlab/common.hpp"

namespace vtlab {

/// n x n demand rates in units of lightpath capacity (capacity = 1.0).
/// Nonnegative entries, zero diagonal.
struct TrafficMatrix {
    int n = 0;
    std::vector<double> demands;  // row-major

    static TrafficMatrix zeros(int n) {
        TrafficMatrix m;
        m.n = n;
        m.demands.assign(static_cast<size_t>(n) * n, 0.0);
        return m;
    }

    double at(int i, int j) const { return demands[static_cast<size_t>(i) * n + j]; }
    double& at(int i, int j) { return demands[static_cast<size_t>(i) * n + j]; }

    TrafficMatrix scaled(double c) const {
        TrafficMatrix out = *this;
        for (double& d : out.demands) d *= c;
        return out;
    }

    double total() const {
        double s = 0.0;
        for (double d : demands) s += d;
        return s;
    }
};

struct TrafficConfig {
    double sigma = 1.0;        // shape of the underlying normal
    double load = 0.3;         // target mean lightpath utilization
    int change_interval = 0;   // regenerate every R rounds; 0 keeps traffic fixed
};

/// Unit-mean log-normal demands: each off-diagonal entry is
/// exp(-sigma^2/2 + sigma*z) with z standard normal, drawn row-major,
/// so E[entry] = 1 and the matrix is bitwise reproducible per seed.
inline TrafficMatrix generate_lognormal_matrix(int n, double sigma, uint64_t seed) {
    if (n < 2) throw std::invalid_argument("generate_lognormal_matrix: need n >= 2");
    if (!(sigma > 0.0)) throw std::invalid_argument("generate_lognormal_matrix: sigma must be > 0");
    Rng rng(derive_seed(seed, stream::kTraffic));
    TrafficMatrix m = TrafficMatrix::zeros(n);
    const double shift = -0.5 * sigma * sigma;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) m.at(i, j) = std::exp(shift + sigma * rng.next_normal());
    return m;
}

// CSV export/import: n rows by n columns, full-precision decimals.
inline void save_traffic_csv(const TrafficMatrix& m, std::ostream& out) {
    char buf[64];
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

inline TrafficMatrix load_traffic_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw std::invalid_argument("load_traffic_csv: need at least 2 rows");
    TrafficMatrix m = TrafficMatrix::zeros(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw std::invalid_argument("load_traffic_csv: ragged row");
        for (int j = 0; j < n; ++j) {
            if (i == j && rows[i][j] != 0.0)
                throw std::invalid_argument("load_traffic_csv: nonzero diagonal");
            if (rows[i][j] < 0.0)
                throw std::invalid_argument("load_traffic_csv: negative demand");
            m.at(i, j) = rows[i][j];
        }
    }
    return m;
}

}  // namespace vtlab

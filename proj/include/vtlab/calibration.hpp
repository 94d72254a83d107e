#pragma once

#include "vtlab/netstate.hpp"
#include "vtlab/traffic.hpp"

namespace vtlab {

/// Scales the matrix by the single constant that makes mean lightpath
/// utilization on `reference_vt` equal `load`. Utilization is linear in the
/// scale, so the constant is exact. The reference must route every demand.
inline TrafficMatrix calibrate(const TrafficMatrix& matrix, const VirtualTopology& reference_vt,
                               double load) {
    if (load < 0.0 || load > 1.0)
        throw std::invalid_argument("calibrate: load must lie in [0,1]");
    if (load == 0.0) return TrafficMatrix::zeros(matrix.n);
    const UtilizationReport rep = route_traffic(reference_vt, matrix);
    if (rep.unroutable_fraction > 0.0)
        throw std::invalid_argument("calibrate: reference topology cannot route every demand");
    if (rep.mean_utilization <= 0.0)
        throw std::invalid_argument("calibrate: traffic matrix carries no demand");
    return matrix.scaled(load / rep.mean_utilization);
}

}  // namespace vtlab

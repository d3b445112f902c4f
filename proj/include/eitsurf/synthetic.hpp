#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "eitsurf/surface_mesh.hpp"

namespace eit {

struct Hole {
    double cx = 0.0;
    double cy = 0.0;
    double r = 0.0;
};

/// Planar synthetic test domains: the unit disk with zero or more circular
/// holes. An annulus is a single hole centered at the origin. Curved
/// geometries are modeled through the metric overrides.
struct DomainDescriptor {
    enum class Kind { Disk, Annulus, Holes };

    Kind kind = Kind::Disk;
    double annulus_r = 0.5;
    std::vector<Hole> holes;
    double target_h = 0.05;

    /// Optional conformal factor rho(x,y): metric rho * (induced).
    std::function<double(double, double)> conformal_factor;
    /// Optional SPD metric field in xy coordinates: returns (a11, a12, a22).
    std::function<std::array<double, 3>(double, double)> metric_field;

    std::vector<Hole> resolved_holes() const;

    static DomainDescriptor disk(double h) {
        DomainDescriptor d;
        d.kind = Kind::Disk;
        d.target_h = h;
        return d;
    }
    static DomainDescriptor annulus(double r, double h) {
        DomainDescriptor d;
        d.kind = Kind::Annulus;
        d.annulus_r = r;
        d.target_h = h;
        return d;
    }
    static DomainDescriptor with_holes(std::vector<Hole> holes, double h) {
        DomainDescriptor d;
        d.kind = Kind::Holes;
        d.holes = std::move(holes);
        d.target_h = h;
        return d;
    }
};

/// Builds a valid SurfaceMesh for the descriptor. Gamma0 is the outer unit
/// circle; holes give loops 1..m in descriptor order.
SurfaceMesh build_synthetic(const DomainDescriptor& desc);

} // namespace eit

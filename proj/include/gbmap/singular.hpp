#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gbmap/mapcore.hpp"
#include "gbmap/polyline.hpp"
#include "gbmap/quad.hpp"

namespace gbmap {

// |dlambda| fell below the non-degeneracy floor on the singular set.
struct DegeneracyError : Error {
    using Error::Error;
};

// The singular set meets the boundary tangentially (or a Levine-type
// precondition failed).
struct TransversalityError : Error {
    using Error::Error;
};

// delta = det(gamma', eta) has no finite-order zero (vanishes on an
// interval) or the order exceeds the admissible fit degree.
struct AdmissibilityError : Error {
    using Error::Error;
};

// The sector-angle estimator failed: no pi-lattice value in reach, arcs
// could not be isolated, or the two boundary classifiers disagree.
struct EstimatorError : Error {
    using Error::Error;
};

struct TraceError : Error {
    using Error::Error;
};

struct SingularSample {
    Vec2 p;              // on the zero set, Newton refined
    double s = 0.0;      // cumulative chord length along the component
    Vec2 tangent;        // unit singular direction (normalized W)
    Vec2 eta;            // unit null direction, sign-continuous along the arc
    double delta = 0.0;  // det(tangent, eta)
    bool first_kind = true;
};

struct BoundaryCrossing {
    int loop = 0;
    double loop_t = 0.0;  // parameter on the boundary loop
    Vec2 p;
};

struct SingularComponent {
    std::vector<SingularSample> samples;
    bool closed = false;
    std::optional<BoundaryCrossing> start_crossing;  // arcs only
    std::optional<BoundaryCrossing> end_crossing;

    Polyline to_polyline() const {
        Polyline poly;
        poly.points.reserve(samples.size());
        poly.params.reserve(samples.size());
        for (const auto& s : samples) {
            poly.points.push_back(s.p);
            poly.params.push_back(s.s);
        }
        return poly;
    }
};

enum class PointStratum { InteriorSecondKind, Boundary };
enum class SignClass { Positive, Null, Negative };

struct AngleEstimate {
    std::array<double, 3> per_radius{};  // raw sweeps at r0, r0/2, r0/4
    double extrapolated = 0.0;
    double value = 0.0;           // snapped when snapping applies
    double lattice_distance = 0.0;
    bool snapped = false;
};

struct SingularPointRecord {
    Vec2 location;
    PointStratum stratum = PointStratum::InteriorSecondKind;
    int component = -1;
    double arc_s = 0.0;             // chord-length position along the component
    int admissible_order = 0;       // k: first k+1 derivatives of delta vanish
    SignClass sign_class = SignClass::Null;
    AngleEstimate alpha_plus, alpha_minus;
    std::optional<BoundaryCrossing> crossing;  // boundary stratum only
};

struct TraceOptions {
    int resolution = 96;          // seed grid cells per axis
    double lambda_tol = 1e-10;    // |lambda| after Newton refinement
    double dlambda_floor = 1e-6;  // non-degeneracy floor
    int max_steps = 40000;
};

struct TraceResult {
    std::vector<SingularComponent> components;
    std::vector<std::string> warnings;  // e.g. components nearly merging
};

// March the zero set of lambda inside M on a sign-change seed grid, with
// predictor/corrector continuation and Newton refinement. Components end
// on the boundary (with crossing records) or close up.
TraceResult trace_singular_set(const SurfaceMap& map, const PlanarDomain& dom,
                               const TraceOptions& opts = {});

// Fill per-sample delta/kind flags and locate interior second-kind points:
// root-find delta = 0 between samples, verify the admissibility order by a
// local polynomial fit. Components must be non-degenerate throughout.
std::vector<SingularPointRecord> classify_kind(const SurfaceMap& map,
                                               SingularComponent& comp,
                                               int component_index);

// Singular curvature at a first-kind point p on the singular set:
// kappa_s = sgn(dlambda(eta)) <f'', n> / |f'|^2 with the null vector
// oriented so {gamma', eta} is positive. `reversed` flips the traversal
// direction of the singular curve (the value must not change).
double singular_curvature(const SurfaceMap& map, Vec2 p, bool reversed = false);

// The integrable measure density per unit Euclidean chart length along
// the singular curve: kappa_s * |f'|_g / |W|. Bounded at admissible
// second-kind points.
double singular_curvature_density(const SurfaceMap& map, Vec2 p);

enum class SectorSide { Plus, Minus };

// Sector angle at a distinguished point by the radial sweep: the total
// parallel-transport-corrected rotation of df(w)/|df(w)|_g as w runs over
// the outward directions of the arc of a small circle on the given side,
// Richardson-extrapolated over three radii.
AngleEstimate sector_angle(const SurfaceMap& map, const PlanarDomain& dom, Vec2 p,
                           SectorSide side, double r0);

// Angle estimates plus sign classification for one distinguished point.
// Interior points snap (alpha+, alpha-) to {(2pi,0), (pi,pi), (0,2pi)};
// boundary points are tested for the null direction along the boundary
// first, then classified by both the angle route and the inward-null-ray
// route, which must agree. r0 is the base sweep radius.
void classify_sign(const SurfaceMap& map, const PlanarDomain& dom,
                   SingularPointRecord& rec, double r0);

// Snap tolerance for the pi-lattice (radians).
inline constexpr double kSnapTol = 0.05 * 3.14159265358979323846;

struct TransversalityReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Check |det(gamma', T_boundary)| at every crossing against the floor, and
// scan each loop for tangential (even-order) contacts of lambda = 0 that
// the trace cannot represent. With `require_empty` (Levine mode) any
// intersection at all is a violation.
TransversalityReport transversality_check(const SurfaceMap& map, const PlanarDomain& dom,
                                          const std::vector<SingularComponent>& components,
                                          bool require_empty = false);

// Convenience: distance (wrapped) between two points of the domain.
double domain_distance(const PlanarDomain& dom, Vec2 a, Vec2 b);

} // namespace gbmap

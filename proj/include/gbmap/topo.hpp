#pragma once

#include <span>
#include <vector>

#include "gbmap/singular.hpp"

namespace gbmap {

struct TopologyError : Error {
    using Error::Error;
};

// A theorem precondition failed (boundary compatibility, regular-value
// search, cross-check mismatch, ...).
struct HypothesisError : Error {
    using Error::Error;
};

// Connected region of M cut out by the singular set, with its boundary
// circuit count. chi of the closed face is 2 - circuits (all faces are
// genus 0 on disk- and strip-type domains).
struct FaceInfo {
    int sign = 0;      // +1 / -1: sign of lambda on the face
    int circuits = 0;  // boundary circuits of the closure
    int chi() const { return 2 - circuits; }
};

// Combinatorial decomposition of M by the singular set: vertices are the
// boundary crossings and interior second-kind points, edges the singular
// sub-arcs and boundary sub-arcs, faces the connected components of
// M minus (Sigma union dM). Closed vertex-free loops count as chi = 0
// pieces; E includes one virtual cut per extra face circuit so that
// V - E + F = chi(M) holds literally.
struct RegionDecomposition {
    int V = 0;
    int E = 0;  // arc edges + virtual cuts
    int F = 0;
    int arc_edges = 0;
    int cut_edges = 0;
    int closed_loop_edges = 0;
    std::vector<FaceInfo> faces;

    int chi_M = 0;
    int chi_closure_plus = 0;
    int chi_closure_minus = 0;
    int chi_sigma = 0;
    int crossings = 0;  // # (Sigma meets dM)

    int s_plus = 0, s_minus = 0;             // interior second kind by class
    int bd_plus = 0, bd_minus = 0, bd_null = 0;

    // chi of the open regions, via the transversal-decomposition identity
    int chi_plus() const { return chi_closure_plus - chi_sigma; }
    int chi_minus() const { return chi_closure_minus - chi_sigma; }

    // chi(cl M+) = chi(M) - chi(cl M-) + #crossings / 2 (exact integers)
    bool closure_euler_relation_holds() const {
        return 2 * chi_closure_plus == 2 * chi_M - 2 * chi_closure_minus + crossings;
    }
};

enum class ChiSelector { M, ClosurePlus, ClosureMinus, Sigma };

int euler_characteristic(const RegionDecomposition& dec, ChiSelector sel);

// Build the decomposition. `records` must already be classified (sign
// classes feed the s/bd counts). `resolution` controls the region
// flood-fill grid.
RegionDecomposition build_decomposition(const SurfaceMap& map, const PlanarDomain& dom,
                                        const std::vector<SingularComponent>& components,
                                        const std::vector<SingularPointRecord>& records,
                                        int resolution = 192);

// Rotation index of a closed curve in a flat chart from ordered,
// nonvanishing tangent samples: accumulated turning / 2pi, which must be
// within 0.05 of an integer.
int rotation_index(std::span<const Vec2> tangents);

// Target region for degree computations: an x-periodic band bounded by the
// two horizontal circles y = y0 and y = y1 (chi = 0).
struct TargetDomain {
    double y0 = 0.0;
    double y1 = 1.0;
    int chi = 0;

    double width() const { return y1 - y0; }
};

struct DegreeResult {
    int degree = 0;
    Vec2 regular_value1, regular_value2;
    std::vector<Vec2> preimages1, preimages2;
};

// Mapping degree by signed preimage counting over two independently chosen
// regular values (which must agree). Checks the boundary compatibility
// hypotheses first: f(dM) in dN, no interior point on dN, f transverse
// to dN.
DegreeResult mapping_degree(const SurfaceMap& map, const PlanarDomain& dom,
                            const std::vector<SingularComponent>& components,
                            const TargetDomain& target);

// Cross-check of the degree through the curvature-integral ratio
//   deg = (signed curvature integral over M) / (curvature integral over N),
// available when the target curvature does not integrate to zero over N.
std::optional<double> degree_from_curvature_ratio(const SurfaceMap& map,
                                                  const PlanarDomain& dom,
                                                  const std::vector<Polyline>& sigma,
                                                  const TargetDomain& target);

} // namespace gbmap

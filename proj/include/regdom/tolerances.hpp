#pragma once

// Numeric tolerances shared across modules. All values assume double
// precision and desk-scale inputs (coordinates up to ~1e5).
namespace regdom::tol {

inline constexpr double hyperboloid = 1e-9;  // <x,x> = -1 and null-cone membership
inline constexpr double group = 1e-9;        // g^T eta g = eta residual
inline constexpr double loxodromic = 1e-9;   // |det(g - I)| floor
inline constexpr double relation = 1e-8;     // relation words evaluate to identity
inline constexpr double dedup = 1e-7;        // merging group elements (relative max-norm)
inline constexpr double locate = 1e-9;       // wall-sign dead band
inline constexpr double weights = 1e-9;      // weight-equation residual accepted by build
inline constexpr double face_closure = 1e-7; // singularity face closure
inline constexpr double membership = 1e-12;  // strict support-inequality margin
inline constexpr double boundary = 1e-9;     // "on the boundary" flag band
inline constexpr double positivity = 1e-6;   // margin for positive weight witnesses

}  // namespace regdom::tol

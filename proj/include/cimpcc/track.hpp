#pragma once

#include "cimpcc/reference_path.hpp"
#include "cimpcc/track_model.hpp"

namespace cimpcc {

/// Everything the online planner reads about a circuit. Immutable and safe to
/// share between planners running concurrently.
struct Track {
  Centerline centerline;
  CurvatureProfile curvature;
  ReferencePath reference;

  static Track build(Centerline cl, int maf_window = kDefaultMafWindow) {
    auto profile = make_curvature_profile(cl, maf_window);
    ReferencePath ref(cl);
    return Track{std::move(cl), std::move(profile), std::move(ref)};
  }
};

}  // namespace cimpcc

#pragma once

// Umbrella header for the hemispheroidal parameterization library.

#include "hemiparam/mesh.hpp"
#include "hemiparam/mesh_io.hpp"
#include "hemiparam/registration.hpp"
#include "hemiparam/projection.hpp"
#include "hemiparam/qc.hpp"
#include "hemiparam/tutte.hpp"
#include "hemiparam/conformal.hpp"
#include "hemiparam/area_preserving.hpp"
#include "hemiparam/balanced.hpp"
#include "hemiparam/harmonics.hpp"
#include "hemiparam/coeffs_io.hpp"
#include "hemiparam/metrics.hpp"
#include "hemiparam/optimize.hpp"
#include "hemiparam/optimize_pipeline.hpp"

namespace hemiparam {
inline constexpr const char* kVersion = "0.1.0";
}

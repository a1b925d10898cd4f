#pragma once
// Convenience header pulling in the whole library.

#include "holo/common.hpp"
#include "holo/numerics.hpp"
#include "holo/expr.hpp"
#include "holo/domains.hpp"
#include "holo/disc_geometry.hpp"
#include "holo/analytic_disc.hpp"
#include "holo/invariant_metrics.hpp"
#include "holo/fixed_points.hpp"
#include "holo/linearization.hpp"
#include "holo/geodesics.hpp"

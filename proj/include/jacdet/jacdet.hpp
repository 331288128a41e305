#pragma once

// Umbrella header.

#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"
#include "jacdet/bump.hpp"
#include "jacdet/stencil.hpp"
#include "jacdet/quadrature.hpp"
#include "jacdet/poly.hpp"
#include "jacdet/analytic.hpp"
#include "jacdet/identities.hpp"
#include "jacdet/psolve.hpp"
#include "jacdet/jacobian.hpp"
#include "jacdet/extremal.hpp"
#include "jacdet/estimates.hpp"
#include "jacdet/report.hpp"

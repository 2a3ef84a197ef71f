#pragma once

// Umbrella header: linear and quadratic-order analysis of doubly-periodic
// capillary-gravity waves over shear flows.

#include "shearwave/config.hpp"
#include "shearwave/dispersion.hpp"
#include "shearwave/errors.hpp"
#include "shearwave/fields.hpp"
#include "shearwave/obstruction.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/report.hpp"
#include "shearwave/residuals.hpp"
#include "shearwave/riccati.hpp"
#include "shearwave/spectral.hpp"
#include "shearwave/util.hpp"

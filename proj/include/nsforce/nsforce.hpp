#pragma once

// Umbrella header: staged recovery of an unknown force in the 2D
// incompressible Navier-Stokes equations from low-mode velocity
// observations, via feedback nudging.

#include "nsforce/grid.hpp"
#include "nsforce/fft.hpp"
#include "nsforce/field.hpp"
#include "nsforce/operators.hpp"
#include "nsforce/forcing.hpp"
#include "nsforce/integrate.hpp"
#include "nsforce/diagnostics.hpp"
#include "nsforce/snapshot.hpp"
#include "nsforce/observations.hpp"
#include "nsforce/recovery.hpp"
#include "nsforce/experiment.hpp"

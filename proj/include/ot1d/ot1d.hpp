#pragma once

// Umbrella header: one-dimensional optimal transport with strictly convex
// costs, monotone plans, Fréchet barycenters, and convergence experiments.

#include "ot1d/barycenter.hpp"
#include "ot1d/cost.hpp"
#include "ot1d/errors.hpp"
#include "ot1d/isotonic.hpp"
#include "ot1d/lln.hpp"
#include "ot1d/lp_oracle.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/minimize.hpp"
#include "ot1d/numeric.hpp"
#include "ot1d/rng.hpp"
#include "ot1d/transport.hpp"

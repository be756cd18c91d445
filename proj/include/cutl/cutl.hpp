#pragma once

// Umbrella header for the cutl library: trajectory analysis of near-critical
// stochastic processes — cutpoint/cut-time/cut-interval detection, moment
// profiles and regime classification, Lyapunov drift checks, hitting-time
// estimators with exact birth-death oracles, and the experiment harness.

#include "cutl/rng.hpp"
#include "cutl/trajectory.hpp"
#include "cutl/stats.hpp"
#include "cutl/process.hpp"
#include "cutl/generators.hpp"
#include "cutl/cut_analysis.hpp"
#include "cutl/lyapunov.hpp"
#include "cutl/hitting.hpp"
#include "cutl/factory.hpp"
#include "cutl/experiments.hpp"

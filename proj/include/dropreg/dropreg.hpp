#pragma once

/// Umbrella header: pulls in the whole library.

#include "dropreg/dataio.hpp"
#include "dropreg/experiments.hpp"
#include "dropreg/fit.hpp"
#include "dropreg/gauss_hermite.hpp"
#include "dropreg/glm.hpp"
#include "dropreg/model.hpp"
#include "dropreg/noising.hpp"
#include "dropreg/online.hpp"
#include "dropreg/optimize.hpp"
#include "dropreg/reports.hpp"
#include "dropreg/rng.hpp"
#include "dropreg/semisup.hpp"
#include "dropreg/simgen.hpp"
#include "dropreg/sparse.hpp"
#include "dropreg/stats.hpp"

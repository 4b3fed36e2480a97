#pragma once

#include "boolean.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "estimate.hpp"
#include "exact.hpp"
#include "geometry.hpp"
#include "grains.hpp"
#include "intensity.hpp"
#include "minkowski.hpp"
#include "numerics.hpp"
#include "poisson.hpp"
#include "random.hpp"

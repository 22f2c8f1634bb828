#pragma once

#include "kale/arcs.hpp"
#include "kale/errors.hpp"
#include "kale/generators.hpp"
#include "kale/geometry.hpp"
#include "kale/limits.hpp"
#include "kale/mean.hpp"
#include "kale/measure.hpp"
#include "kale/montecarlo.hpp"
#include "kale/random.hpp"

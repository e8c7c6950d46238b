#pragma once

#include "pacbound/bounds.hpp"
#include "pacbound/core.hpp"
#include "pacbound/experiments.hpp"
#include "pacbound/gaussian.hpp"
#include "pacbound/optimize.hpp"
#include "pacbound/rng.hpp"

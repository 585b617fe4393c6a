#pragma once

#include "polybreak/asymptotics.hpp"
#include "polybreak/empirical.hpp"
#include "polybreak/errors.hpp"
#include "polybreak/limitlab.hpp"
#include "polybreak/linalg.hpp"
#include "polybreak/parallel.hpp"
#include "polybreak/regression.hpp"
#include "polybreak/rng.hpp"
#include "polybreak/scan.hpp"
#include "polybreak/simulate.hpp"

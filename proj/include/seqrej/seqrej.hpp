#pragma once

// Sequentially rejective multiple-testing toolkit: umbrella include.

#include "index_set.hpp"
#include "universe.hpp"
#include "logic.hpp"
#include "schedule.hpp"
#include "checks.hpp"
#include "procedures.hpp"
#include "admissibility.hpp"
#include "local_tests.hpp"
#include "closure.hpp"
#include "stepup.hpp"
#include "tree.hpp"
#include "rng.hpp"
#include "resampling.hpp"
#include "simulate.hpp"
#include "adjusted.hpp"

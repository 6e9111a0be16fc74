#pragma once

#include "mbsim/breakout.hpp"
#include "mbsim/config.hpp"
#include "mbsim/config_io.hpp"
#include "mbsim/corepath.hpp"
#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"
#include "mbsim/experiments.hpp"
#include "mbsim/metrics.hpp"
#include "mbsim/ran.hpp"
#include "mbsim/report.hpp"
#include "mbsim/rng.hpp"
#include "mbsim/simulation.hpp"
#include "mbsim/traffic.hpp"

#pragma once

#include "exogait/assist_profile.hpp"
#include "exogait/c3d_io.hpp"
#include "exogait/complexity.hpp"
#include "exogait/equivalence_stats.hpp"
#include "exogait/error.hpp"
#include "exogait/gait_cycle.hpp"
#include "exogait/gait_phase.hpp"
#include "exogait/preprocess.hpp"
#include "exogait/tension_loop.hpp"
#include "exogait/trial.hpp"

#pragma once

#include "semcom/errors.hpp"
#include "semcom/core_model.hpp"
#include "semcom/rng.hpp"
#include "semcom/scenario.hpp"
#include "semcom/p3_solver.hpp"
#include "semcom/p4_types.hpp"
#include "semcom/p4_solver.hpp"
#include "semcom/time_split.hpp"
#include "semcom/kkt.hpp"
#include "semcom/optimizer.hpp"
#include "semcom/baselines.hpp"
#include "semcom/oracle.hpp"
#include "semcom/experiment.hpp"
#include "semcom/config_json.hpp"
#include "semcom/validation.hpp"

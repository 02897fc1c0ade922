#pragma once

#include "hdmap/channel.hpp"
#include "hdmap/energy.hpp"
#include "hdmap/engine.hpp"
#include "hdmap/error.hpp"
#include "hdmap/feasibility.hpp"
#include "hdmap/metrics.hpp"
#include "hdmap/model.hpp"
#include "hdmap/scenario_io.hpp"
#include "hdmap/scheduler.hpp"
#include "hdmap/sweep.hpp"

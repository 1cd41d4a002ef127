#pragma once

#include "evflex/aggregate.hpp"
#include "evflex/battery.hpp"
#include "evflex/charge_sim.hpp"
#include "evflex/config.hpp"
#include "evflex/decision.hpp"
#include "evflex/digest.hpp"
#include "evflex/fleet_data.hpp"
#include "evflex/flex.hpp"
#include "evflex/io.hpp"
#include "evflex/pipeline.hpp"
#include "evflex/rng.hpp"
#include "evflex/run_config.hpp"
#include "evflex/synthetic.hpp"
#include "evflex/types.hpp"

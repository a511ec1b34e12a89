#pragma once

#include "cyborg/action_catalog.hpp"
#include "cyborg/agents.hpp"
#include "cyborg/checkpoint.hpp"
#include "cyborg/env.hpp"
#include "cyborg/errors.hpp"
#include "cyborg/fixtures.hpp"
#include "cyborg/harness.hpp"
#include "cyborg/mlp.hpp"
#include "cyborg/net.hpp"
#include "cyborg/permute.hpp"
#include "cyborg/random.hpp"
#include "cyborg/replay_buffer.hpp"
#include "cyborg/scenario.hpp"
#include "cyborg/scenario_yaml.hpp"
#include "cyborg/world.hpp"

#pragma once

#include "laserstate/scenarios/atom_interference.hpp"
#include "laserstate/scenarios/identities.hpp"
#include "laserstate/scenarios/phase_locking.hpp"
#include "laserstate/scenarios/result.hpp"
#include "laserstate/scenarios/squeezing.hpp"
#include "laserstate/scenarios/teleportation.hpp"
#include "laserstate/scenarios/tmss_entanglement.hpp"

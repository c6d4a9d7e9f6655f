#pragma once

#include "ecoroute/batch.hpp"
#include "ecoroute/cost.hpp"
#include "ecoroute/energy.hpp"
#include "ecoroute/event_queue.hpp"
#include "ecoroute/linklayer.hpp"
#include "ecoroute/metrics.hpp"
#include "ecoroute/mobility.hpp"
#include "ecoroute/node.hpp"
#include "ecoroute/packets.hpp"
#include "ecoroute/random.hpp"
#include "ecoroute/scenario.hpp"
#include "ecoroute/simulation.hpp"
#include "ecoroute/types.hpp"

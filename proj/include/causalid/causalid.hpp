#pragma once

#include "causalid/error.hpp"
#include "causalid/estimand.hpp"
#include "causalid/graph.hpp"
#include "causalid/graph_io.hpp"
#include "causalid/identify.hpp"
#include "causalid/joint.hpp"
#include "causalid/oracle.hpp"
#include "causalid/rng.hpp"

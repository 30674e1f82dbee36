#pragma once

#include "gr1/corridor.hpp"
#include "gr1/expr.hpp"
#include "gr1/game.hpp"
#include "gr1/parser.hpp"
#include "gr1/refinement_tree.hpp"
#include "gr1/simulator.hpp"
#include "gr1/solver.hpp"
#include "gr1/spec.hpp"
#include "gr1/spec_json.hpp"
#include "gr1/strategy.hpp"
#include "gr1/transition_system.hpp"
#include "gr1/var_space.hpp"
#include "gr1/verify.hpp"

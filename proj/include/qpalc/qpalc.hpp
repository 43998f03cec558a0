#pragma once

#include "qpalc/bisim.hpp"
#include "qpalc/error.hpp"
#include "qpalc/formula.hpp"
#include "qpalc/harness.hpp"
#include "qpalc/io.hpp"
#include "qpalc/kripke.hpp"
#include "qpalc/parser.hpp"
#include "qpalc/semantics.hpp"
#include "qpalc/state_set.hpp"
#include "qpalc/tiling.hpp"

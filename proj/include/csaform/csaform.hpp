#pragma once

#include "error.hpp"
#include "formula.hpp"
#include "sexp.hpp"
#include "simulate.hpp"
#include "encoding.hpp"
#include "blocks.hpp"
#include "verify.hpp"
#include "expr.hpp"
#include "cost_system.hpp"
#include "optimize.hpp"
#include "level_plan.hpp"
#include "builder.hpp"

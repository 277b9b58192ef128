#pragma once

#include "dfls/core.hpp"
#include "dfls/criticality.hpp"
#include "dfls/diagnostics.hpp"
#include "dfls/line_search.hpp"
#include "dfls/problems.hpp"
#include "dfls/solver.hpp"
#include "dfls/trace_io.hpp"

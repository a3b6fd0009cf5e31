#pragma once

#include "virtdyn/analysis.hpp"
#include "virtdyn/compensated.hpp"
#include "virtdyn/convergence.hpp"
#include "virtdyn/error.hpp"
#include "virtdyn/newtonian.hpp"
#include "virtdyn/quadrature.hpp"
#include "virtdyn/recurrence.hpp"

// qfdr.hpp - everything in one include.

#pragma once

#include "qfdr/errors.hpp"
#include "qfdr/operators.hpp"
#include "qfdr/quadrature.hpp"
#include "qfdr/parallel.hpp"
#include "qfdr/lindblad.hpp"
#include "qfdr/slow_driving.hpp"
#include "qfdr/exact_dynamics.hpp"
#include "qfdr/geometry.hpp"
#include "qfdr/models.hpp"
#include "qfdr/config.hpp"
#include "qfdr/results.hpp"
#include "qfdr/experiments.hpp"

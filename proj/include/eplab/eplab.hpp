#pragma once

#include "eplab/characteristics.hpp"
#include "eplab/csv.hpp"
#include "eplab/error.hpp"
#include "eplab/fields.hpp"
#include "eplab/floquet.hpp"
#include "eplab/ode.hpp"
#include "eplab/parallel.hpp"
#include "eplab/phase.hpp"
#include "eplab/simplewave.hpp"

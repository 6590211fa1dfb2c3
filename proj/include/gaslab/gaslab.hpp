#pragma once

#include "gaslab/grid.hpp"
#include "gaslab/fft.hpp"
#include "gaslab/field.hpp"
#include "gaslab/field_io.hpp"
#include "gaslab/euler.hpp"
#include "gaslab/families.hpp"
#include "gaslab/solver.hpp"
#include "gaslab/inequalities.hpp"
#include "gaslab/lab.hpp"

#pragma once

#include "fbmhd/errors.hpp"
#include "fbmhd/field.hpp"
#include "fbmhd/grid.hpp"
#include "fbmhd/jet.hpp"
#include "fbmhd/tensor.hpp"
#include "fbmhd/state.hpp"
#include "fbmhd/dynamics.hpp"
#include "fbmhd/initdata.hpp"
#include "fbmhd/norms.hpp"
#include "fbmhd/goodunknown.hpp"
#include "fbmhd/diagnostics.hpp"
#include "fbmhd/config.hpp"
#include "fbmhd/io.hpp"
#include "fbmhd/verify.hpp"
#include "fbmhd/cli.hpp"

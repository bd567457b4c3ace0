#pragma once

#include "snum/errors.hpp"
#include "snum/params.hpp"
#include "snum/classify.hpp"
#include "snum/widths.hpp"
#include "snum/subspace_oracle.hpp"
#include "snum/blocks.hpp"
#include "snum/ideal_norm.hpp"
#include "snum/assembly.hpp"
#include "snum/rate_fit.hpp"
#include "snum/io.hpp"

#pragma once

// Umbrella header for the numerical core. JSON/CSV helpers live in
// ptrguard/io.hpp and need nlohmann/json.

#include "ptrguard/error.hpp"
#include "ptrguard/field.hpp"
#include "ptrguard/modes.hpp"
#include "ptrguard/numeric.hpp"
#include "ptrguard/perturb.hpp"
#include "ptrguard/potential.hpp"
#include "ptrguard/ptrs.hpp"
#include "ptrguard/roots.hpp"
#include "ptrguard/transfer.hpp"

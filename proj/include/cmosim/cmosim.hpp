#pragma once

// Umbrella header for the CMO Monte Carlo pricing library.

#include "cmosim/cashflow.hpp"
#include "cmosim/credit.hpp"
#include "cmosim/deal.hpp"
#include "cmosim/deal_parser.hpp"
#include "cmosim/normal.hpp"
#include "cmosim/prepay.hpp"
#include "cmosim/pricer.hpp"
#include "cmosim/rate_model.hpp"
#include "cmosim/report.hpp"
#include "cmosim/rng.hpp"
#include "cmosim/stats.hpp"

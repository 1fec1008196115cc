#pragma once

#include "valuebet/backtest.hpp"
#include "valuebet/baseline.hpp"
#include "valuebet/calibration.hpp"
#include "valuebet/core_model.hpp"
#include "valuebet/csv.hpp"
#include "valuebet/error.hpp"
#include "valuebet/feed.hpp"
#include "valuebet/market_data.hpp"
#include "valuebet/replay.hpp"
#include "valuebet/report_io.hpp"
#include "valuebet/rng.hpp"
#include "valuebet/scanner.hpp"
#include "valuebet/synthetic.hpp"
#include "valuebet/time.hpp"

#pragma once

#include "p2pclear/decimal.hpp"
#include "p2pclear/orderbook.hpp"
#include "p2pclear/clearing.hpp"
#include "p2pclear/mechanisms.hpp"
#include "p2pclear/metrics.hpp"
#include "p2pclear/runner.hpp"
#include "p2pclear/io.hpp"

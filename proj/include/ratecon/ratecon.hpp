#ifndef RATECON_RATECON_HPP
#define RATECON_RATECON_HPP

#include "ratecon/adequacy.hpp"
#include "ratecon/core.hpp"
#include "ratecon/io.hpp"
#include "ratecon/majorization.hpp"
#include "ratecon/market.hpp"
#include "ratecon/oracle.hpp"
#include "ratecon/portfolio.hpp"
#include "ratecon/realtime.hpp"

#endif

#pragma once

#include "tsnzeek/bus.hpp"
#include "tsnzeek/bytes.hpp"
#include "tsnzeek/config.hpp"
#include "tsnzeek/detector.hpp"
#include "tsnzeek/ledger.hpp"
#include "tsnzeek/monitor.hpp"
#include "tsnzeek/notice.hpp"
#include "tsnzeek/notice_log.hpp"
#include "tsnzeek/pcap.hpp"
#include "tsnzeek/recovery.hpp"
#include "tsnzeek/replay.hpp"
#include "tsnzeek/rolling_stats.hpp"
#include "tsnzeek/routes.hpp"
#include "tsnzeek/scenario.hpp"
#include "tsnzeek/truth.hpp"
#include "tsnzeek/wire.hpp"

#pragma once

// Umbrella header.

#include "seats/archive.hpp"
#include "seats/compare.hpp"
#include "seats/config.hpp"
#include "seats/generation.hpp"
#include "seats/journal.hpp"
#include "seats/landscape.hpp"
#include "seats/mock_generators.hpp"
#include "seats/orchestrator.hpp"
#include "seats/prompt.hpp"
#include "seats/remote_generator.hpp"
#include "seats/report.hpp"
#include "seats/review.hpp"
#include "seats/reward.hpp"
#include "seats/runner.hpp"
#include "seats/sandbox.hpp"
#include "seats/schedule.hpp"
#include "seats/tree.hpp"
#include "seats/types.hpp"
#include "seats/util.hpp"

#pragma once

// Umbrella header for the offline parts of the library. The remote judge
// client lives in judge_client.hpp and is not pulled in here, since it drags
// an HTTP stack into every translation unit that includes it.

#include "tracekit/dataset.hpp"
#include "tracekit/errors.hpp"
#include "tracekit/grpo.hpp"
#include "tracekit/judge.hpp"
#include "tracekit/judge_prompt.hpp"
#include "tracekit/records.hpp"
#include "tracekit/rewards.hpp"
#include "tracekit/scoring.hpp"
#include "tracekit/stats.hpp"
#include "tracekit/text.hpp"
#include "tracekit/trace.hpp"

#ifndef LORADEX_LORADEX_HPP
#define LORADEX_LORADEX_HPP

#include "loradex/analytics/diversity.hpp"
#include "loradex/analytics/evaluation.hpp"
#include "loradex/analytics/scale_curve.hpp"
#include "loradex/analytics/screening.hpp"
#include "loradex/corpus.hpp"
#include "loradex/error.hpp"
#include "loradex/index.hpp"
#include "loradex/indexer.hpp"
#include "loradex/json_codec.hpp"
#include "loradex/prompts.hpp"
#include "loradex/provider.hpp"
#include "loradex/query.hpp"
#include "loradex/record_io.hpp"
#include "loradex/vector_math.hpp"

#endif  // LORADEX_LORADEX_HPP

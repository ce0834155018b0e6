#pragma once

#include "pennysort/bench.hpp"
#include "pennysort/block_io.hpp"
#include "pennysort/bounded_queue.hpp"
#include "pennysort/compare.hpp"
#include "pennysort/error.hpp"
#include "pennysort/line.hpp"
#include "pennysort/loser_tree.hpp"
#include "pennysort/metrics.hpp"
#include "pennysort/plan.hpp"
#include "pennysort/quicksort.hpp"
#include "pennysort/recgen.hpp"
#include "pennysort/sort.hpp"

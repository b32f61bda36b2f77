#pragma once

#include "slgen/random.hpp"
#include "slgen/error.hpp"
#include "slgen/params.hpp"
#include "slgen/grammar.hpp"
#include "slgen/grammar_gen.hpp"
#include "slgen/derivation.hpp"
#include "slgen/temporal.hpp"
#include "slgen/format.hpp"
#include "slgen/corpus.hpp"
#include "slgen/eval.hpp"

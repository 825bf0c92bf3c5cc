#pragma once

#include "seqgen/artifact.hpp"
#include "seqgen/contract.hpp"
#include "seqgen/engine.hpp"
#include "seqgen/executor.hpp"
#include "seqgen/registry.hpp"
#include "seqgen/replay.hpp"
#include "seqgen/report.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/sequence.hpp"
#include "seqgen/shrink.hpp"
#include "seqgen/value.hpp"
#include "seqgen/verdict.hpp"

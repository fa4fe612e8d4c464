#pragma once

#include "pbnlc/channel/amplifier.hpp"
#include "pbnlc/channel/fiber.hpp"
#include "pbnlc/channel/wdm.hpp"
#include "pbnlc/coeffs/coefficients.hpp"
#include "pbnlc/coeffs/conv.hpp"
#include "pbnlc/complexity/complexity.hpp"
#include "pbnlc/core/fft.hpp"
#include "pbnlc/core/filters.hpp"
#include "pbnlc/core/hash.hpp"
#include "pbnlc/core/types.hpp"
#include "pbnlc/defaults.hpp"
#include "pbnlc/fnn/apply.hpp"
#include "pbnlc/fnn/network.hpp"
#include "pbnlc/fnn/train.hpp"
#include "pbnlc/harness/config.hpp"
#include "pbnlc/harness/pipeline.hpp"
#include "pbnlc/harness/results.hpp"
#include "pbnlc/harness/runner.hpp"
#include "pbnlc/io/persist.hpp"
#include "pbnlc/nlc/engines.hpp"
#include "pbnlc/nlc/kmeans.hpp"
#include "pbnlc/nlc/ls.hpp"
#include "pbnlc/triplets/compute.hpp"
#include "pbnlc/triplets/triplet_set.hpp"
#include "pbnlc/txrx/config.hpp"
#include "pbnlc/txrx/cpr.hpp"
#include "pbnlc/txrx/equalizer.hpp"
#include "pbnlc/txrx/metrics.hpp"
#include "pbnlc/txrx/qam.hpp"
#include "pbnlc/txrx/transceiver.hpp"
#include "pbnlc/verify/oracles.hpp"

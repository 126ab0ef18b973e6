// Umbrella header.
#pragma once

#include "rdlab/core.hpp"
#include "rdlab/dataset.hpp"
#include "rdlab/detection_metrics.hpp"
#include "rdlab/evaluation.hpp"
#include "rdlab/fft.hpp"
#include "rdlab/link_budget.hpp"
#include "rdlab/mitigation.hpp"
#include "rdlab/plot_export.hpp"
#include "rdlab/radar_config.hpp"
#include "rdlab/rd_pipeline.hpp"
#include "rdlab/rdc_format.hpp"
#include "rdlab/rng.hpp"
#include "rdlab/signal_model.hpp"
#include "rdlab/sinr_scaling.hpp"

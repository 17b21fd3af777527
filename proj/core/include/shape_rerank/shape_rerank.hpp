#pragma once

#include "shape_rerank/candidate_set.hpp"
#include "shape_rerank/database.hpp"
#include "shape_rerank/descriptor.hpp"
#include "shape_rerank/errors.hpp"
#include "shape_rerank/eval.hpp"
#include "shape_rerank/feature_index.hpp"
#include "shape_rerank/kd_tree3.hpp"
#include "shape_rerank/metrics.hpp"
#include "shape_rerank/parallel.hpp"
#include "shape_rerank/pipeline.hpp"
#include "shape_rerank/point_cloud.hpp"
#include "shape_rerank/point_cloud_io.hpp"
#include "shape_rerank/synthetic.hpp"

#pragma once

#include "egsmooth/ball_tree.hpp"
#include "egsmooth/dataset.hpp"
#include "egsmooth/embedding.hpp"
#include "egsmooth/error.hpp"
#include "egsmooth/graph.hpp"
#include "egsmooth/index.hpp"
#include "egsmooth/lexical.hpp"
#include "egsmooth/metrics.hpp"
#include "egsmooth/parallel.hpp"
#include "egsmooth/predicate.hpp"
#include "egsmooth/qa.hpp"
#include "egsmooth/sentence.hpp"
#include "egsmooth/smoother.hpp"
#include "egsmooth/wordnet.hpp"

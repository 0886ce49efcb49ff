#pragma once

#include "qsd/binarize.hpp"
#include "qsd/encoding.hpp"
#include "qsd/error.hpp"
#include "qsd/evaluate.hpp"
#include "qsd/hybrid.hpp"
#include "qsd/nslkdd.hpp"
#include "qsd/pipeline.hpp"
#include "qsd/qaoa.hpp"
#include "qsd/qubo.hpp"
#include "qsd/search.hpp"
#include "qsd/stats.hpp"
#include "qsd/subgroup.hpp"
#include "qsd/synthetic.hpp"

#pragma once

#include "nnrank/scalar.hpp"
#include "nnrank/tensor.hpp"
#include "nnrank/linalg.hpp"
#include "nnrank/tensor_ops.hpp"
#include "nnrank/decomposition.hpp"
#include "nnrank/supermodular.hpp"
#include "nnrank/rank2.hpp"
#include "nnrank/tree.hpp"
#include "nnrank/case_studies.hpp"
#include "nnrank/io.hpp"

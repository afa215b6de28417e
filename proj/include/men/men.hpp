#pragma once

#include "men/alignment.hpp"
#include "men/common.hpp"
#include "men/config.hpp"
#include "men/eval.hpp"
#include "men/indicator.hpp"
#include "men/io.hpp"
#include "men/lars.hpp"
#include "men/model_io.hpp"
#include "men/pca.hpp"
#include "men/pipeline.hpp"
#include "men/synthetic.hpp"
#include "men/transform.hpp"

#pragma once

#include "grapheye/ast.hpp"
#include "grapheye/cpg.hpp"
#include "grapheye/datakit.hpp"
#include "grapheye/gcgat.hpp"
#include "grapheye/json_io.hpp"
#include "grapheye/lexer.hpp"
#include "grapheye/linalg.hpp"
#include "grapheye/parser.hpp"
#include "grapheye/pipeline.hpp"
#include "grapheye/veccpg.hpp"

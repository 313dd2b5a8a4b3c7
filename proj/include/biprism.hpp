#pragma once

#include "biprism/defeq.hpp"
#include "biprism/forcing.hpp"
#include "biprism/interpretation.hpp"
#include "biprism/io.hpp"
#include "biprism/logic.hpp"
#include "biprism/prover.hpp"
#include "biprism/report.hpp"
#include "biprism/structure.hpp"
#include "biprism/symmetry.hpp"
#include "biprism/syntax.hpp"
#include "biprism/toy.hpp"

#pragma once

#include "emrec/candidates.hpp"
#include "emrec/commands.hpp"
#include "emrec/dataset.hpp"
#include "emrec/error.hpp"
#include "emrec/evaluation.hpp"
#include "emrec/features.hpp"
#include "emrec/fixtures.hpp"
#include "emrec/gbdt.hpp"
#include "emrec/java_model.hpp"
#include "emrec/java_parser.hpp"
#include "emrec/lexer.hpp"
#include "emrec/name_provider.hpp"
#include "emrec/naming.hpp"
#include "emrec/recommender.hpp"
#include "emrec/remote_naming.hpp"
#include "emrec/rng.hpp"
#include "emrec/serialization.hpp"

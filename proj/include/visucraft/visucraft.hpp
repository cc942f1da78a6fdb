#pragma once

#include "visucraft/backend.hpp"
#include "visucraft/config.hpp"
#include "visucraft/errors.hpp"
#include "visucraft/extractor.hpp"
#include "visucraft/harness.hpp"
#include "visucraft/http_client.hpp"
#include "visucraft/lexicon.hpp"
#include "visucraft/metrics.hpp"
#include "visucraft/prompt.hpp"
#include "visucraft/svi.hpp"
#include "visucraft/text.hpp"

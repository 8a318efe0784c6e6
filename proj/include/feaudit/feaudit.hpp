#pragma once

#include "feaudit/audit.hpp"
#include "feaudit/constraints.hpp"
#include "feaudit/core.hpp"
#include "feaudit/element.hpp"
#include "feaudit/loads.hpp"
#include "feaudit/mesh.hpp"
#include "feaudit/model.hpp"
#include "feaudit/reactions.hpp"
#include "feaudit/system.hpp"

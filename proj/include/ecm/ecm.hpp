#pragma once

#include "ecm/error.hpp"
#include "ecm/geometry.hpp"
#include "ecm/materials.hpp"
#include "ecm/mixture.hpp"
#include "ecm/mesh.hpp"
#include "ecm/field.hpp"
#include "ecm/dissolution.hpp"
#include "ecm/cathode.hpp"
#include "ecm/driver.hpp"
#include "ecm/presets.hpp"
#include "ecm/config.hpp"
#include "ecm/output.hpp"
#include "ecm/verify.hpp"

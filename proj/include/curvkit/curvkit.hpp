#pragma once

#include "curvkit/atoms.hpp"
#include "curvkit/common.hpp"
#include "curvkit/connection.hpp"
#include "curvkit/domain.hpp"
#include "curvkit/field.hpp"
#include "curvkit/forms.hpp"
#include "curvkit/identities.hpp"
#include "curvkit/io.hpp"
#include "curvkit/lax.hpp"
#include "curvkit/random_fields.hpp"
#include "curvkit/report.hpp"
#include "curvkit/rng.hpp"
#include "curvkit/sim.hpp"
#include "curvkit/verify.hpp"
#include "curvkit/version.hpp"

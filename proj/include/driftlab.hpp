#pragma once

#include "driftlab/bounds.hpp"
#include "driftlab/catalog.hpp"
#include "driftlab/certified.hpp"
#include "driftlab/commands.hpp"
#include "driftlab/forms.hpp"
#include "driftlab/gauduchon.hpp"
#include "driftlab/hermitian.hpp"
#include "driftlab/krylov.hpp"
#include "driftlab/quadrature.hpp"
#include "driftlab/report.hpp"
#include "driftlab/riemann.hpp"
#include "driftlab/spectral.hpp"
#include "driftlab/tensor.hpp"
#include "driftlab/verify.hpp"

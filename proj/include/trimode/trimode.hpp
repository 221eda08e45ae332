#ifndef TRIMODE_TRIMODE_HPP
#define TRIMODE_TRIMODE_HPP

#include "trimode/error.hpp"
#include "trimode/model.hpp"
#include "trimode/dop853.hpp"
#include "trimode/dynamics.hpp"
#include "trimode/parallel.hpp"
#include "trimode/chaos.hpp"
#include "trimode/quantum.hpp"
#include "trimode/spectral.hpp"
#include "trimode/twa.hpp"
#include "trimode/io.hpp"

#endif  // TRIMODE_TRIMODE_HPP

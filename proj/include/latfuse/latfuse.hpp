#pragma once

// Umbrella header for the latent-space semantics and heredity-fusion toolkit.

#include "latfuse/bias_analysis.hpp"
#include "latfuse/direction.hpp"
#include "latfuse/errors.hpp"
#include "latfuse/estimator.hpp"
#include "latfuse/fusion.hpp"
#include "latfuse/genetics.hpp"
#include "latfuse/io.hpp"
#include "latfuse/landmarks.hpp"
#include "latfuse/latent_code.hpp"
#include "latfuse/oracle.hpp"
#include "latfuse/orthogonalize.hpp"
#include "latfuse/quadrature.hpp"
#include "latfuse/rng.hpp"

#pragma once

#include "dcvae/adam.hpp"
#include "dcvae/autodiff.hpp"
#include "dcvae/checkpoint.hpp"
#include "dcvae/config.hpp"
#include "dcvae/data.hpp"
#include "dcvae/error.hpp"
#include "dcvae/eval.hpp"
#include "dcvae/gradcheck.hpp"
#include "dcvae/layers.hpp"
#include "dcvae/losses.hpp"
#include "dcvae/model.hpp"
#include "dcvae/pairing.hpp"
#include "dcvae/probe.hpp"
#include "dcvae/report.hpp"
#include "dcvae/rng.hpp"
#include "dcvae/synth.hpp"
#include "dcvae/tensor.hpp"
#include "dcvae/training.hpp"
#include "dcvae/verify.hpp"

#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/conditioning.hpp"
#include "ptycho/inversion.hpp"
#include "ptycho/io.hpp"
#include "ptycho/masks.hpp"
#include "ptycho/operator.hpp"
#include "ptycho/recovery.hpp"
#include "ptycho/rng.hpp"
#include "ptycho/selftest.hpp"
#include "ptycho/structure.hpp"
#include "ptycho/types.hpp"

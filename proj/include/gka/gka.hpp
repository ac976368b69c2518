#pragma once

#include "gka/attacks.hpp"
#include "gka/codec.hpp"
#include "gka/crypto.hpp"
#include "gka/errors.hpp"
#include "gka/field.hpp"
#include "gka/harness.hpp"
#include "gka/protocol.hpp"
#include "gka/util.hpp"

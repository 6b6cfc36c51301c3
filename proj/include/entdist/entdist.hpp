#pragma once

#include "entdist/certificate.hpp"
#include "entdist/measures.hpp"
#include "entdist/protocol.hpp"
#include "entdist/random.hpp"
#include "entdist/report.hpp"
#include "entdist/sdp.hpp"
#include "entdist/states.hpp"
#include "entdist/tensor.hpp"

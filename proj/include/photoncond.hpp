#ifndef PHOTONCOND_HPP
#define PHOTONCOND_HPP

#include "photoncond/errors.hpp"
#include "photoncond/operator_core.hpp"
#include "photoncond/matter_models.hpp"
#include "photoncond/gauge.hpp"
#include "photoncond/bogoliubov.hpp"
#include "photoncond/response.hpp"
#include "photoncond/criterion.hpp"
#include "photoncond/oracle.hpp"
#include "photoncond/config.hpp"
#include "photoncond/sweep.hpp"

#endif // PHOTONCOND_HPP

#pragma once

// Umbrella header for the tsop toolchain.

#include <tsop/automaton.hpp>
#include <tsop/automaton_io.hpp>
#include <tsop/codegen.hpp>
#include <tsop/object_spec.hpp>
#include <tsop/protocol.hpp>
#include <tsop/runtime.hpp>
#include <tsop/semantics.hpp>
#include <tsop/simulator.hpp>
#include <tsop/value.hpp>
#include <tsop/violation.hpp>

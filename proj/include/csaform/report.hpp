/*!
  \file report.hpp
  \brief JSON records for verification, analysis and construction results

  Every floating-point value passes through `json_number`, which keeps ten
  significant digits, so dumps are stable across platforms that agree on
  the underlying computation.
*/

#pragma once

#include "blocks.hpp"
#include "builder.hpp"
#include "cost_system.hpp"
#include "level_plan.hpp"
#include "optimize.hpp"
#include "sexp.hpp"
#include "verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace csaform
{

using json = nlohmann::ordered_json;

inline constexpr int report_digits = 10;

/*! \brief Rounds to ten significant digits; non-finite values become null. */
inline json json_number( double x )
{
  if ( !std::isfinite( x ) )
    return nullptr;
  char buf[64];
  std::snprintf( buf, sizeof( buf ), "%.*g", report_digits, x );
  return std::strtod( buf, nullptr );
}

inline json json_numbers( std::vector<double> const& xs )
{
  auto a = json::array();
  for ( auto x : xs )
    a.push_back( json_number( x ) );
  return a;
}

inline json to_json( slot const& s )
{
  return { { "name", s.name }, { "encoding", to_string( s.enc ) }, { "significance", s.significance } };
}

inline json to_json( std::vector<slot> const& slots )
{
  auto a = json::array();
  for ( auto const& s : slots )
    a.push_back( to_json( s ) );
  return a;
}

inline json to_json( verification_report const& r )
{
  json j;
  j["block"] = r.block;
  j["decoded_inputs"] = r.decoded_inputs;
  j["assignments_checked"] = r.assignments_checked;
  j["exhaustive"] = r.exhaustive;
  j["passed"] = r.passed();
  j["failure_count"] = r.failure_count;
  auto f = json::array();
  for ( auto const& x : r.failures )
    f.push_back( { { "assignment", x.assignment },
                   { "input_sum", x.input_sum },
                   { "output_sum", x.output_sum },
                   { "invalid_codeword", x.invalid_codeword } } );
  j["failures"] = f;
  return j;
}

/*! \brief Catalog entry: slots, identity, leaf matrix and templates in `.sexp` form. */
inline json catalog_entry( block_spec const& b )
{
  json j;
  j["name"] = b.name;
  j["basis"] = to_string( b.base );
  j["inputs"] = to_json( b.inputs );
  j["outputs"] = to_json( b.outputs );
  j["identity"] = b.arithmetic ? json( b.identity() ) : json( nullptr );
  j["input_components"] = component_names( b.inputs );
  auto const names = component_names( b.outputs );
  auto t = json::array();
  for ( std::size_t i = 0; i < b.templates.size(); ++i )
    t.push_back( { { "output", names[i] }, { "leaves", b.templates[i].leaf_count() }, { "sexp", render_sexp( b.templates[i] ) } } );
  j["templates"] = t;
  j["leaf_matrix"] = leaf_matrix_of( b ).entries;
  return j;
}

inline json to_json( param_set const& ps )
{
  json j;
  j["name"] = ps.name;
  j["p"] = json_number( ps.p );
  j["inverse_p"] = json_number( 1.0 / ps.p );
  j["alpha"] = ps.alpha ? json_number( *ps.alpha ) : json( nullptr );
  json w = json::object();
  for ( auto const& [k, v] : ps.weights )
    w[k] = json_number( v );
  j["weights"] = w;
  if ( ps.nu )
    j["nu"] = json_number( *ps.nu );
  return j;
}

inline json to_json( margins const& m )
{
  json j;
  j["feasible"] = m.feasible;
  j["epsilon"] = json_number( m.epsilon );
  j["min_margin"] = json_number( m.min_margin() );
  auto t = json::array();
  for ( auto const& x : m.types )
    t.push_back( { { "type", x.type },
                   { "inputs", json_number( x.inputs ) },
                   { "outputs", json_number( x.outputs ) },
                   { "margin", json_number( x.margin ) } } );
  j["types"] = t;
  json b = json::object();
  for ( auto const& [k, v] : m.bounds )
    b[k] = json_number( v );
  j["bounds"] = b;
  return j;
}

inline json to_json( optimize_result const& r )
{
  json j;
  j["certified"] = r.certified;
  if ( r.certified )
  {
    j["p"] = json_number( r.params.p );
    j["inverse_p"] = json_number( 1.0 / r.params.p );
    j["params"] = to_json( r.params );
    j["margins"] = to_json( r.at_optimum );
  }
  j["bisection_steps"] = r.bisection_steps;
  j["evaluations"] = r.evaluations;
  j["above_certified"] = r.above_certified;
  return j;
}

inline json to_json( matrix_result const& r, bool bits )
{
  json j;
  j["certified"] = r.certified;
  if ( r.certified )
  {
    j["p"] = json_number( r.p );
    j["inverse_p"] = json_number( 1.0 / r.p );
    if ( bits )
    {
      j["nu"] = json_number( r.nu );
      j["symmetric_exponent"] = json_number( 1.0 + 1.0 / r.p );
      j["a"] = json_numbers( r.a );
    }
    j["weights"] = json_numbers( r.weights );
    j["margins"] = json_numbers( r.margins );
  }
  j["bisection_steps"] = r.bisection_steps;
  j["evaluations"] = r.evaluations;
  j["above_certified"] = r.above_certified;
  return j;
}

inline json to_json( level_plan const& p )
{
  json j;
  j["p"] = json_number( p.p );
  j["grid_index"] = p.grid_index;
  j["lambda"] = json_number( p.lambda );
  j["shift"] = p.shift;
  j["n"] = p.n;
  j["c"] = json_number( p.c );
  j["top_level"] = p.top_level;
  j["max_output_level"] = p.max_output_level;
  j["exact_supply"] = p.exact_supply;
  j["size_bound"] = json_number( p.size_bound );
  j["total_instances_estimate"] = p.total_instances_estimate;
  auto t = json::array();
  for ( auto const& x : p.types )
    t.push_back( { { "type", x.name },
                   { "input_levels", x.input_levels },
                   { "output_levels", x.output_levels },
                   { "margin", json_number( x.margin ) },
                   { "raw_margin", json_number( x.raw_margin ) },
                   { "continuous_margin", json_number( x.continuous_margin ) },
                   { "free_inputs", json_number( x.free_inputs ) } } );
  j["types"] = t;
  j["counts"] = p.counts.empty() ? json( nullptr ) : json( p.counts );
  return j;
}

inline json to_json( build_options const& o )
{
  return { { "basis", to_string( o.base ) },
           { "csa", o.composite_name() },
           { "threshold", o.threshold },
           { "schedule", o.schedule == schedule_order::rounds ? "rounds" : "lowest-significance" },
           { "seed", o.seed } };
}

inline json to_json( build_stats const& s )
{
  return { { "applications", s.applications },
           { "encoder_uses", s.encoder_uses },
           { "padded_slots", s.padded_slots },
           { "decoded_items", s.decoded_items },
           { "final_adders", s.final_adders },
           { "closure", s.closure } };
}

inline json to_json( oracle_report const& r )
{
  return { { "passed", r.passed() },
           { "exhaustive", r.exhaustive },
           { "checked", r.checked },
           { "mismatches", r.mismatches },
           { "first_mismatch", r.first_mismatch ? json( *r.first_mismatch ) : json( nullptr ) } };
}

inline json to_json( growth_report const& g )
{
  json j;
  j["options"] = to_json( g.options );
  j["bit"] = g.bit ? json( *g.bit ) : json( "top" );
  auto rows = json::array();
  for ( auto const& r : g.rows )
    rows.push_back( { { "n", r.n }, { "bit", r.bit }, { "leaves", r.leaves } } );
  j["rows"] = rows;
  j["slope"] = json_number( g.slope );
  j["intercept"] = json_number( g.intercept );
  j["residual"] = json_number( g.residual );
  j["monotonicity_violations"] = g.monotonicity_violations;
  return j;
}

} // namespace csaform

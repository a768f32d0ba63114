/*!
  \file level_plan.hpp
  \brief Discretization of balance certificates into integer levels and per-level CSA counts
*/

#pragma once

#include "cost_system.hpp"
#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace csaform
{

/*! \brief Input and output sizes of one encoding type. */
struct level_type
{
  std::string name;
  std::vector<double> inputs;
  std::vector<double> outputs;
};

struct level_type_plan
{
  std::string name;
  std::vector<int64_t> input_levels;
  std::vector<int64_t> output_levels;
  /*! \brief sum lambda^dX - sum lambda^dY on the shifted levels. */
  double margin{ 0.0 };
  /*! \brief The same sum before shifting; never larger than `continuous_margin`. */
  double raw_margin{ 0.0 };
  double continuous_margin{ 0.0 };
  /*! \brief Free input slots (exact) or a lower bound on them. */
  double free_inputs{ 0.0 };
};

struct level_plan
{
  double p{ 0.0 };
  unsigned grid_index{ 0 };
  double lambda{ 2.0 };
  int64_t shift{ 0 };
  std::vector<level_type_plan> types;

  uint64_t n{ 1 };
  double c{ 1.0 };
  int64_t top_level{ 0 };
  int64_t max_output_level{ 0 };
  bool exact_supply{ true };
  /*! \brief Listed only when there are at most `max_listed_levels` levels. */
  std::vector<uint64_t> counts;
  uint64_t total_instances_estimate{ 0 };
  double size_bound{ 1.0 };

  uint64_t count( int64_t k ) const
  {
    if ( k < 0 || k > top_level )
      return 0;
    auto const x = static_cast<long double>( c ) * static_cast<long double>( n ) *
                   std::pow( static_cast<long double>( lambda ), -static_cast<long double>( k ) );
    return static_cast<uint64_t>( std::ceil( x * ( 1.0L - 1e-12L ) ) );
  }
};

struct plan_options
{
  unsigned max_grid_index{ 40 };
  int64_t max_simulated_levels{ int64_t{ 1 } << 20 };
  std::size_t max_listed_levels{ 4096 };
  unsigned max_c_exponent{ 62 };
};

namespace detail
{

inline int64_t floor_level( double size, double p, double log_lambda )
{
  auto d = static_cast<int64_t>( std::floor( p * std::log( size ) / log_lambda ) );
  while ( std::exp( static_cast<double>( d ) * log_lambda / p ) > size )
    --d;
  return d;
}

inline int64_t ceil_level( double size, double p, double log_lambda )
{
  auto d = static_cast<int64_t>( std::ceil( p * std::log( size ) / log_lambda ) );
  while ( std::exp( static_cast<double>( d ) * log_lambda / p ) < size )
    ++d;
  return d;
}

inline double level_power_sum( std::vector<int64_t> const& levels, double log_lambda )
{
  double s = 0.0;
  for ( auto d : levels )
    s += std::exp( static_cast<double>( d ) * log_lambda );
  return s;
}

/*! \brief sum_{k=a}^{b} x r^-k for r > 1, clipped to [0, top]. */
inline double geometric_sum( double x, double log_lambda, int64_t a, int64_t b, int64_t top )
{
  a = std::max<int64_t>( a, 0 );
  b = std::min( b, top );
  if ( a > b )
    return 0.0;
  auto const terms = static_cast<double>( b - a + 1 );
  auto const first = x * std::exp( -static_cast<double>( a ) * log_lambda );
  return first * -std::expm1( -terms * log_lambda ) / -std::expm1( -log_lambda );
}

inline int64_t clipped_terms( int64_t a, int64_t b, int64_t top )
{
  a = std::max<int64_t>( a, 0 );
  b = std::min( b, top );
  return a > b ? 0 : b - a + 1;
}

inline void simulate_supply( level_plan& plan, plan_options const& opts )
{
  int64_t hi = 0;
  for ( auto const& t : plan.types )
  {
    for ( auto d : t.input_levels )
      hi = std::max( hi, d );
    for ( auto d : t.output_levels )
      hi = std::max( hi, d );
  }
  auto const levels = plan.top_level + hi + 1;
  plan.exact_supply = levels <= opts.max_simulated_levels;
  if ( plan.exact_supply )
  {
    std::vector<double> counts( static_cast<std::size_t>( plan.top_level + 1 ) );
    for ( int64_t k = 0; k <= plan.top_level; ++k )
      counts[k] = static_cast<double>( plan.count( k ) );
    auto const at = [&]( int64_t k ) { return k < 0 || k > plan.top_level ? 0.0 : counts[k]; };
    for ( auto& t : plan.types )
    {
      t.free_inputs = 0.0;
      for ( int64_t l = 0; l < levels; ++l )
      {
        double f = 0.0;
        for ( auto d : t.input_levels )
          f += at( l - d );
        for ( auto d : t.output_levels )
          f -= at( l - d );
        t.free_inputs += std::max( 0.0, f );
      }
    }
    return;
  }
  // lower bound: free slots on levels [d, K] are at least the signed balance summed over that range
  auto const lo = plan.max_output_level, top = plan.top_level;
  auto const cn = plan.c * static_cast<double>( plan.n );
  auto const ll = std::log( plan.lambda );
  for ( auto& t : plan.types )
  {
    double s = 0.0;
    for ( auto d : t.input_levels )
      s += geometric_sum( cn, ll, lo - d, top - d, top );
    for ( auto d : t.output_levels )
      s -= geometric_sum( cn, ll, lo - d, top - d, top ) + static_cast<double>( clipped_terms( lo - d, top - d, top ) );
    t.free_inputs = std::max( 0.0, s );
  }
}

} // namespace detail

/*! \brief Input/output sizes per type of a cost system at a parameter set. */
inline std::vector<level_type> level_types( cost_system const& sys, param_set const& ps )
{
  auto const values = system_values( sys, ps );
  std::vector<level_type> types;
  for ( auto const& t : sys.types )
  {
    level_type lt;
    lt.name = t.name;
    for ( auto const& v : t.inputs )
      lt.inputs.push_back( values[sys.slot_of( v )] );
    for ( auto const& b : t.bounds )
      lt.outputs.push_back( b.rhs.eval( values ) );
    types.push_back( std::move( lt ) );
  }
  return types;
}

/*! \brief Column weights `X1..Xn` of a parameter set for a matrix. */
inline std::vector<double> matrix_weights( matrix_system const& ms, param_set const& ps )
{
  std::vector<double> x;
  for ( std::size_t c = 0; c < ms.cols(); ++c )
  {
    auto const key = "X" + std::to_string( c + 1 );
    auto it = ps.weights.find( key );
    if ( it == ps.weights.end() )
      throw lookup_error( "parameter set lacks matrix weight '" + key + "'" );
    if ( !( it->second > 0.0 ) )
      throw error( "weight '" + key + "' must be positive" );
    x.push_back( it->second );
  }
  return x;
}

inline std::vector<level_type> level_types( matrix_system const& ms, param_set const& ps )
{
  ms.validate();
  level_type lt;
  lt.name = ms.name.empty() ? "matrix" : ms.name;
  lt.inputs = matrix_weights( ms, ps );
  for ( auto const& row : ms.m )
  {
    double y = 0.0;
    for ( std::size_t c = 0; c < row.size(); ++c )
      y += row[c] * lt.inputs[c];
    lt.outputs.push_back( y );
  }
  return { lt };
}

/*! \brief Chooses lambda on the grid 1 + 2^-t, integer levels, and per-level CSA counts for n inputs. */
inline level_plan plan_levels( std::vector<level_type> const& types, double p, uint64_t n,
                               plan_options const& opts = {} )
{
  if ( !( p > 0.0 ) )
    throw error( "plan_levels: p must be positive" );
  if ( n == 0 )
    throw error( "plan_levels: n must be positive" );
  if ( types.empty() )
    throw error( "plan_levels: no types" );

  std::vector<double> continuous;
  std::size_t tightest = 0;
  for ( std::size_t j = 0; j < types.size(); ++j )
  {
    double m = 0.0;
    for ( auto x : types[j].inputs )
    {
      if ( !( x > 0.0 ) )
        throw error( "plan_levels: input sizes must be positive" );
      m += std::pow( x, p );
    }
    for ( auto y : types[j].outputs )
    {
      if ( !( y > 0.0 ) )
        throw error( "plan_levels: output sizes must be positive" );
      m -= std::pow( y, p );
    }
    continuous.push_back( m );
    if ( m < continuous[tightest] )
      tightest = j;
  }

  level_plan plan;
  plan.p = p;
  plan.n = n;
  bool found = false;
  for ( unsigned t = 0; t <= opts.max_grid_index && !found; ++t )
  {
    auto const ll = std::log1p( std::ldexp( 1.0, -static_cast<int>( t ) ) );
    std::vector<level_type_plan> tp;
    int64_t lowest = std::numeric_limits<int64_t>::max();
    for ( std::size_t j = 0; j < types.size(); ++j )
    {
      level_type_plan lp;
      lp.name = types[j].name;
      lp.continuous_margin = continuous[j];
      for ( auto x : types[j].inputs )
      {
        lp.input_levels.push_back( detail::floor_level( x, p, ll ) );
        lowest = std::min( lowest, lp.input_levels.back() );
      }
      for ( auto y : types[j].outputs )
        lp.output_levels.push_back( detail::ceil_level( y, p, ll ) );
      lp.raw_margin = detail::level_power_sum( lp.input_levels, ll ) - detail::level_power_sum( lp.output_levels, ll );
      tp.push_back( std::move( lp ) );
    }
    if ( lowest == std::numeric_limits<int64_t>::max() )
      lowest = 0;
    bool ok = true;
    for ( auto& lp : tp )
    {
      for ( auto& d : lp.input_levels )
        d -= lowest;
      for ( auto& d : lp.output_levels )
        d -= lowest;
      lp.margin = detail::level_power_sum( lp.input_levels, ll ) - detail::level_power_sum( lp.output_levels, ll );
      ok &= lp.margin > 0.0 && lp.raw_margin > 0.0;
    }
    if ( ok )
    {
      found = true;
      plan.grid_index = t;
      plan.lambda = std::exp( ll );
      plan.shift = -lowest;
      plan.types = std::move( tp );
    }
  }
  if ( !found )
  {
    std::ostringstream os;
    os << std::setprecision( 10 ) << "plan_levels: no lambda on the grid certifies; tightest margin is type "
       << types[tightest].name << " with " << continuous[tightest];
    throw not_certified_error( os.str() );
  }

  auto const ll = std::log( plan.lambda );
  plan.top_level = n == 1 ? 0 : static_cast<int64_t>( std::floor( std::log( static_cast<double>( n ) ) / ll + 1e-12 ) );
  plan.max_output_level = 0;
  for ( auto const& t : plan.types )
    for ( auto d : t.output_levels )
      plan.max_output_level = std::max( plan.max_output_level, d );

  bool supplied = false;
  for ( unsigned e = 0; e <= opts.max_c_exponent && !supplied; ++e )
  {
    plan.c = std::ldexp( 1.0, static_cast<int>( e ) );
    detail::simulate_supply( plan, opts );
    supplied = std::all_of( plan.types.begin(), plan.types.end(),
                            [&]( auto const& t ) { return t.free_inputs >= static_cast<double>( n ); } );
  }
  if ( !supplied )
    throw resource_error( "plan_levels: no power of two up to 2^" + std::to_string( opts.max_c_exponent ) +
                          " supplies " + std::to_string( n ) + " inputs" );

  if ( static_cast<std::size_t>( plan.top_level + 1 ) <= opts.max_listed_levels )
  {
    for ( int64_t k = 0; k <= plan.top_level; ++k )
      plan.counts.push_back( plan.count( k ) );
  }
  auto const est = detail::geometric_sum( plan.c * static_cast<double>( n ), ll, 0, plan.top_level, plan.top_level ) +
                   static_cast<double>( plan.top_level + 1 );
  plan.total_instances_estimate = est >= 1.8e19 ? std::numeric_limits<uint64_t>::max() : static_cast<uint64_t>( est );
  plan.size_bound = std::exp( static_cast<double>( plan.top_level + plan.max_output_level ) * ll / p );
  return plan;
}

inline level_plan plan_levels( cost_system const& sys, param_set const& ps, uint64_t n, plan_options const& opts = {} )
{
  return plan_levels( level_types( sys, ps ), ps.p, n, opts );
}

inline level_plan plan_levels( matrix_system const& ms, param_set const& ps, uint64_t n, plan_options const& opts = {} )
{
  return plan_levels( level_types( ms, ps ), ps.p, n, opts );
}

/*! \brief Parameter set holding matrix weights as `X1..Xn`. */
inline param_set matrix_param_set( matrix_system const& ms, double p, std::vector<double> const& weights )
{
  if ( weights.size() != ms.cols() )
    throw error( "matrix_param_set: weight count does not match the matrix" );
  param_set ps;
  ps.name = ms.name;
  ps.p = p;
  for ( std::size_t c = 0; c < weights.size(); ++c )
    ps.weights["X" + std::to_string( c + 1 )] = weights[c];
  return ps;
}

} // namespace csaform

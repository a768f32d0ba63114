#include <catch_amalgamated.hpp>

#include <csaform/csaform.hpp>

#include <cmath>
#include <random>

using namespace csaform;
using Catch::Approx;

namespace
{

std::vector<level_type> one_type( std::vector<double> in, std::vector<double> out )
{
  return { level_type{ "T", std::move( in ), std::move( out ) } };
}

bool is_power_of_two( double c )
{
  int e = 0;
  return std::frexp( c, &e ) == 0.5;
}

} // namespace

TEST_CASE( "hand-checked three-to-one plan", "[plan]" )
{
  auto const plan = plan_levels( one_type( { 1, 1, 1 }, { 2 } ), 0.5, 1 );
  CHECK( plan.grid_index == 0 );
  CHECK( plan.lambda == 2.0 );
  REQUIRE( plan.types.size() == 1 );
  CHECK( plan.types[0].input_levels == std::vector<int64_t>{ 0, 0, 0 } );
  CHECK( plan.types[0].output_levels == std::vector<int64_t>{ 1 } );
  CHECK( plan.types[0].margin == Approx( 1.0 ) );
  CHECK( plan.c == 1.0 );
  CHECK( plan.types[0].free_inputs == 3.0 );
  CHECK( plan.counts == std::vector<uint64_t>{ 1 } );
  CHECK( plan.size_bound == Approx( 4.0 ) );
  CHECK( plan.exact_supply );
}

TEST_CASE( "hand-checked plan at a larger n", "[plan]" )
{
  auto const plan = plan_levels( one_type( { 1, 1, 1 }, { 2 } ), 0.5, 8 );
  CHECK( plan.lambda == 2.0 );
  CHECK( plan.top_level == 3 );
  for ( int64_t k = 0; k <= plan.top_level; ++k )
    CHECK( plan.counts[k] == static_cast<uint64_t>( std::ceil( plan.c * 8 * std::pow( 2.0, -static_cast<double>( k ) ) ) ) );
  CHECK( plan.types[0].free_inputs >= 8 );
  CHECK( is_power_of_two( plan.c ) );
}

TEST_CASE( "a single input needs a single level", "[plan]" )
{
  auto const plan = plan_levels( one_type( { 1, 1, 1 }, { 2 } ), 0.5, 1 );
  CHECK( plan.top_level == 0 );
  REQUIRE( plan.counts.size() == 1 );
  CHECK( plan.counts[0] == static_cast<uint64_t>( std::ceil( plan.c ) ) );
}

TEST_CASE( "an unbalanced type is not certified", "[plan]" )
{
  try
  {
    plan_levels( one_type( { 1, 1, 1 }, { 3, 3 } ), 0.5, 16 );
    FAIL( "planned an unbalanced type" );
  }
  catch ( not_certified_error const& e )
  {
    CHECK( std::string( e.what() ).find( "type T" ) != std::string::npos );
  }
  CHECK_THROWS_AS( plan_levels( one_type( { 1, 1, 1 }, { 2 } ), 0.0, 4 ), error );
  CHECK_THROWS_AS( plan_levels( one_type( { 1, 1, 1 }, { 2 } ), 0.5, 0 ), error );
}

TEST_CASE( "discrete margins never exceed continuous margins", "[plan]" )
{
  std::mt19937_64 rng( 12 );
  std::uniform_real_distribution<double> size( 0.2, 5.0 ), pp( 0.2, 0.6 );
  int planned = 0;
  for ( int k = 0; k < 200; ++k )
  {
    std::vector<double> in( 2 + rng() % 4 ), out( 1 + rng() % 2 );
    for ( auto& x : in )
      x = size( rng );
    double s = 0;
    for ( auto x : in )
      s += x;
    for ( auto& y : out )
      y = s * size( rng ) / 5.0;
    try
    {
      auto const plan = plan_levels( one_type( in, out ), pp( rng ), 64 );
      ++planned;
      for ( auto const& t : plan.types )
      {
        CHECK( t.margin > 0 );
        CHECK( t.raw_margin > 0 );
        CHECK( t.raw_margin <= t.continuous_margin + 1e-12 );
        CHECK( t.free_inputs >= 64 );
        for ( std::size_t i = 0; i < in.size(); ++i )
        {
          auto const rebuilt = std::exp( static_cast<double>( t.input_levels[i] - plan.shift ) * std::log( plan.lambda ) / plan.p );
          CHECK( rebuilt <= in[i] * ( 1 + 1e-12 ) );
        }
        for ( std::size_t i = 0; i < out.size(); ++i )
        {
          auto const rebuilt = std::exp( static_cast<double>( t.output_levels[i] - plan.shift ) * std::log( plan.lambda ) / plan.p );
          CHECK( rebuilt >= out[i] * ( 1 - 1e-12 ) );
        }
      }
    }
    catch ( not_certified_error const& )
    {
    }
  }
  CHECK( planned > 20 );
}

TEST_CASE( "minimum input level is zero after shifting", "[plan]" )
{
  auto const plan = plan_levels( one_type( { 4, 7, 9 }, { 11 } ), 0.4, 100 );
  int64_t lowest = plan.types[0].input_levels[0];
  for ( auto d : plan.types[0].input_levels )
    lowest = std::min( lowest, d );
  CHECK( lowest == 0 );
}

TEST_CASE( "published mdfa parameters yield a plan", "[plan]" )
{
  auto const sys = builtin_system( "mdfa" );
  auto const ps = paper_params( "paper-mdfa" );
  auto const plan = plan_levels( sys, ps, 1024 );
  REQUIRE( plan.types.size() == 2 );
  for ( auto const& t : plan.types )
  {
    CHECK( t.margin > 0 );
    CHECK( t.raw_margin <= t.continuous_margin );
    CHECK( t.free_inputs >= 1024 );
  }
  CHECK( plan.grid_index == 28 );
  CHECK_FALSE( plan.exact_supply );
  CHECK( is_power_of_two( plan.c ) );
  CHECK( ( plan.counts.size() == static_cast<std::size_t>( plan.top_level + 1 ) || plan.counts.empty() ) );
}

TEST_CASE( "slack parameters give a coarse grid and exact supply", "[plan]" )
{
  auto const sys = builtin_system( "sfa5" );
  auto ps = paper_params( "paper-sfa5" );
  ps.p *= 0.9;
  auto const plan = plan_levels( sys, ps, 256 );
  CHECK( plan.grid_index < 28 );
  for ( auto const& t : plan.types )
    CHECK( t.free_inputs >= 256 );
  for ( std::size_t k = 1; k < plan.counts.size(); ++k )
    CHECK( plan.counts[k] <= plan.counts[k - 1] );
}

TEST_CASE( "matrix plans", "[plan]" )
{
  matrix_system ms;
  ms.name = "toy";
  ms.m = { { 1, 1, 1 }, { 1, 1, 1 } };
  auto const ps = matrix_param_set( ms, 0.3, { 1, 1, 1 } );
  auto const plan = plan_levels( ms, ps, 100 );
  REQUIRE( plan.types.size() == 1 );
  CHECK( plan.types[0].input_levels.size() == 3 );
  CHECK( plan.types[0].output_levels.size() == 2 );
  CHECK( plan.types[0].margin > 0 );
  CHECK_THROWS_AS( matrix_param_set( ms, 0.3, { 1, 1 } ), error );
  param_set missing;
  missing.p = 0.3;
  CHECK_THROWS_AS( plan_levels( ms, missing, 10 ), lookup_error );
}

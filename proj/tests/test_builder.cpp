#include <catch_amalgamated.hpp>

#include <csaform/csaform.hpp>

using namespace csaform;
using Catch::Approx;

namespace
{

build_options opts_for( basis b, std::string csa = {} )
{
  build_options o;
  o.base = b;
  o.csa = std::move( csa );
  return o;
}

std::vector<bool> weight_values( uint64_t n, auto&& f )
{
  std::vector<bool> v( n + 1 );
  for ( uint64_t w = 0; w <= n; ++w )
    v[w] = f( w );
  return v;
}

} // namespace

TEST_CASE( "tiny counters", "[builder]" )
{
  for ( auto b : { basis::b2, basis::b0 } )
  {
    auto const one = build_counter( 1, opts_for( b ) );
    REQUIRE( one.size() == 1 );
    CHECK( structurally_equal( one[0], make_var( 0 ) ) );
    auto const two = build_counter( 2, opts_for( b ) );
    CHECK( two.size() == 2 );
    CHECK( check_counter( two, 2 ).passed() );
    auto const three = build_counter( 3, opts_for( b ) );
    CHECK( three.size() == 2 );
    auto const r = check_counter( three, 3 );
    CHECK( r.passed() );
    CHECK( r.checked == 8 );
  }
}

TEST_CASE( "counters agree with popcount for every n up to 16", "[builder]" )
{
  for ( auto b : { basis::b2, basis::b0 } )
    for ( uint64_t n = 1; n <= 16; ++n )
    {
      INFO( to_string( b ) << " n=" << n );
      auto const bits = build_counter( n, opts_for( b ) );
      CHECK( bits.size() == static_cast<std::size_t>( std::bit_width( n ) ) );
      CHECK( check_counter( bits, n ).passed() );
      for ( auto const& f : bits )
        CHECK( validate_basis( f, b ).valid );
    }
}

TEST_CASE( "every composite drives a correct counter", "[builder]" )
{
  for ( auto const& csa : counter_composites() )
  {
    auto const native = block_library().composite( csa ).base;
    for ( uint64_t n : { 5u, 11u, 16u, 21u } )
    {
      INFO( csa << " n=" << n );
      auto const d = build_counter_detailed( n, opts_for( native, csa ) );
      CHECK( d.csa == csa );
      auto const r = check_counter( d.bits, n, n <= 16 ? std::nullopt : std::optional<uint64_t>( 4096 ), 3 );
      CHECK( r.passed() );
      for ( auto const& f : d.bits )
        CHECK( validate_basis( f, native ).valid );
    }
  }
}

TEST_CASE( "b0 composites also serve b2 targets", "[builder]" )
{
  for ( auto const* csa : { "fig3", "fig4", "csa17" } )
  {
    INFO( csa );
    auto const bits = build_counter( 19, opts_for( basis::b2, csa ) );
    CHECK( check_counter( bits, 19, 4096, 1 ).passed() );
  }
}

TEST_CASE( "larger counters on random assignments", "[builder]" )
{
  auto const bits = build_counter( 64, opts_for( basis::b2 ) );
  CHECK( bits.size() == 7 );
  auto const r = check_counter( bits, 64, 10000, 7 );
  CHECK( r.passed() );
  CHECK( r.checked == 10000 );
  CHECK_FALSE( r.exhaustive );
  auto const b0 = build_counter( 100, opts_for( basis::b0 ) );
  CHECK( check_counter( b0, 100, 10000, 7 ).passed() );
}

TEST_CASE( "the lowest-significance schedule is also correct", "[builder]" )
{
  for ( auto b : { basis::b2, basis::b0 } )
    for ( uint64_t n : { 7u, 12u, 16u, 40u } )
    {
      auto o = opts_for( b );
      o.schedule = schedule_order::lowest_significance;
      auto const bits = build_counter( n, o );
      CHECK( check_counter( bits, n, n <= 16 ? std::nullopt : std::optional<uint64_t>( 2048 ), 5 ).passed() );
    }
}

TEST_CASE( "larger thresholds stay correct", "[builder]" )
{
  auto o = opts_for( basis::b2 );
  o.threshold = 6;
  auto const bits = build_counter( 30, o );
  CHECK( check_counter( bits, 30, 4096, 2 ).passed() );
}

TEST_CASE( "pair slots of fig2 are only fed by composite or encoder outputs", "[builder]" )
{
  for ( uint64_t n : { 9u, 50u, 200u } )
  {
    auto const d = build_counter_detailed( n, opts_for( basis::b2, "fig2" ) );
    CHECK( d.stats.closure );
    CHECK( d.stats.applications > 0 );
    CHECK( check_counter( d.bits, n, 2048, 9 ).passed() );
  }
}

TEST_CASE( "builder input validation", "[builder]" )
{
  CHECK_THROWS_AS( build_counter( 0 ), error );
  CHECK_THROWS_AS( build_counter( ( uint64_t{ 1 } << 20 ) + 1 ), error );
  auto o = opts_for( basis::b2 );
  o.threshold = 2;
  CHECK_THROWS_AS( build_counter( 10, o ), error );
  CHECK_THROWS_AS( build_counter( 10, opts_for( basis::b2, "fig9" ) ), lookup_error );
  CHECK_THROWS_AS( build_bit( 5, 3 ), error );
}

TEST_CASE( "single bits", "[builder]" )
{
  auto const carry = build_bit( 3, 1 );
  CHECK( compute_truth_table( carry, 3 ) == threshold_table( 3, 2 ) );
  auto const top = build_bit( 5, 2, opts_for( basis::b0 ) );
  CHECK( compute_truth_table( top, 5 ) == threshold_table( 5, 4 ) );
  auto const all = build_counter( 20, opts_for( basis::b2 ) );
  for ( unsigned k = 0; k < all.size(); ++k )
    CHECK( build_bit( 20, k ).leaf_count() == all[k].leaf_count() );
}

TEST_CASE( "bit sizes grow with significance", "[builder]" )
{
  auto const bits = build_counter( 256, opts_for( basis::b2 ) );
  for ( unsigned k = 0; k < bits.size(); ++k )
    INFO( "bit " << k << " leaves " << bits[k].leaf_count() );
  CHECK( bits.back().leaf_count() > bits.front().leaf_count() );
  CHECK( bits[0].leaf_count() >= 256 );
}

TEST_CASE( "builds are deterministic", "[builder]" )
{
  auto const a = build_counter( 77, opts_for( basis::b0 ) ), b = build_counter( 77, opts_for( basis::b0 ) );
  REQUIRE( a.size() == b.size() );
  for ( std::size_t k = 0; k < a.size(); ++k )
    CHECK( render_sexp( a[k] ) == render_sexp( b[k] ) );
}

TEST_CASE( "majority, parity and constants", "[symmetric]" )
{
  auto const maj = weight_values( 5, []( uint64_t w ) { return w >= 3; } );
  CHECK( check_symmetric( build_symmetric( maj, 5 ), maj, 5 ).checked == 32 );
  CHECK( check_symmetric( build_symmetric( maj, 5, opts_for( basis::b0 ) ), maj, 5 ).passed() );
  auto const par = weight_values( 6, []( uint64_t w ) { return w % 2 == 1; } );
  CHECK( check_symmetric( build_symmetric( par, 6 ), par, 6 ).passed() );
  auto const one = weight_values( 9, []( uint64_t ) { return true; } );
  auto const f = build_symmetric( one, 9 );
  CHECK( check_symmetric( f, one, 9 ).passed() );
  CHECK( f.leaf_count() == 0 );
  CHECK_THROWS_AS( build_symmetric( maj, 6 ), error );
}

TEST_CASE( "symmetric functions up to 15 inputs", "[symmetric]" )
{
  for ( auto b : { basis::b2, basis::b0 } )
    for ( uint64_t n = 1; n <= 15; n += 2 )
    {
      auto const maj = weight_values( n, [n]( uint64_t w ) { return 2 * w > n; } );
      auto const par = weight_values( n, []( uint64_t w ) { return w % 2 == 1; } );
      auto const ex = weight_values( n, [n]( uint64_t w ) { return w == n / 3; } );
      for ( auto const* values : { &maj, &par, &ex } )
      {
        auto const f = build_symmetric( *values, n, opts_for( b ) );
        CHECK( validate_basis( f, b ).valid );
        CHECK( check_symmetric( f, *values, n ).passed() );
      }
    }
}

TEST_CASE( "symmetric functions on random inputs", "[symmetric]" )
{
  std::vector<bool> values( 41 );
  for ( std::size_t w = 0; w < values.size(); ++w )
    values[w] = ( w * 7 + 3 ) % 5 < 2;
  auto const f = build_symmetric( values, 40, opts_for( basis::b0 ) );
  auto const r = check_symmetric( f, values, 40, 10000, 4 );
  CHECK( r.passed() );
}

TEST_CASE( "log-log fit of an exact power law", "[growth]" )
{
  std::vector<double> x = { 2, 4, 8, 16 }, y;
  for ( auto v : x )
    y.push_back( 3.0 * std::pow( v, 2.5 ) );
  auto const [slope, icpt, resid] = loglog_fit( x, y );
  CHECK( slope == Approx( 2.5 ) );
  CHECK( icpt == Approx( std::log( 3.0 ) ) );
  CHECK( resid == Approx( 0.0 ).margin( 1e-12 ) );
}

TEST_CASE( "growth reports are deterministic", "[growth]" )
{
  auto const a = fit_growth( { 8, 16, 32, 64 }, std::nullopt ), b = fit_growth( { 8, 16, 32, 64 }, std::nullopt );
  CHECK( a.to_csv() == b.to_csv() );
  CHECK( a.slope == b.slope );
  CHECK( a.to_csv().rfind( "n,bit,leaves\n", 0 ) == 0 );
  CHECK( a.rows.size() == 4 );
  CHECK( a.rows.back().bit == 6 );
  CHECK( a.slope > 1.0 );
}

TEST_CASE( "parity bit grows roughly linearly over b2", "[growth]" )
{
  auto const g = fit_growth( { 8, 16, 32, 64, 128, 256, 512, 1024 }, 0u );
  CHECK( g.slope == Approx( 1.0 ).margin( 0.05 ) );
  CHECK( g.monotonicity_violations.empty() );
  CHECK_THROWS_AS( fit_growth( { 4 }, 5u ), error );
}

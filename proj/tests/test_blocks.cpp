#include <catch_amalgamated.hpp>

#include <csaform/csaform.hpp>

#include <random>

using namespace csaform;
using namespace csaform::dsl;

namespace
{

using row = std::vector<uint64_t>;

bool bit( uint64_t a, unsigned i ) { return ( a >> i ) & 1u; }

/* Values of the code components of (x1, u1 v1, u2 v2) in monotone-pair form. */
std::vector<bool> mon_components( uint64_t a )
{
  bool const x = bit( a, 0 ), u1 = bit( a, 1 ), v1 = bit( a, 2 ), u2 = bit( a, 3 ), v2 = bit( a, 4 );
  return { x, u1 && v1, u1 || v1, u2 && v2, u2 || v2 };
}

std::vector<bool> triple_components( bool u, bool v, bool w )
{
  return { u || v || w, ( u && v ) || ( u && w ) || ( v && w ), u && v && w, ( u != v ) != w };
}

} // namespace

TEST_CASE( "registry contents", "[blocks]" )
{
  auto const& lib = block_library();
  for ( auto const* name : { "fa3_b2", "fa3_b0", "ha_b2", "ha_b0", "fa3x", "mdfa", "sfa5", "sfa7", "sfa7p", "csa73", "parity7",
                             "xor_pair_encoder", "mon_pair_encoder", "sort_triple_encoder", "fig2", "fig3", "fig4",
                             "chain1", "chain2", "chain3", "chain4", "csa17" } )
    CHECK( lib.blocks.count( name ) == 1 );
  CHECK( lib.composites.count( "fig4" ) == 1 );
  CHECK_THROWS_AS( lib.block( "nope" ), lookup_error );
}

TEST_CASE( "every template is valid in its block basis", "[blocks]" )
{
  for ( auto const& [name, b] : block_library().blocks )
  {
    INFO( name );
    CHECK( b.templates.size() == b.num_output_components() );
    for ( auto const& t : b.templates )
      CHECK( validate_basis( t, b.base ).valid );
  }
}

TEST_CASE( "monotone components of b0 blocks contain no negation", "[blocks]" )
{
  for ( auto const& [name, b] : block_library().blocks )
  {
    if ( b.base != basis::b0 )
      continue;
    auto const names = component_names( b.outputs );
    std::size_t k = 0;
    for ( auto const& s : b.outputs )
    {
      for ( std::size_t c = 0; c < component_count( s.enc ); ++c, ++k )
      {
        bool const monotone_part = s.enc == encoding::mon_pair || ( s.enc == encoding::sort_triple && c < 3 );
        if ( monotone_part )
        {
          INFO( name << " " << names[k] );
          CHECK( is_monotone( b.templates[k] ) );
        }
      }
    }
  }
}

TEST_CASE( "full adder templates and leaf matrix", "[blocks]" )
{
  auto const fa = full_adder( basis::b2 );
  CHECK( leaf_matrix_of( fa ).entries == std::vector<row>{ { 1, 1, 1 }, { 2, 2, 1 } } );
  CHECK( evaluate_block( fa, 0 ) == 0 );
  for ( uint64_t a = 0; a < 8; ++a )
    CHECK( evaluate_block( fa, a ) == static_cast<uint64_t>( std::popcount( a ) ) );
  CHECK( compute_truth_table( fa.templates[1], 3 ) == threshold_table( 3, 2 ) );
}

TEST_CASE( "mdfa leaf profiles", "[blocks]" )
{
  auto const b = mdfa();
  auto const m = leaf_matrix_of( b );
  CHECK( m.column_names == std::vector<std::string>{ "x", "p1.uxv", "p1.v", "p2.uxv", "p2.v" } );
  CHECK( m.row_names == std::vector<std::string>{ "c", "ab.uxv", "ab.v" } );
  CHECK( m.entries[0] == row{ 1, 1, 0, 1, 0 } );
  CHECK( m.entries[1] == row{ 2, 2, 1, 1, 1 } );
  CHECK( m.entries[2] == row{ 1, 1, 2, 0, 0 } );
  auto const sized = instantiate( b.templates[2], { v( 0 ), v( 1 ) & v( 2 ), v( 3 ), v( 4 ), v( 5 ) } );
  CHECK( sized.leaf_count() == 5 );
}

TEST_CASE( "mdfa identity by hand", "[blocks]" )
{
  auto const b = mdfa();
  CHECK( eval( b.templates[0], { true, true, false, true, false } ) );
  for ( uint64_t a = 0; a < 32; ++a )
  {
    bool const x = bit( a, 0 ), u1 = bit( a, 1 ), v1 = bit( a, 2 ), u2 = bit( a, 3 ), v2 = bit( a, 4 );
    std::vector<bool> const in = { x, u1 != v1, v1, u2 != v2, v2 };
    bool const c = eval( b.templates[0], in ), axb = eval( b.templates[1], in ), bb = eval( b.templates[2], in );
    bool const aa = axb != bb;
    CHECK( 2 * ( int( aa ) + int( bb ) ) + int( c ) == std::popcount( a ) );
  }
}

TEST_CASE( "sfa5 templates", "[blocks]" )
{
  auto const b = sfa5();
  auto const m = leaf_matrix_of( b );
  CHECK( m.entries[0] == row{ 4, 4, 4, 2, 2 } );
  uint64_t total = 0;
  for ( auto x : m.entries[0] )
    total += x;
  CHECK( total == 16 );
  for ( uint64_t a = 0; a < 32; ++a )
  {
    auto const in = mon_components( a );
    auto const w = std::popcount( a );
    CHECK( eval( b.templates[1], in ) == ( w >= 4 ) );
    CHECK( eval( b.templates[2], in ) == ( w >= 2 ) );
    CHECK( eval( b.templates[0], in ) == ( w % 2 == 1 ) );
  }
}

TEST_CASE( "sfa7 outputs are thresholds of the decoded weight", "[blocks]" )
{
  auto const b = sfa7();
  for ( uint64_t a = 0; a < 128; ++a )
  {
    std::vector<bool> in = { bit( a, 0 ) };
    for ( auto c : triple_components( bit( a, 1 ), bit( a, 2 ), bit( a, 3 ) ) )
      in.push_back( c );
    for ( auto c : triple_components( bit( a, 4 ), bit( a, 5 ), bit( a, 6 ) ) )
      in.push_back( c );
    auto const w = std::popcount( a );
    CHECK( eval( b.templates[0], in ) == ( w % 2 == 1 ) );
    CHECK( eval( b.templates[1], in ) == ( w >= 2 ) );
    CHECK( eval( b.templates[2], in ) == ( w >= 4 ) );
    CHECK( eval( b.templates[3], in ) == ( w >= 6 ) );
  }
}

TEST_CASE( "sfa7 high output is the dual of the low output", "[blocks]" )
{
  auto const b = sfa7();
  auto const dual = rename_vars( dualize_monotone( b.templates[1] ), { 0, 3, 2, 1, 4, 7, 6, 5, 8 } );
  CHECK( structurally_equal( dual, b.templates[3] ) );
}

TEST_CASE( "threshold helpers", "[blocks]" )
{
  CHECK( compute_truth_table( threshold_formula( 2, 1 ), 2 ) == compute_truth_table( v( 0 ) | v( 1 ), 2 ) );
  CHECK( compute_truth_table( threshold_formula( 2, 2 ), 2 ) == compute_truth_table( v( 0 ) & v( 1 ), 2 ) );
  CHECK( compute_truth_table( threshold_formula( 5, 4 ), 5 ) == threshold_table( 5, 4 ) );
  CHECK( structurally_equal( threshold4_over_triple( 2 ), ( v( 0 ) & v( 1 ) ) | v( 2 ) ) );
  for ( unsigned k = 1; k <= 4; ++k )
    for ( uint64_t a = 0; a < 16; ++a )
    {
      auto const t = triple_components( bit( a, 1 ), bit( a, 2 ), bit( a, 3 ) );
      std::vector<bool> const in = { bit( a, 0 ), t[0], t[1], t[2] };
      CHECK( eval( threshold4_over_triple( k ), in ) == ( std::popcount( a ) >= static_cast<int>( k ) ) );
    }
}

TEST_CASE( "fig2 wiring and first output profile", "[blocks]" )
{
  auto const c = block_library().composite( "fig2" );
  auto const m = leaf_matrix_of( c );
  auto const names = m.row_names;
  auto const col = [&]( std::string const& n ) {
    return static_cast<std::size_t>( std::find( m.column_names.begin(), m.column_names.end(), n ) - m.column_names.begin() );
  };
  auto const r = [&]( std::string const& n ) {
    return m.entries[static_cast<std::size_t>( std::find( names.begin(), names.end(), n ) - names.begin() )];
  };
  auto const c1 = r( "C1" );
  CHECK( c1[col( "X1" )] == 1 );
  CHECK( c1[col( "X2" )] == 1 );
  CHECK( c1[col( "X3" )] == 1 );
  CHECK( c1[col( "U1.uxv" )] == 1 );
  auto const b1 = r( "A1.v" );
  CHECK( b1[col( "X1" )] == 1 );
  CHECK( b1[col( "X2" )] == 1 );
  CHECK( b1[col( "X3" )] == 3 );
}

TEST_CASE( "fig2 pre-encoded pair role choice keeps the function", "[blocks]" )
{
  auto const d = mdfa();
  auto const pair_a = std::vector<formula>{ v( 1 ) ^ v( 2 ), v( 2 ) };
  auto const pair_b = std::vector<formula>{ v( 1 ) ^ v( 2 ), v( 1 ) };
  auto const u1 = std::vector<formula>{ v( 3 ), v( 4 ) };
  auto const a = instantiate_block( d, { { "x", { v( 0 ) } }, { "p1", pair_a }, { "p2", u1 } } );
  auto const b = instantiate_block( d, { { "x", { v( 0 ) } }, { "p1", pair_b }, { "p2", u1 } } );
  CHECK( a.at( "ab.v" ).leaf_count() == 5 );
  CHECK( compute_truth_table( a.at( "ab.v" ), 5 ) == compute_truth_table( b.at( "ab.v" ), 5 ) );
  CHECK( compute_truth_table( a.at( "ab.uxv" ), 5 ) == compute_truth_table( b.at( "ab.uxv" ), 5 ) );
  CHECK( compute_truth_table( a.at( "c" ), 5 ) == compute_truth_table( b.at( "c" ), 5 ) );
}

TEST_CASE( "instantiate_block checks its inputs", "[blocks]" )
{
  auto const fa = full_adder( basis::b0 );
  CHECK_THROWS_AS( instantiate_block( fa, { { "x", { v( 0 ) } }, { "y", { v( 1 ) } } } ), lookup_error );
  CHECK_THROWS_AS( instantiate_block( fa, { { "x", { v( 0 ) ^ v( 3 ) } }, { "y", { v( 1 ) } }, { "z", { v( 2 ) } } } ), basis_error );
  auto const out = instantiate_block( fa, { { "x", { v( 0 ) } }, { "y", { v( 1 ) } }, { "z", { v( 2 ) } } } );
  CHECK( structurally_equal( out.at( "s" ), fa.templates[0] ) );
}

TEST_CASE( "composite leaf matrices agree with expanded formulas", "[blocks]" )
{
  for ( auto const& [name, c] : block_library().composites )
  {
    INFO( name );
    CHECK( leaf_matrix_of( c ) == leaf_matrix_of( flatten( c ) ) );
  }
}

TEST_CASE( "chain sizes", "[blocks]" )
{
  auto const& lib = block_library();
  CHECK( total_decoded_bits( lib.block( "chain1" ).inputs ) == 6 );
  auto const c4 = lib.block( "chain4" );
  CHECK( total_decoded_bits( c4.inputs ) == 15 );
  CHECK( c4.outputs.size() == 6 );
  for ( unsigned s = 0; s < 6; ++s )
    CHECK( c4.outputs[s].significance == s );
  CHECK_THROWS_AS( compose_chain( 0 ), lookup_error );
}

TEST_CASE( "the 17-input composite", "[blocks]" )
{
  auto const b = block_library().block( "csa17" );
  CHECK( b.inputs.size() == 17 );
  CHECK( b.outputs.size() == 6 );
  CHECK( evaluate_block( b, 0 ) == 0 );
  CHECK( evaluate_block( b, ( uint64_t{ 1 } << 17 ) - 1 ) == 17 );
  auto const m = leaf_matrix_of( b );
  CHECK( row( m.entries[0].begin(), m.entries[0].begin() + 7 ) == row{ 4, 8, 8, 8, 8, 8, 8 } );
}

TEST_CASE( "small blocks verify exhaustively", "[verify]" )
{
  for ( auto const* name : { "fa3_b2", "fa3_b0", "ha_b2", "ha_b0", "fa3x", "mdfa", "sfa5", "sfa7", "sfa7p", "csa73",
                             "xor_pair_encoder", "mon_pair_encoder", "sort_triple_encoder" } )
  {
    auto const r = verify_block( block_library().block( name ) );
    INFO( name );
    CHECK( r.passed() );
    CHECK( r.exhaustive );
    CHECK( r.assignments_checked == ( uint64_t{ 1 } << r.decoded_inputs ) );
  }
  CHECK( verify_block( block_library().block( "mdfa" ) ).assignments_checked == 32 );
  CHECK( verify_block( block_library().block( "sfa7" ) ).assignments_checked == 128 );
}

TEST_CASE( "a broken block is caught", "[verify]" )
{
  auto b = full_adder( basis::b2 );
  b.templates[1] = v( 0 ) & v( 1 );
  auto const r = verify_block( b );
  CHECK_FALSE( r.passed() );
  CHECK( r.failure_count == 2 );
  REQUIRE( r.failures.size() == 2 );
  CHECK( r.failures[0].input_sum == 2 );
  CHECK( r.failures[0].output_sum == 0 );
}

TEST_CASE( "invalid output code words are reported", "[verify]" )
{
  auto b = encoder_block( encoding::mon_pair, basis::b0 );
  std::swap( b.templates[0], b.templates[1] );
  auto const r = verify_block( b );
  CHECK_FALSE( r.passed() );
  bool any_invalid = false;
  for ( auto const& f : r.failures )
    any_invalid |= f.invalid_codeword;
  CHECK( any_invalid );
}

TEST_CASE( "parallel verification matches sequential", "[verify]" )
{
  auto const& b = block_library().block( "chain4" );
  auto const one = verify_block( b, { 1, 16 } );
  auto const many = verify_block( b, { 3, 16 } );
  CHECK( one.passed() );
  CHECK( one.assignments_checked == many.assignments_checked );
  CHECK( one.failure_count == many.failure_count );

  auto broken = full_adder( basis::b0 );
  broken.templates[0] = v( 0 );
  auto const a = verify_block( broken, { 1, 3 } ), c = verify_block( broken, { 4, 3 } );
  REQUIRE( a.failures.size() == c.failures.size() );
  for ( std::size_t i = 0; i < a.failures.size(); ++i )
    CHECK( a.failures[i].assignment == c.failures[i].assignment );
}

TEST_CASE( "random verification", "[verify]" )
{
  auto const r = verify_block_random( block_library().block( "chain4" ), 1000, 9 );
  CHECK( r.passed() );
  CHECK_FALSE( r.exhaustive );
  CHECK( r.assignments_checked == 1000 );
}

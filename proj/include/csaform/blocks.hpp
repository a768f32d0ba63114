/*!
  \file blocks.hpp
  \brief CSA building blocks, composites, and threshold helpers

  A block maps typed input slots to typed output slots.  Each output code
  component has a formula template over the flattened input components.
  For an arithmetic block the weighted sums of decoded inputs and outputs
  agree on every valid input code word.

  Composites are small netlists of blocks.  They are flattened into a
  single block by template instantiation; their leaf matrices can be
  computed either from the flattened templates or by composing the leaf
  profiles of the member blocks along the wiring.
*/

#pragma once

#include "encoding.hpp"
#include "formula.hpp"

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace csaform
{

struct block_spec
{
  std::string name;
  basis base{ basis::b2 };
  std::vector<slot> inputs;
  std::vector<slot> outputs;
  /*! \brief One template per flattened output component, over flattened input components. */
  std::vector<formula> templates;
  /*! \brief Whether the weighted-sum identity is part of the block's contract. */
  bool arithmetic{ true };

  std::size_t num_input_components() const { return total_components( inputs ); }
  std::size_t num_output_components() const { return total_components( outputs ); }

  /*! \brief Human-readable weighted-sum identity, e.g. `x + y + z = s + 2*c`. */
  std::string identity() const
  {
    auto const side = []( std::vector<slot> const& slots ) {
      std::string s;
      for ( auto const& sl : slots )
      {
        if ( !s.empty() )
          s += " + ";
        if ( sl.significance > 0 )
          s += std::to_string( 1ull << sl.significance ) + "*";
        s += sl.enc == encoding::standard ? sl.name : "|" + sl.name + "|";
      }
      return s;
    };
    return side( inputs ) + " = " + side( outputs );
  }
};

/*! \brief Leaf occurrence counts; rows are output components, columns input components. */
struct leaf_matrix
{
  std::vector<std::string> row_names;
  std::vector<std::string> column_names;
  std::vector<std::vector<uint64_t>> entries;

  friend bool operator==( leaf_matrix const& a, leaf_matrix const& b ) { return a.entries == b.entries; }
};

inline leaf_matrix leaf_matrix_of( block_spec const& b )
{
  leaf_matrix m;
  m.row_names = component_names( b.outputs );
  m.column_names = component_names( b.inputs );
  auto const ncols = b.num_input_components();
  for ( auto const& t : b.templates )
    m.entries.push_back( leaf_profile( t, ncols ) );
  return m;
}

/*! \brief Source of a composite-internal signal. */
struct wire
{
  enum class kind
  {
    input,
    cell,
    zero
  };

  kind source{ kind::zero };
  std::size_t cell{ 0 };
  std::size_t component{ 0 };

  static wire from_input( std::size_t component ) { return { kind::input, 0, component }; }
  static wire from_cell( std::size_t cell, std::size_t component ) { return { kind::cell, cell, component }; }
  static wire zero() { return { kind::zero, 0, 0 }; }
};

struct cell_instance
{
  block_spec block;
  /*! \brief One wire per flattened input component of `block`. */
  std::vector<wire> inputs;
};

struct composite_spec
{
  std::string name;
  basis base{ basis::b2 };
  std::vector<slot> inputs;
  std::vector<slot> outputs;
  std::vector<cell_instance> cells;
  /*! \brief One wire per flattened output component. */
  std::vector<wire> output_wires;
  bool arithmetic{ true };
};

/*! \brief Incremental construction of a composite, slot by slot. */
class composite_builder
{
public:
  using signal = std::vector<wire>;

  composite_builder( std::string name, basis b )
  {
    spec_.name = std::move( name );
    spec_.base = b;
  }

  signal input( slot s )
  {
    signal sig;
    for ( std::size_t i = 0; i < component_count( s.enc ); ++i )
      sig.push_back( wire::from_input( next_input_++ ) );
    spec_.inputs.push_back( std::move( s ) );
    return sig;
  }

  /*! \brief Adds a cell; returns the signals of its output slots. */
  std::vector<signal> add( block_spec const& block, std::vector<signal> const& slot_inputs )
  {
    if ( slot_inputs.size() != block.inputs.size() )
      throw lookup_error( "composite " + spec_.name + ": cell " + block.name + " expects " +
                          std::to_string( block.inputs.size() ) + " slots" );
    cell_instance cell{ block, {} };
    for ( std::size_t i = 0; i < slot_inputs.size(); ++i )
    {
      if ( slot_inputs[i].size() != component_count( block.inputs[i].enc ) )
        throw lookup_error( "composite " + spec_.name + ": component mismatch on " + block.name + "." +
                            block.inputs[i].name );
      cell.inputs.insert( cell.inputs.end(), slot_inputs[i].begin(), slot_inputs[i].end() );
    }
    auto const index = spec_.cells.size();
    spec_.cells.push_back( std::move( cell ) );
    std::vector<signal> outs;
    std::size_t comp = 0;
    for ( auto const& s : block.outputs )
    {
      signal sig;
      for ( std::size_t i = 0; i < component_count( s.enc ); ++i )
        sig.push_back( wire::from_cell( index, comp++ ) );
      outs.push_back( std::move( sig ) );
    }
    return outs;
  }

  void output( slot s, signal const& sig )
  {
    if ( sig.size() != component_count( s.enc ) )
      throw lookup_error( "composite " + spec_.name + ": output " + s.name + " component mismatch" );
    spec_.output_wires.insert( spec_.output_wires.end(), sig.begin(), sig.end() );
    spec_.outputs.push_back( std::move( s ) );
  }

  composite_spec finish( bool arithmetic = true )
  {
    spec_.arithmetic = arithmetic;
    return std::move( spec_ );
  }

private:
  composite_spec spec_;
  std::size_t next_input_{ 0 };
};

/*! \brief Expands a composite into one block whose templates range over the composite inputs. */
inline block_spec flatten( composite_spec const& c )
{
  std::vector<formula> input_vars;
  for ( std::size_t i = 0; i < total_components( c.inputs ); ++i )
    input_vars.push_back( make_var( static_cast<uint32_t>( i ) ) );
  std::vector<std::vector<formula>> cell_outputs;
  auto const resolve = [&]( wire const& w ) -> formula {
    switch ( w.source )
    {
    case wire::kind::input:
      return input_vars.at( w.component );
    case wire::kind::cell:
      return cell_outputs.at( w.cell ).at( w.component );
    case wire::kind::zero:
      return make_const( false );
    }
    return make_const( false );
  };
  for ( auto const& cell : c.cells )
  {
    std::vector<formula> args;
    for ( auto const& w : cell.inputs )
      args.push_back( resolve( w ) );
    std::vector<formula> outs;
    for ( auto const& t : cell.block.templates )
      outs.push_back( instantiate( t, args, { c.base, false } ) );
    cell_outputs.push_back( std::move( outs ) );
  }
  block_spec b;
  b.name = c.name;
  b.base = c.base;
  b.inputs = c.inputs;
  b.outputs = c.outputs;
  b.arithmetic = c.arithmetic;
  for ( auto const& w : c.output_wires )
    b.templates.push_back( resolve( w ) );
  return b;
}

/*! \brief Leaf matrix of a composite by composing member leaf profiles along the wiring. */
inline leaf_matrix leaf_matrix_of( composite_spec const& c )
{
  auto const ncols = total_components( c.inputs );
  using row = std::vector<uint64_t>;
  std::vector<std::vector<row>> cell_rows;
  auto const resolve = [&]( wire const& w ) -> row {
    switch ( w.source )
    {
    case wire::kind::input:
    {
      row r( ncols, 0 );
      r.at( w.component ) = 1;
      return r;
    }
    case wire::kind::cell:
      return cell_rows.at( w.cell ).at( w.component );
    case wire::kind::zero:
      return row( ncols, 0 );
    }
    return row( ncols, 0 );
  };
  for ( auto const& cell : c.cells )
  {
    std::vector<row> sources;
    for ( auto const& w : cell.inputs )
      sources.push_back( resolve( w ) );
    auto const local = leaf_matrix_of( cell.block );
    std::vector<row> rows;
    for ( auto const& profile : local.entries )
    {
      row r( ncols, 0 );
      for ( std::size_t k = 0; k < profile.size(); ++k )
        for ( std::size_t j = 0; j < ncols; ++j )
          r[j] = saturating_add( r[j], saturating_mul( profile[k], sources[k][j] ) );
      rows.push_back( std::move( r ) );
    }
    cell_rows.push_back( std::move( rows ) );
  }
  leaf_matrix m;
  m.row_names = component_names( c.outputs );
  m.column_names = component_names( c.inputs );
  for ( auto const& w : c.output_wires )
    m.entries.push_back( resolve( w ) );
  return m;
}

/* ------------------------------------------------------------------ */
/* threshold helpers                                                  */
/* ------------------------------------------------------------------ */

/*! \brief T_4^k over (y, s', s'', s''') where (s', s'', s''') is a sorted triple.

  T_4^1 = y | s', T_4^2 = y s' | s''; T_4^3 and T_4^4 are the duals of
  T_4^2 and T_4^1 with s' and s''' exchanged.
*/
inline formula threshold4_over_triple( unsigned k )
{
  using namespace dsl;
  switch ( k )
  {
  case 0:
    return make_const( true );
  case 1:
    return v( 0 ) | v( 1 );
  case 2:
    return ( v( 0 ) & v( 1 ) ) | v( 2 );
  case 3:
    return rename_vars( dualize_monotone( threshold4_over_triple( 2 ) ), { 0, 3, 2, 1 } );
  case 4:
    return rename_vars( dualize_monotone( threshold4_over_triple( 1 ) ), { 0, 3, 2, 1 } );
  default:
    return make_const( false );
  }
}

/*! \brief T_4^k over two monotone pairs (m1, o1, m2, o2). */
inline formula threshold4_over_pairs( unsigned k )
{
  using namespace dsl;
  switch ( k )
  {
  case 0:
    return make_const( true );
  case 1:
    return v( 1 ) | v( 3 );
  case 2:
    return ( v( 0 ) | v( 2 ) ) | ( v( 1 ) & v( 3 ) );
  case 3:
    return rename_vars( dualize_monotone( threshold4_over_pairs( 2 ) ), { 1, 0, 3, 2 } );
  case 4:
    return rename_vars( dualize_monotone( threshold4_over_pairs( 1 ) ), { 1, 0, 3, 2 } );
  default:
    return make_const( false );
  }
}

namespace detail
{

inline formula or_fold( formula const& a, formula const& b )
{
  return fold_gate( gate_table::or_, a, b, basis::b0 );
}

inline formula and_fold( formula const& a, formula const& b )
{
  return fold_gate( gate_table::and_, a, b, basis::b0 );
}

/*! \brief T^k over the variables `vars` by splitting into halves. */
inline formula threshold_split( std::vector<uint32_t> const& vars, unsigned k )
{
  auto const n = static_cast<unsigned>( vars.size() );
  if ( k == 0 )
    return make_const( true );
  if ( k > n )
    return make_const( false );
  if ( n == 1 )
    return make_var( vars[0] );
  auto const half = ( n + 1 ) / 2;
  std::vector<uint32_t> const a( vars.begin(), vars.begin() + half ), b( vars.begin() + half, vars.end() );
  formula result = make_const( false );
  for ( unsigned i = std::min( k, half ) + 1; i-- > 0; )
  {
    auto const j = k - i;
    if ( j > b.size() )
      continue;
    result = or_fold( result, and_fold( threshold_split( a, i ), threshold_split( b, j ) ) );
  }
  return result;
}

} // namespace detail

/*! \brief Monotone formula for T_n^k over variables 0..n-1 (n <= 7).

  The (4,k) and (5,4)/(5,2) cases are the hand-written templates used by
  the sorting adders; the others are built by splitting the inputs in two.
*/
inline formula threshold_formula( unsigned n, unsigned k, basis = basis::b0 )
{
  using namespace dsl;
  if ( n == 0 || n > 7 )
    throw lookup_error( "threshold_formula: unsupported arity " + std::to_string( n ) );
  if ( k > n + 1 )
    throw lookup_error( "threshold_formula: threshold " + std::to_string( k ) + " exceeds n+1" );
  if ( k == 0 )
    return make_const( true );
  if ( k == n + 1 )
    return make_const( false );
  if ( n == 2 )
    return k == 1 ? v( 0 ) | v( 1 ) : v( 0 ) & v( 1 );
  if ( n == 3 )
  {
    if ( k == 1 )
      return ( v( 0 ) | v( 1 ) ) | v( 2 );
    if ( k == 2 )
      return ( ( v( 0 ) | v( 1 ) ) & v( 2 ) ) | ( v( 0 ) & v( 1 ) );
    return ( v( 0 ) & v( 1 ) ) & v( 2 );
  }
  if ( n == 4 )
  {
    auto const t1 = ( ( v( 0 ) | v( 1 ) ) | v( 2 ) ) | v( 3 );
    auto const t2 = ( ( ( v( 0 ) | v( 1 ) ) & ( v( 2 ) | v( 3 ) ) ) | ( v( 0 ) & v( 1 ) ) ) | ( v( 2 ) & v( 3 ) );
    switch ( k )
    {
    case 1:
      return t1;
    case 2:
      return t2;
    case 3:
      return dualize_monotone( t2 );
    default:
      return dualize_monotone( t1 );
    }
  }
  if ( n == 5 && ( k == 4 || k == 2 ) )
  {
    // (x1, u1, v1, u2, v2) with the pair components expanded
    auto const m1 = v( 1 ) & v( 2 ), o1 = v( 1 ) | v( 2 ), m2 = v( 3 ) & v( 4 ), o2 = v( 3 ) | v( 4 );
    auto const t54 = ( ( ( v( 0 ) & o1 ) | m1 ) & m2 ) | ( ( v( 0 ) & m1 ) & o2 );
    return k == 4 ? t54 : dualize_monotone( t54 );
  }
  std::vector<uint32_t> vars( n );
  std::iota( vars.begin(), vars.end(), 0u );
  return detail::threshold_split( vars, k );
}

/* ------------------------------------------------------------------ */
/* primitive blocks                                                   */
/* ------------------------------------------------------------------ */

inline slot std_slot( std::string name, unsigned sig = 0 ) { return { std::move( name ), encoding::standard, sig }; }
inline slot xor_slot( std::string name, unsigned sig = 0 ) { return { std::move( name ), encoding::xor_pair, sig }; }
inline slot mon_slot( std::string name, unsigned sig = 0 ) { return { std::move( name ), encoding::mon_pair, sig }; }
inline slot triple_slot( std::string name, unsigned sig = 0 ) { return { std::move( name ), encoding::sort_triple, sig }; }

/*! \brief Standard (3,2)-CSA. Carry is `xy | (x^y)z` over B2, `xy | (x|y)z` over B0. */
inline block_spec full_adder( basis b )
{
  using namespace dsl;
  block_spec fa;
  fa.name = b == basis::b2 ? "fa3_b2" : "fa3_b0";
  fa.base = b;
  fa.inputs = { std_slot( "x" ), std_slot( "y" ), std_slot( "z" ) };
  fa.outputs = { std_slot( "s" ), std_slot( "c", 1 ) };
  if ( b == basis::b2 )
    fa.templates = { ( v( 0 ) ^ v( 1 ) ) ^ v( 2 ), ( v( 0 ) & v( 1 ) ) | ( ( v( 0 ) ^ v( 1 ) ) & v( 2 ) ) };
  else
    fa.templates = { xor0( xor0( v( 0 ), v( 1 ) ), v( 2 ) ), ( v( 0 ) & v( 1 ) ) | ( ( v( 0 ) | v( 1 ) ) & v( 2 ) ) };
  return fa;
}

inline block_spec half_adder( basis b )
{
  using namespace dsl;
  block_spec ha;
  ha.name = b == basis::b2 ? "ha_b2" : "ha_b0";
  ha.base = b;
  ha.inputs = { std_slot( "x" ), std_slot( "y" ) };
  ha.outputs = { std_slot( "s" ), std_slot( "c", 1 ) };
  ha.templates = { b == basis::b2 ? v( 0 ) ^ v( 1 ) : xor0( v( 0 ), v( 1 ) ), v( 0 ) & v( 1 ) };
  return ha;
}

/*! \brief FA3 whose first two inputs arrive as an XOR pair (a^b, b).

  sum = (a^b) ^ y, carry = ((y ^ b) & (a^b)) ^ b.
*/
inline block_spec full_adder_xor_pair()
{
  using namespace dsl;
  block_spec fa;
  fa.name = "fa3x";
  fa.base = basis::b2;
  fa.inputs = { xor_slot( "t" ), std_slot( "y" ) };
  fa.outputs = { std_slot( "s" ), std_slot( "c", 1 ) };
  fa.templates = { v( 0 ) ^ v( 2 ), ( ( v( 2 ) ^ v( 1 ) ) & v( 0 ) ) ^ v( 1 ) };
  return fa;
}

/*! \brief Encoder block: the decoded bits of `e` in, one slot of encoding `e` out. */
inline block_spec encoder_block( encoding e, basis b )
{
  block_spec enc;
  enc.base = b;
  switch ( e )
  {
  case encoding::xor_pair:
    enc.name = "xor_pair_encoder";
    enc.inputs = { std_slot( "u" ), std_slot( "v" ) };
    enc.outputs = { xor_slot( "p" ) };
    break;
  case encoding::mon_pair:
    enc.name = "mon_pair_encoder";
    enc.inputs = { std_slot( "u" ), std_slot( "v" ) };
    enc.outputs = { mon_slot( "p" ) };
    break;
  case encoding::sort_triple:
    enc.name = "sort_triple_encoder";
    enc.inputs = { std_slot( "u" ), std_slot( "v" ), std_slot( "w" ) };
    enc.outputs = { triple_slot( "t" ) };
    break;
  case encoding::standard:
    throw lookup_error( "encoder_block: standard encoding needs no encoder" );
  }
  if ( b == basis::b0 && e == encoding::xor_pair )
    enc.name += "_b0";
  enc.templates = encoder_templates( e, b );
  return enc;
}

/*! \brief MDFA over B2: inputs x, (u1^v1, v1), (u2^v2, v2); outputs c, (a^b, b).

  c       = x ^ (u1^v1) ^ (u2^v2)
  b       = (x ^ v1)(u1^v1) ^ v1
  a ^ b   = ((x ^ v1) | (u1^v1)) ^ (x ^ (u1^v1) ^ v2) & !(u2^v2)
*/
inline block_spec mdfa()
{
  using namespace dsl;
  block_spec b;
  b.name = "mdfa";
  b.base = basis::b2;
  b.inputs = { std_slot( "x" ), xor_slot( "p1" ), xor_slot( "p2" ) };
  b.outputs = { std_slot( "c" ), xor_slot( "ab", 1 ) };
  auto const x = v( 0 ), p1 = v( 1 ), v1 = v( 2 ), p2 = v( 3 ), v2 = v( 4 );
  b.templates = { ( x ^ p1 ) ^ p2, ( ( x ^ v1 ) | p1 ) ^ ( ( ( x ^ p1 ) ^ v2 ) & make_not( p2 ) ),
                  ( ( x ^ v1 ) & p1 ) ^ v1 };
  return b;
}

/*! \brief SFA5 over B0: inputs x1, (u1v1, u1|v1), (u2v2, u2|v2); outputs c, (a1b1, a1|b1). */
inline block_spec sfa5()
{
  using namespace dsl;
  block_spec b;
  b.name = "sfa5";
  b.base = basis::b0;
  b.inputs = { std_slot( "x1" ), mon_slot( "p1" ), mon_slot( "p2" ) };
  b.outputs = { std_slot( "c" ), mon_slot( "a", 1 ) };
  auto const x1 = v( 0 ), m1 = v( 1 ), o1 = v( 2 ), m2 = v( 3 ), o2 = v( 4 );
  auto const psi = ( x1 & ( m1 | ~o1 ) ) | ( ( ~x1 & ~m1 ) & o1 );
  auto const chi = ~m2 & o2;
  auto const c = ( psi & ~chi ) | ( ~psi & chi );
  auto const ab = ( ( ( x1 & o1 ) | m1 ) & m2 ) | ( ( x1 & m1 ) & o2 );
  auto const a_or_b = rename_vars( dualize_monotone( ab ), { 0, 2, 1, 4, 3 } );
  b.templates = { c, ab, a_or_b };
  return b;
}

namespace detail
{

/*! \brief Output templates of a sorting (7,4) adder given T_4^i helpers.

  `t[i]` is T_4^i of the four non-triple inputs, `s` the components
  (s', s'', s''', s^) of the incoming triple, and `swap` renames variables
  exchanging s' and s''' for the dual q''' template.
*/
inline std::vector<formula> sorting_outputs( std::vector<formula> const& t, std::vector<formula> const& s,
                                             std::vector<uint32_t> const& swap )
{
  using namespace dsl;
  auto const q1 = ( ( t[1] & s[0] ) | t[2] ) | s[1];
  auto const q2 = ( ( t[4] | ( t[3] & s[0] ) ) | ( t[2] & s[1] ) ) | ( t[1] & s[2] );
  auto const q3 = rename_vars( dualize_monotone( q1 ), swap );
  auto const qx = ( ( ( ~s[0] & t[2] ) & ~t[4] ) | ( ( ( s[0] & ~s[1] ) & t[1] ) & ~t[3] ) ) |
                  ( ( ( s[1] & ~s[2] ) & ( t[4] | ~t[2] ) ) | ( s[2] & ( t[3] | ~t[1] ) ) );
  return { q1, q2, q3, qx };
}

} // namespace detail

/*! \brief SFA7 over B0: inputs x1 and two sorted triples; outputs c1 and a sorted triple at significance 1. */
inline block_spec sfa7()
{
  using namespace dsl;
  block_spec b;
  b.name = "sfa7";
  b.base = basis::b0;
  b.inputs = { std_slot( "x1" ), triple_slot( "s1" ), triple_slot( "s2" ) };
  b.outputs = { std_slot( "c1" ), triple_slot( "q1", 1 ) };
  auto const x1 = v( 0 );
  std::vector<formula> const s1 = { v( 1 ), v( 2 ), v( 3 ), v( 4 ) }, s2 = { v( 5 ), v( 6 ), v( 7 ), v( 8 ) };
  std::vector<formula> t;
  for ( unsigned k = 0; k <= 4; ++k )
    t.push_back( instantiate( threshold4_over_triple( k ), { x1, s1[0], s1[1], s1[2] }, { basis::b0 } ) );
  auto const a = ( x1 & ~s1[3] ) | ( ~x1 & s1[3] );
  auto const c1 = ( s2[3] & ~a ) | ( ~s2[3] & a );
  b.templates = { c1 };
  for ( auto const& q : detail::sorting_outputs( t, s2, { 0, 3, 2, 1, 4, 7, 6, 5, 8 } ) )
    b.templates.push_back( q );
  return b;
}

/*! \brief SFA7' over B0: inputs x2..x5 and one sorted triple. */
inline block_spec sfa7_prime()
{
  using namespace dsl;
  block_spec b;
  b.name = "sfa7p";
  b.base = basis::b0;
  b.inputs = { std_slot( "x2" ), std_slot( "x3" ), std_slot( "x4" ), std_slot( "x5" ), triple_slot( "s3" ) };
  b.outputs = { std_slot( "c2" ), triple_slot( "q2", 1 ) };
  auto const x2 = v( 0 ), x3 = v( 1 ), x4 = v( 2 ), x5 = v( 3 );
  std::vector<formula> const s3 = { v( 4 ), v( 5 ), v( 6 ), v( 7 ) };
  std::vector<formula> t;
  for ( unsigned k = 0; k <= 4; ++k )
    t.push_back( k == 0 ? make_const( true ) : threshold_formula( 4, k ) );
  auto const psi = ( ( ( x2 & ~x3 ) | ( ~x2 & x3 ) ) & ( ( x4 & x5 ) | ( ~x4 & ~x5 ) ) ) |
                   ( ( ( x2 & x3 ) | ( ~x2 & ~x3 ) ) & ( ( x4 & ~x5 ) | ( ~x4 & x5 ) ) );
  auto const c2 = ( psi & ~s3[3] ) | ( ~psi & s3[3] );
  b.templates = { c2 };
  for ( auto const& q : detail::sorting_outputs( t, s3, { 0, 1, 2, 3, 6, 5, 4, 7 } ) )
    b.templates.push_back( q );
  return b;
}

/*! \brief (7,3)-CSA over B0 on a sorted triple and two monotone pairs.

  Outputs the three bits of the sum of the seven decoded inputs.  The
  middle bit is selected by the triple count, like the parity output of
  the sorting adders; the high bit is T_7^4.
*/
inline block_spec csa73()
{
  using namespace dsl;
  block_spec b;
  b.name = "csa73";
  b.base = basis::b0;
  b.inputs = { triple_slot( "t" ), mon_slot( "p1" ), mon_slot( "p2" ) };
  b.outputs = { std_slot( "l" ), std_slot( "m", 1 ), std_slot( "h", 2 ) };
  std::vector<formula> const t = { v( 0 ), v( 1 ), v( 2 ), v( 3 ) };
  auto const m1 = v( 4 ), o1 = v( 5 ), m2 = v( 6 ), o2 = v( 7 );
  std::vector<formula> r;
  for ( unsigned k = 0; k <= 4; ++k )
    r.push_back( instantiate( threshold4_over_pairs( k ), { m1, o1, m2, o2 } ) );
  auto const pair_parity = xor0( ~m1 & o1, ~m2 & o2 );
  auto const low = xor0( t[3], pair_parity );
  auto const mid = ( ( ( ~t[0] & r[2] ) & ~r[4] ) | ( ( ( t[0] & ~t[1] ) & r[1] ) & ~r[3] ) ) |
                   ( ( ( t[1] & ~t[2] ) & ( r[4] | ~r[2] ) ) | ( t[2] & ( r[3] | ~r[1] ) ) );
  auto const high = ( ( r[4] | ( t[0] & r[3] ) ) | ( t[1] & r[2] ) ) | ( t[2] & r[1] );
  b.templates = { low, mid, high };
  return b;
}

/*! \brief Parity of seven standard bits as a balanced B0 XOR tree (not a CSA).

  Leaf occurrences are 4 for the first input and 8 for the other six.
*/
inline block_spec parity7()
{
  using namespace dsl;
  block_spec b;
  b.name = "parity7";
  b.base = basis::b0;
  for ( unsigned i = 0; i < 7; ++i )
    b.inputs.push_back( std_slot( "x" + std::to_string( i ) ) );
  b.outputs = { std_slot( "p" ) };
  b.templates = { xor0( xor0( v( 0 ), xor0( v( 1 ), v( 2 ) ) ), xor0( xor0( v( 3 ), v( 4 ) ), xor0( v( 5 ), v( 6 ) ) ) ) };
  b.arithmetic = false;
  return b;
}

/* ------------------------------------------------------------------ */
/* composites                                                         */
/* ------------------------------------------------------------------ */

/*! \brief Two MDFAs; the first receives x2 ^ x3 as a pre-encoded pair with x3 in the v role. */
inline composite_spec fig2()
{
  composite_builder cb( "fig2", basis::b2 );
  auto const x1 = cb.input( std_slot( "X1" ) ), x2 = cb.input( std_slot( "X2" ) ), x3 = cb.input( std_slot( "X3" ) ),
             x4 = cb.input( std_slot( "X4" ) );
  auto const u1 = cb.input( xor_slot( "U1" ) ), u2 = cb.input( xor_slot( "U2" ) ), u3 = cb.input( xor_slot( "U3" ) );
  auto const pre = cb.add( encoder_block( encoding::xor_pair, basis::b2 ), { x2, x3 } );
  auto const m1 = cb.add( mdfa(), { x1, pre[0], u1 } );
  auto const m2 = cb.add( mdfa(), { x4, u2, u3 } );
  cb.output( std_slot( "C1" ), m1[0] );
  cb.output( std_slot( "C2" ), m2[0] );
  cb.output( xor_slot( "A1", 1 ), m1[1] );
  cb.output( xor_slot( "A2", 1 ), m2[1] );
  return cb.finish();
}

/*! \brief SFA5 plus a monotone-pair encoder re-encoding x2, x3 at the same significance. */
inline composite_spec fig3()
{
  composite_builder cb( "fig3", basis::b0 );
  auto const x1 = cb.input( std_slot( "X1" ) ), x2 = cb.input( std_slot( "X2" ) ), x3 = cb.input( std_slot( "X3" ) );
  auto const u1 = cb.input( mon_slot( "U1" ) ), u2 = cb.input( mon_slot( "U2" ) );
  auto const s = cb.add( sfa5(), { x1, u1, u2 } );
  auto const e = cb.add( encoder_block( encoding::mon_pair, basis::b0 ), { x2, x3 } );
  cb.output( std_slot( "C" ), s[0] );
  cb.output( mon_slot( "A1", 1 ), s[1] );
  cb.output( mon_slot( "A2", 0 ), e[0] );
  return cb.finish();
}

/*! \brief SFA7 and SFA7' side by side. */
inline composite_spec fig4()
{
  composite_builder cb( "fig4", basis::b0 );
  std::vector<composite_builder::signal> x;
  for ( unsigned i = 1; i <= 5; ++i )
    x.push_back( cb.input( std_slot( "X" + std::to_string( i ) ) ) );
  auto const s1 = cb.input( triple_slot( "S1" ) ), s2 = cb.input( triple_slot( "S2" ) ),
             s3 = cb.input( triple_slot( "S3" ) );
  auto const a = cb.add( sfa7(), { x[0], s1, s2 } );
  auto const b = cb.add( sfa7_prime(), { x[1], x[2], x[3], x[4], s3 } );
  cb.output( std_slot( "C1" ), a[0] );
  cb.output( std_slot( "C2" ), b[0] );
  cb.output( triple_slot( "Q1", 1 ), a[1] );
  cb.output( triple_slot( "Q2", 1 ), b[1] );
  return cb.finish();
}

/*! \brief Chain of m MDFAs closed by an FA3 on the last XOR pair (standard encoding).

  Inputs: five at significance 0 (x0, u0a, v0a, u0b, v0b), three at each
  significance 1..m-1 (x, u, v), one at significance m (y).  MDFA k takes
  the pair output of MDFA k-1 on its second pair slot; fresh pairs are
  formed by XOR pre-gates.  Outputs one bit per significance 0..m+1.
*/
inline composite_spec compose_chain( unsigned m )
{
  if ( m == 0 )
    throw lookup_error( "compose_chain: m must be at least 1" );
  composite_builder cb( "chain" + std::to_string( m ), basis::b2 );
  auto const enc = encoder_block( encoding::xor_pair, basis::b2 );
  auto const dfa = mdfa();
  std::vector<composite_builder::signal> carry_pair;
  std::vector<composite_builder::signal> sums;
  composite_builder::signal chained;
  for ( unsigned s = 0; s < m; ++s )
  {
    auto const tag = std::to_string( s );
    auto const x = cb.input( std_slot( "x" + tag, s ) );
    auto const u = cb.input( std_slot( ( s == 0 ? "u" + tag + "a" : "u" + tag ), s ) );
    auto const v = cb.input( std_slot( ( s == 0 ? "v" + tag + "a" : "v" + tag ), s ) );
    auto const p1 = cb.add( enc, { u, v } )[0];
    composite_builder::signal p2;
    if ( s == 0 )
    {
      auto const ub = cb.input( std_slot( "u0b", 0 ) );
      auto const vb = cb.input( std_slot( "v0b", 0 ) );
      p2 = cb.add( enc, { ub, vb } )[0];
    }
    else
    {
      p2 = chained;
    }
    auto const out = cb.add( dfa, { x, p1, p2 } );
    sums.push_back( out[0] );
    chained = out[1];
  }
  auto const y = cb.input( std_slot( "y" + std::to_string( m ), m ) );
  auto const fa = cb.add( full_adder_xor_pair(), { chained, y } );
  for ( unsigned s = 0; s < m; ++s )
    cb.output( std_slot( "c" + std::to_string( s ), s ), sums[s] );
  cb.output( std_slot( "c" + std::to_string( m ), m ), fa[0] );
  cb.output( std_slot( "c" + std::to_string( m + 1 ), m + 1 ), fa[1] );
  return cb.finish();
}

/*! \brief (17,6)-CSA over B0 with standard inputs and outputs.

  Inputs 0..6 feed SFA7 through two triple encoders (x1, u1 v1 w1,
  u2 v2 w2); inputs 7..11 and 12..16 each feed an SFA5 as (x, u2 v2,
  u1 v1) through monotone-pair encoders.  The sorted outputs of the three
  adders enter the (7,3)-CSA, giving outputs at significances 1, 2, 3.
  The significance-0 bit of the SFA7 group is the parity of its seven
  inputs, taken from a balanced XOR tree.
*/
inline composite_spec compose_17_6()
{
  composite_builder cb( "csa17", basis::b0 );
  std::vector<composite_builder::signal> in;
  for ( unsigned i = 0; i < 17; ++i )
    in.push_back( cb.input( std_slot( "i" + std::to_string( i ) ) ) );
  auto const tri = encoder_block( encoding::sort_triple, basis::b0 );
  auto const mon = encoder_block( encoding::mon_pair, basis::b0 );
  auto const t1 = cb.add( tri, { in[1], in[2], in[3] } )[0];
  auto const t2 = cb.add( tri, { in[4], in[5], in[6] } )[0];
  auto const q = cb.add( sfa7(), { in[0], t1, t2 } );
  auto const par = cb.add( parity7(), { in[0], in[1], in[2], in[3], in[4], in[5], in[6] } );
  std::vector<std::vector<composite_builder::signal>> fives;
  for ( unsigned base : { 7u, 12u } )
  {
    auto const p2 = cb.add( mon, { in[base + 1], in[base + 2] } )[0];
    auto const p1 = cb.add( mon, { in[base + 3], in[base + 4] } )[0];
    fives.push_back( cb.add( sfa5(), { in[base], p1, p2 } ) );
  }
  auto const top = cb.add( csa73(), { q[1], fives[0][1], fives[1][1] } );
  cb.output( std_slot( "z0" ), par[0] );
  cb.output( std_slot( "z1" ), fives[0][0] );
  cb.output( std_slot( "z2" ), fives[1][0] );
  cb.output( std_slot( "z3", 1 ), top[0] );
  cb.output( std_slot( "z4", 2 ), top[1] );
  cb.output( std_slot( "z5", 3 ), top[2] );
  return cb.finish();
}

/*! \brief Immutable registry of every library block and composite. */
struct block_library_t
{
  std::map<std::string, block_spec> blocks;
  std::map<std::string, composite_spec> composites;

  block_spec const& block( std::string const& name ) const
  {
    auto it = blocks.find( name );
    if ( it == blocks.end() )
      throw lookup_error( "unknown block '" + name + "'" );
    return it->second;
  }

  composite_spec const& composite( std::string const& name ) const
  {
    auto it = composites.find( name );
    if ( it == composites.end() )
      throw lookup_error( "unknown composite '" + name + "'" );
    return it->second;
  }
};

inline block_library_t const& block_library()
{
  static block_library_t const lib = [] {
    block_library_t l;
    for ( auto const& b : { full_adder( basis::b2 ), full_adder( basis::b0 ), half_adder( basis::b2 ), half_adder( basis::b0 ),
                            full_adder_xor_pair(), mdfa(), encoder_block( encoding::xor_pair, basis::b2 ),
                            encoder_block( encoding::mon_pair, basis::b0 ), encoder_block( encoding::sort_triple, basis::b0 ),
                            sfa5(), sfa7(), sfa7_prime(), csa73(), parity7() } )
    {
      l.blocks.emplace( b.name, b );
    }
    std::vector<composite_spec> comps = { fig2(), fig3(), fig4(), compose_17_6() };
    for ( unsigned m = 1; m <= 4; ++m )
      comps.push_back( compose_chain( m ) );
    for ( auto& c : comps )
    {
      l.blocks.emplace( c.name, flatten( c ) );
      l.composites.emplace( c.name, std::move( c ) );
    }
    return l;
  }();
  return lib;
}

} // namespace csaform

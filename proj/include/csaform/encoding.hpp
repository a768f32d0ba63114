/*!
  \file encoding.hpp
  \brief Bit encodings used on CSA inputs and outputs

  | encoding    | decoded bits | code components                 |
  |-------------|--------------|---------------------------------|
  | standard    | 1            | (x)                             |
  | xor_pair    | 2 (u, v)     | (u^v, v)                        |
  | mon_pair    | 2 (u, v)     | (u&v, u|v)                      |
  | sort_triple | 3 (u, v, w)  | (T3^1, T3^2, T3^3, u^v^w)       |

  The sorted triple is ordered from the OR down to the AND.
*/

#pragma once

#include "formula.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace csaform
{

enum class encoding
{
  standard,
  xor_pair,
  mon_pair,
  sort_triple
};

inline std::string to_string( encoding e )
{
  switch ( e )
  {
  case encoding::standard:
    return "standard";
  case encoding::xor_pair:
    return "xor_pair";
  case encoding::mon_pair:
    return "mon_pair";
  case encoding::sort_triple:
    return "sort_triple";
  }
  return "?";
}

constexpr std::size_t decoded_arity( encoding e )
{
  switch ( e )
  {
  case encoding::standard:
    return 1;
  case encoding::xor_pair:
  case encoding::mon_pair:
    return 2;
  case encoding::sort_triple:
    return 3;
  }
  return 0;
}

constexpr std::size_t component_count( encoding e )
{
  switch ( e )
  {
  case encoding::standard:
    return 1;
  case encoding::xor_pair:
  case encoding::mon_pair:
    return 2;
  case encoding::sort_triple:
    return 4;
  }
  return 0;
}

inline std::vector<std::string> component_suffixes( encoding e )
{
  switch ( e )
  {
  case encoding::standard:
    return { "" };
  case encoding::xor_pair:
    return { ".uxv", ".v" };
  case encoding::mon_pair:
    return { ".and", ".or" };
  case encoding::sort_triple:
    return { ".s1", ".s2", ".s3", ".sx" };
  }
  return {};
}

namespace dsl
{
inline formula operator&( formula const& a, formula const& b ) { return make_and( a, b ); }
inline formula operator|( formula const& a, formula const& b ) { return make_or( a, b ); }
inline formula operator^( formula const& a, formula const& b ) { return make_xor( a, b ); }
/*! \brief Negation pushed to the leaves (B0 form). */
inline formula operator~( formula const& a ) { return negate( a, basis::b0 ); }
/*! \brief XOR written over AND/OR: `a & ~b | ~a & b`. */
inline formula xor0( formula const& a, formula const& b ) { return ( a & ~b ) | ( ~a & b ); }
inline formula v( uint32_t i ) { return make_var( i ); }
} // namespace dsl

/*! \brief Formulas of the code components over the decoded bits `0..arity-1`.

  Over B0 the parity component of a sorted triple is the two-level XOR
  expansion `((u^v)^w)` with 10 leaves, twice the 5 leaves of T3^2.
*/
inline std::vector<formula> encoder_templates( encoding e, basis b )
{
  using namespace dsl;
  auto const x = [b]( formula const& l, formula const& r ) { return b == basis::b2 ? l ^ r : xor0( l, r ); };
  switch ( e )
  {
  case encoding::standard:
    return { v( 0 ) };
  case encoding::xor_pair:
    return { x( v( 0 ), v( 1 ) ), v( 1 ) };
  case encoding::mon_pair:
    return { v( 0 ) & v( 1 ), v( 0 ) | v( 1 ) };
  case encoding::sort_triple:
    return { ( v( 0 ) | v( 1 ) ) | v( 2 ), ( ( v( 0 ) | v( 1 ) ) & v( 2 ) ) | ( v( 0 ) & v( 1 ) ), ( v( 0 ) & v( 1 ) ) & v( 2 ),
             x( x( v( 0 ), v( 1 ) ), v( 2 ) ) };
  }
  return {};
}

struct decoded_value
{
  bool valid{ true };
  unsigned sum{ 0 };
};

/*! \brief Decodes component values; reports invalid code words. */
inline decoded_value decode( encoding e, std::span<bool const> c )
{
  switch ( e )
  {
  case encoding::standard:
    return { true, c[0] ? 1u : 0u };
  case encoding::xor_pair:
  {
    bool const u = c[0] != c[1];
    return { true, ( u ? 1u : 0u ) + ( c[1] ? 1u : 0u ) };
  }
  case encoding::mon_pair:
    return { !( c[0] && !c[1] ), ( c[0] ? 1u : 0u ) + ( c[1] ? 1u : 0u ) };
  case encoding::sort_triple:
  {
    bool const ordered = ( c[0] || !c[1] ) && ( c[1] || !c[2] );
    bool const parity = ( c[0] != c[1] ) != c[2];
    return { ordered && parity == c[3], ( c[0] ? 1u : 0u ) + ( c[1] ? 1u : 0u ) + ( c[2] ? 1u : 0u ) };
  }
  }
  return { false, 0 };
}

/*! \brief A typed, weighted input or output of a block. */
struct slot
{
  std::string name;
  encoding enc{ encoding::standard };
  unsigned significance{ 0 };
};

inline std::size_t total_components( std::vector<slot> const& slots )
{
  std::size_t n = 0;
  for ( auto const& s : slots )
    n += component_count( s.enc );
  return n;
}

inline std::size_t total_decoded_bits( std::vector<slot> const& slots )
{
  std::size_t n = 0;
  for ( auto const& s : slots )
    n += decoded_arity( s.enc );
  return n;
}

/*! \brief First flattened component index of every slot. */
inline std::vector<std::size_t> component_offsets( std::vector<slot> const& slots )
{
  std::vector<std::size_t> offsets;
  std::size_t n = 0;
  for ( auto const& s : slots )
  {
    offsets.push_back( n );
    n += component_count( s.enc );
  }
  return offsets;
}

inline std::vector<std::string> component_names( std::vector<slot> const& slots )
{
  std::vector<std::string> names;
  for ( auto const& s : slots )
    for ( auto const& suffix : component_suffixes( s.enc ) )
      names.push_back( s.name + suffix );
  return names;
}

} // namespace csaform

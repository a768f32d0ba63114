/*!
  \file simulate.hpp
  \brief Bit-parallel evaluation, truth tables, and single-point evaluation
*/

#pragma once

#include "formula.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace csaform
{

/*! \brief Formulas compiled to a flat straight-line program over their shared nodes.

  One call to `run` evaluates all roots on 64 assignments at once; each
  variable is given as a 64-bit word of lane values.
*/
class compiled_formulas
{
public:
  explicit compiled_formulas( std::vector<formula> const& roots )
  {
    auto const order = topological_nodes( roots );
    std::unordered_map<formula::node const*, uint32_t> slot;
    slot.reserve( order.size() );
    code_.reserve( order.size() );
    for ( auto const* n : order )
    {
      instruction ins;
      ins.kind = n->kind;
      ins.table = n->table;
      ins.value = n->value;
      ins.var = n->index;
      if ( n->left )
        ins.a = slot.at( n->left.get() );
      if ( n->right )
        ins.b = slot.at( n->right.get() );
      if ( n->kind == node_kind::variable )
        num_vars_ = std::max( num_vars_, n->index + 1 );
      slot.emplace( n, static_cast<uint32_t>( code_.size() ) );
      code_.push_back( ins );
    }
    for ( auto const& r : roots )
      outputs_.push_back( slot.at( r.get() ) );
  }

  /*! \brief One more than the largest variable index used. */
  uint32_t num_vars() const { return num_vars_; }
  std::size_t num_outputs() const { return outputs_.size(); }
  std::size_t num_nodes() const { return code_.size(); }

  /*! \brief Evaluates all outputs; `vars[i]` holds the 64 lane values of variable `i`. */
  void run( std::span<uint64_t const> vars, std::span<uint64_t> out, std::vector<uint64_t>& scratch ) const
  {
    if ( vars.size() < num_vars_ )
      throw index_error( num_vars_ - 1, vars.size() );
    scratch.resize( code_.size() );
    for ( std::size_t i = 0; i < code_.size(); ++i )
    {
      auto const& ins = code_[i];
      switch ( ins.kind )
      {
      case node_kind::variable:
        scratch[i] = vars[ins.var];
        break;
      case node_kind::constant:
        scratch[i] = ins.value ? ~uint64_t{ 0 } : 0u;
        break;
      case node_kind::negation:
        scratch[i] = ~scratch[ins.a];
        break;
      case node_kind::gate:
        scratch[i] = apply_word( ins.table, scratch[ins.a], scratch[ins.b] );
        break;
      }
    }
    for ( std::size_t o = 0; o < outputs_.size(); ++o )
      out[o] = scratch[outputs_[o]];
  }

  std::vector<uint64_t> run( std::span<uint64_t const> vars ) const
  {
    std::vector<uint64_t> out( outputs_.size() ), scratch;
    run( vars, out, scratch );
    return out;
  }

  static uint64_t apply_word( uint8_t table, uint64_t l, uint64_t r )
  {
    uint64_t result = 0;
    if ( table & 1u )
      result |= ~l & ~r;
    if ( table & 2u )
      result |= ~l & r;
    if ( table & 4u )
      result |= l & ~r;
    if ( table & 8u )
      result |= l & r;
    return result;
  }

private:
  struct instruction
  {
    node_kind kind;
    uint8_t table{ 0 };
    bool value{ false };
    uint32_t var{ 0 };
    uint32_t a{ 0 };
    uint32_t b{ 0 };
  };

  std::vector<instruction> code_;
  std::vector<uint32_t> outputs_;
  uint32_t num_vars_{ 0 };
};

/*! \brief Evaluates `f` under `assignment`; variable `i` reads `assignment[i]`. */
inline bool eval( formula const& f, std::vector<bool> const& assignment )
{
  compiled_formulas const prog( { f } );
  if ( prog.num_vars() > assignment.size() )
  {
    for ( auto const* n : topological_nodes( { f } ) )
    {
      if ( n->kind == node_kind::variable && n->index >= assignment.size() )
        throw index_error( n->index, assignment.size() );
    }
  }
  std::vector<uint64_t> vars( prog.num_vars() );
  for ( std::size_t i = 0; i < vars.size(); ++i )
    vars[i] = assignment[i] ? ~uint64_t{ 0 } : 0u;
  return prog.run( vars )[0] & 1u;
}

constexpr uint32_t max_truth_table_vars = 24;

/*! \brief Complete truth table; bit `a` is the value under assignment `a`,
           variable 0 being the least significant bit of `a`. */
class truth_table
{
public:
  truth_table() = default;

  explicit truth_table( uint32_t nvars ) : nvars_( nvars ), words_( word_count( nvars ), 0u )
  {
    if ( nvars > max_truth_table_vars )
      throw resource_error( "truth table arity " + std::to_string( nvars ) + " exceeds " +
                            std::to_string( max_truth_table_vars ) );
  }

  uint32_t num_vars() const { return nvars_; }
  uint64_t num_bits() const { return uint64_t{ 1 } << nvars_; }
  std::vector<uint64_t> const& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

  bool get( uint64_t index ) const { return ( words_[index >> 6] >> ( index & 63u ) ) & 1u; }

  void set( uint64_t index, bool v )
  {
    if ( v )
      words_[index >> 6] |= uint64_t{ 1 } << ( index & 63u );
    else
      words_[index >> 6] &= ~( uint64_t{ 1 } << ( index & 63u ) );
  }

  void mask()
  {
    if ( nvars_ < 6 )
      words_[0] &= ( uint64_t{ 1 } << ( uint64_t{ 1 } << nvars_ ) ) - 1u;
  }

  /*! \brief Bits in assignment order, e.g. "0001" for AND of two variables. */
  std::string to_string() const
  {
    std::string s;
    for ( uint64_t i = 0; i < num_bits(); ++i )
      s.push_back( get( i ) ? '1' : '0' );
    return s;
  }

  uint64_t count_ones() const
  {
    uint64_t c = 0;
    for ( auto w : words_ )
      c += static_cast<uint64_t>( __builtin_popcountll( w ) );
    return c;
  }

  friend bool operator==( truth_table const& a, truth_table const& b )
  {
    return a.nvars_ == b.nvars_ && a.words_ == b.words_;
  }

  static std::size_t word_count( uint32_t nvars ) { return nvars <= 6 ? 1u : std::size_t{ 1 } << ( nvars - 6 ); }

private:
  uint32_t nvars_{ 0 };
  std::vector<uint64_t> words_{ 0u };
};

/*! \brief Lane pattern of variable `i` in word `w` of an exhaustive enumeration. */
inline uint64_t enumeration_word( uint32_t var, uint64_t word_index )
{
  static constexpr uint64_t patterns[6] = { 0xaaaaaaaaaaaaaaaaull, 0xccccccccccccccccull, 0xf0f0f0f0f0f0f0f0ull,
                                            0xff00ff00ff00ff00ull, 0xffff0000ffff0000ull, 0xffffffff00000000ull };
  if ( var < 6 )
    return patterns[var];
  return ( ( word_index >> ( var - 6 ) ) & 1u ) ? ~uint64_t{ 0 } : 0u;
}

/*! \brief Truth tables of several formulas over the same `nvars` variables. */
inline std::vector<truth_table> truth_tables( std::vector<formula> const& fs, uint32_t nvars )
{
  if ( nvars > max_truth_table_vars )
    throw resource_error( "truth table arity " + std::to_string( nvars ) + " exceeds " +
                          std::to_string( max_truth_table_vars ) );
  compiled_formulas const prog( fs );
  if ( prog.num_vars() > nvars )
  {
    for ( auto const& f : fs )
    {
      auto const bound = support_bound( f );
      if ( bound > nvars )
        throw index_error( bound - 1, nvars );
    }
  }
  std::vector<truth_table> tts( fs.size(), truth_table( nvars ) );
  std::vector<uint64_t> vars( nvars ), out( fs.size() ), scratch;
  auto const words = truth_table::word_count( nvars );
  for ( std::size_t w = 0; w < words; ++w )
  {
    for ( uint32_t i = 0; i < nvars; ++i )
      vars[i] = enumeration_word( i, w );
    prog.run( vars, out, scratch );
    for ( std::size_t o = 0; o < fs.size(); ++o )
      tts[o].words()[w] = out[o];
  }
  for ( auto& tt : tts )
    tt.mask();
  return tts;
}

inline truth_table compute_truth_table( formula const& f, uint32_t nvars )
{
  return truth_tables( { f }, nvars )[0];
}

/*! \brief Truth table of an arbitrary predicate on assignments (test oracles, reference functions). */
template<typename Fn>
truth_table truth_table_from( uint32_t nvars, Fn&& fn )
{
  truth_table tt( nvars );
  for ( uint64_t a = 0; a < tt.num_bits(); ++a )
    tt.set( a, fn( a ) );
  return tt;
}

/*! \brief T_n^k over variables 0..n-1 as a truth table. */
inline truth_table threshold_table( uint32_t n, uint32_t k )
{
  return truth_table_from( n, [k]( uint64_t a ) { return static_cast<uint32_t>( __builtin_popcountll( a ) ) >= k; } );
}

} // namespace csaform

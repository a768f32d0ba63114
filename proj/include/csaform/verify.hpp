/*!
  \file verify.hpp
  \brief Exhaustive and sampled verification of block identities, block instantiation
*/

#pragma once

#include "blocks.hpp"
#include "simulate.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace csaform
{

struct verification_failure
{
  uint64_t assignment{ 0 };
  uint64_t input_sum{ 0 };
  uint64_t output_sum{ 0 };
  bool invalid_codeword{ false };
};

struct verification_report
{
  std::string block;
  uint32_t decoded_inputs{ 0 };
  uint64_t assignments_checked{ 0 };
  uint64_t failure_count{ 0 };
  /*! \brief The first failures in assignment order (at most `max_failures`). */
  std::vector<verification_failure> failures;
  bool exhaustive{ true };

  bool passed() const { return failure_count == 0; }
};

namespace detail
{

/*! \brief Code component words of one slot from the lane words of its decoded bits. */
inline void encode_words( encoding e, uint64_t const* bits, std::vector<uint64_t>& out )
{
  switch ( e )
  {
  case encoding::standard:
    out.push_back( bits[0] );
    break;
  case encoding::xor_pair:
    out.push_back( bits[0] ^ bits[1] );
    out.push_back( bits[1] );
    break;
  case encoding::mon_pair:
    out.push_back( bits[0] & bits[1] );
    out.push_back( bits[0] | bits[1] );
    break;
  case encoding::sort_triple:
  {
    auto const u = bits[0], v = bits[1], w = bits[2];
    out.push_back( u | v | w );
    out.push_back( ( u & v ) | ( u & w ) | ( v & w ) );
    out.push_back( u & v & w );
    out.push_back( u ^ v ^ w );
    break;
  }
  }
}

/*! \brief Checks 64 lanes; `lane_count` limits the number of meaningful lanes. */
class block_checker
{
public:
  explicit block_checker( block_spec const& b ) : block_( b ), prog_( b.templates )
  {
    for ( auto const& s : b.inputs )
      for ( std::size_t i = 0; i < decoded_arity( s.enc ); ++i )
        bit_weight_.push_back( uint64_t{ 1 } << s.significance );
  }

  uint32_t decoded_inputs() const { return static_cast<uint32_t>( bit_weight_.size() ); }

  /*! \brief `bits[i]` holds lanes of decoded input bit `i`; `assignments[l]` names lane `l`. */
  void check( std::vector<uint64_t> const& bits, std::vector<uint64_t> const& assignments, std::size_t max_failures,
              verification_report& rep )
  {
    components_.clear();
    std::size_t offset = 0;
    for ( auto const& s : block_.inputs )
    {
      encode_words( s.enc, bits.data() + offset, components_ );
      offset += decoded_arity( s.enc );
    }
    out_.resize( prog_.num_outputs() );
    prog_.run( components_, out_, scratch_ );
    bool values[4];
    sums_.assign( assignments.size(), 0 );
    for ( std::size_t lane = 0; lane < assignments.size(); ++lane )
    {
      uint64_t in_sum = 0;
      for ( std::size_t i = 0; i < bits.size(); ++i )
        if ( ( bits[i] >> lane ) & 1u )
          in_sum += bit_weight_[i];
      uint64_t out_sum = 0;
      bool invalid = false;
      std::size_t comp = 0;
      for ( auto const& s : block_.outputs )
      {
        auto const n = component_count( s.enc );
        for ( std::size_t k = 0; k < n; ++k )
          values[k] = ( out_[comp + k] >> lane ) & 1u;
        comp += n;
        auto const d = decode( s.enc, std::span<bool const>( values, n ) );
        invalid |= !d.valid;
        out_sum += uint64_t{ d.sum } << s.significance;
      }
      sums_[lane] = out_sum;
      ++rep.assignments_checked;
      bool const bad = invalid || ( block_.arithmetic && in_sum != out_sum );
      if ( bad )
      {
        ++rep.failure_count;
        if ( rep.failures.size() < max_failures )
          rep.failures.push_back( { assignments[lane], in_sum, out_sum, invalid } );
      }
    }
  }

  /*! \brief Decoded output sums of the lanes of the last `check`. */
  std::vector<uint64_t> const& output_sums() const { return sums_; }

private:
  block_spec const& block_;
  compiled_formulas prog_;
  std::vector<uint64_t> bit_weight_;
  std::vector<uint64_t> components_, out_, scratch_, sums_;
};

inline void merge_reports( verification_report& into, verification_report const& part, std::size_t max_failures )
{
  into.assignments_checked += part.assignments_checked;
  into.failure_count += part.failure_count;
  for ( auto const& f : part.failures )
    if ( into.failures.size() < max_failures )
      into.failures.push_back( f );
}

} // namespace detail

struct verify_options
{
  /*! \brief Worker threads; the merged report does not depend on this. */
  unsigned jobs{ 1 };
  std::size_t max_failures{ 16 };
};

/*! \brief Enumerates every assignment of the decoded input bits and checks
           the weighted-sum identity and output codeword validity. */
inline verification_report verify_block( block_spec const& b, verify_options const& opts = {} )
{
  verification_report rep;
  rep.block = b.name;
  auto const nbits = static_cast<uint32_t>( total_decoded_bits( b.inputs ) );
  rep.decoded_inputs = nbits;
  if ( nbits > max_truth_table_vars )
    throw resource_error( "verify_block: " + b.name + " has " + std::to_string( nbits ) + " decoded inputs (limit " +
                          std::to_string( max_truth_table_vars ) + ")" );
  auto const total = uint64_t{ 1 } << nbits;
  auto const words = ( total + 63 ) / 64;
  auto const jobs = std::max( 1u, std::min<unsigned>( opts.jobs, static_cast<unsigned>( words ) ) );
  std::vector<verification_report> parts( jobs );
  auto const worker = [&]( unsigned j ) {
    detail::block_checker checker( b );
    std::vector<uint64_t> bits( nbits ), assignments;
    auto const lo = words * j / jobs, hi = words * ( j + 1 ) / jobs;
    for ( uint64_t w = lo; w < hi; ++w )
    {
      for ( uint32_t i = 0; i < nbits; ++i )
        bits[i] = enumeration_word( i, w );
      auto const lanes = std::min<uint64_t>( 64, total - w * 64 );
      assignments.resize( lanes );
      for ( uint64_t l = 0; l < lanes; ++l )
        assignments[l] = w * 64 + l;
      checker.check( bits, assignments, opts.max_failures, parts[j] );
    }
  };
  if ( jobs == 1 )
  {
    worker( 0 );
  }
  else
  {
    std::vector<std::thread> threads;
    for ( unsigned j = 0; j < jobs; ++j )
      threads.emplace_back( worker, j );
    for ( auto& t : threads )
      t.join();
  }
  for ( auto const& p : parts )
    detail::merge_reports( rep, p, opts.max_failures );
  return rep;
}

/*! \brief Checks `samples` seeded random decoded assignments (any arity up to 64 bits). */
inline verification_report verify_block_random( block_spec const& b, uint64_t samples, uint64_t seed,
                                                verify_options const& opts = {} )
{
  verification_report rep;
  rep.block = b.name;
  rep.exhaustive = false;
  auto const nbits = static_cast<uint32_t>( total_decoded_bits( b.inputs ) );
  rep.decoded_inputs = nbits;
  if ( nbits > 64 )
    throw resource_error( "verify_block_random: more than 64 decoded inputs" );
  std::mt19937_64 rng( seed );
  detail::block_checker checker( b );
  std::vector<uint64_t> bits( nbits ), assignments;
  for ( uint64_t done = 0; done < samples; done += 64 )
  {
    auto const lanes = std::min<uint64_t>( 64, samples - done );
    for ( auto& w : bits )
      w = rng();
    assignments.assign( lanes, 0 );
    for ( uint64_t l = 0; l < lanes; ++l )
      for ( uint32_t i = 0; i < nbits; ++i )
        assignments[l] |= ( ( bits[i] >> l ) & 1u ) << i;
    checker.check( bits, assignments, opts.max_failures, rep );
  }
  return rep;
}

/*! \brief Decoded output sum of a block for one decoded input assignment (bit i of `assignment` = decoded bit i). */
inline uint64_t evaluate_block( block_spec const& b, uint64_t assignment )
{
  detail::block_checker checker( b );
  std::vector<uint64_t> bits( checker.decoded_inputs() );
  for ( uint32_t i = 0; i < bits.size(); ++i )
    bits[i] = ( assignment >> i ) & 1u;
  verification_report rep;
  checker.check( bits, { assignment }, 0, rep );
  return checker.output_sums().front();
}

/*! \brief Instantiates a block's templates with formulas for each input slot's components.

  Returns one entry per output component, keyed by component name
  (e.g. `ab.uxv`).
*/
inline std::map<std::string, formula> instantiate_block( block_spec const& b,
                                                         std::map<std::string, std::vector<formula>> const& inputs )
{
  std::vector<formula> args;
  for ( auto const& s : b.inputs )
  {
    auto it = inputs.find( s.name );
    if ( it == inputs.end() )
      throw lookup_error( "instantiate_block: " + b.name + " missing input slot '" + s.name + "'" );
    if ( it->second.size() != component_count( s.enc ) )
      throw lookup_error( "instantiate_block: " + b.name + " slot '" + s.name + "' needs " +
                          std::to_string( component_count( s.enc ) ) + " components" );
    for ( auto const& f : it->second )
    {
      auto const r = validate_basis( f, b.base, 1 );
      if ( !r.valid )
        throw basis_error( "instantiate_block: input '" + s.name + "' is not " + to_string( b.base ) + "-valid: " +
                           r.diagnostics.front() );
      args.push_back( f );
    }
  }
  std::map<std::string, formula> out;
  auto const names = component_names( b.outputs );
  for ( std::size_t i = 0; i < b.templates.size(); ++i )
    out.emplace( names[i], instantiate( b.templates[i], args, { b.base, false } ) );
  return out;
}

} // namespace csaform

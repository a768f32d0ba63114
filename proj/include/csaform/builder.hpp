/*!
  \file builder.hpp
  \brief Counting-function and symmetric-function formulas built from iterated CSA composites
*/

#pragma once

#include "blocks.hpp"
#include "cost_system.hpp"
#include "error.hpp"
#include "formula.hpp"
#include "simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace csaform
{

constexpr uint64_t max_counter_inputs = uint64_t{ 1 } << 20;

/*! \brief One code component with both polarities; `neg` is only maintained over B0. */
struct rail
{
  formula pos;
  formula neg{ make_const( true ) };
};

inline rail zero_rail() { return { make_const( false ), make_const( true ) }; }

inline rail var_rail( uint32_t i ) { return { make_var( i ), make_not( make_var( i ) ) }; }

enum class item_origin
{
  input,
  composite,
  encoder,
  decoder
};

struct pool_item
{
  std::vector<rail> components;
  double key{ 0.0 };
  uint64_t id{ 0 };
  item_origin origin{ item_origin::input };
};

struct pool_item_order
{
  bool operator()( pool_item const& a, pool_item const& b ) const { return std::tie( a.key, a.id ) < std::tie( b.key, b.id ); }
};

/*! \brief Formulas waiting to be summed, bucketed by encoding and significance. */
class formula_pool
{
public:
  using bucket = std::multiset<pool_item, pool_item_order>;

  void add( encoding e, unsigned sig, std::vector<rail> comps, double key, item_origin origin = item_origin::input )
  {
    buckets_[{ e, sig }].insert( pool_item{ std::move( comps ), key, next_id_++, origin } );
  }

  /*! \brief Removes and returns up to `k` smallest items of a bucket. */
  std::vector<pool_item> take( encoding e, unsigned sig, std::size_t k )
  {
    std::vector<pool_item> out;
    auto it = buckets_.find( { e, sig } );
    if ( it == buckets_.end() )
      return out;
    auto& b = it->second;
    while ( out.size() < k && !b.empty() )
    {
      out.push_back( std::move( b.extract( b.begin() ).value() ) );
    }
    if ( b.empty() )
      buckets_.erase( it );
    return out;
  }

  std::size_t size( encoding e, unsigned sig ) const
  {
    auto it = buckets_.find( { e, sig } );
    return it == buckets_.end() ? 0 : it->second.size();
  }

  /*! \brief Decoded bits held at one significance. */
  uint64_t bits( unsigned sig ) const
  {
    uint64_t n = 0;
    for ( auto const& [k, b] : buckets_ )
      if ( k.second == sig )
        n += b.size() * decoded_arity( k.first );
    return n;
  }

  std::vector<encoding> encodings_at( unsigned sig ) const
  {
    std::vector<encoding> out;
    for ( auto const& [k, b] : buckets_ )
      if ( k.second == sig && !b.empty() )
        out.push_back( k.first );
    return out;
  }

  std::optional<unsigned> lowest_over( uint64_t threshold ) const
  {
    std::set<unsigned> sigs;
    for ( auto const& [k, b] : buckets_ )
      sigs.insert( k.second );
    for ( auto s : sigs )
      if ( bits( s ) > threshold )
        return s;
    return std::nullopt;
  }

  bool empty() const { return buckets_.empty(); }
  std::map<std::pair<encoding, unsigned>, bucket> const& buckets() const { return buckets_; }
  uint64_t next_id() { return next_id_++; }

private:
  std::map<std::pair<encoding, unsigned>, bucket> buckets_;
  uint64_t next_id_{ 0 };
};

enum class schedule_order
{
  /*! \brief All crowded significances advance together, one round at a time. */
  rounds,
  /*! \brief The lowest crowded significance is drained first. */
  lowest_significance
};

struct build_options
{
  basis base{ basis::b2 };
  /*! \brief fig2, fig3, fig4, chain1..chain4, csa17; empty selects fig2 (B2) or fig4 (B0). */
  std::string csa;
  unsigned threshold{ 3 };
  schedule_order schedule{ schedule_order::rounds };
  uint64_t seed{ 1 };

  std::string composite_name() const
  {
    if ( !csa.empty() )
      return csa;
    return base == basis::b2 ? "fig2" : "fig4";
  }
};

struct build_stats
{
  uint64_t applications{ 0 };
  uint64_t encoder_uses{ 0 };
  uint64_t padded_slots{ 0 };
  uint64_t decoded_items{ 0 };
  uint64_t final_adders{ 0 };
  /*! \brief Encoded slots were only ever filled from composite outputs or encoder blocks. */
  bool closure{ true };
};

struct counter_build
{
  std::string csa;
  std::vector<formula> bits;
  std::vector<rail> rails;
  build_stats stats;
};

/*! \brief A composite prepared for repeated application, with its slot weight order. */
struct csa_fixture
{
  std::string name;
  composite_spec composite;
  block_spec flat;
  std::vector<formula> negated_templates;
  /*! \brief One weight per input slot; within a bucket small formulas go to small weights. */
  std::vector<double> slot_weights;
  double alpha{ 1.0 };
};

namespace detail
{

inline std::vector<double> fixture_weights( std::string const& name, composite_spec const& c )
{
  auto const from_params = [&]( std::string const& params ) {
    auto const ps = paper_params( params );
    std::vector<double> w;
    for ( auto const& s : c.inputs )
      w.push_back( ps.weights.at( s.name ) );
    return w;
  };
  if ( name == "fig2" )
    return from_params( "paper-mdfa" );
  if ( name == "fig3" )
    return from_params( "paper-sfa5" );
  if ( name == "fig4" )
    return from_params( "paper-sfa7" );
  if ( name == "csa17" )
  {
    static std::vector<double> const w = { 1.0,          0.5575225349, 0.5575225349, 0.4477306739, 0.4477306739, 0.4477306739,
                                           0.4477306739, 0.4767881315, 0.4767881315, 0.4767881315, 0.2431132939, 0.2431132939,
                                           0.4767881315, 0.4767881315, 0.4767881315, 0.2431132939, 0.2431132939 };
    return w;
  }
  if ( name.rfind( "chain", 0 ) == 0 )
  {
    static std::map<std::string, double> const named = {
        { "x0", 0.006204606565 }, { "u0a", 0.006204606565 }, { "v0a", 0.00321952587 }, { "u0b", 0.01389488814 },
        { "v0b", 0.007729910564 }, { "x1", 0.01790895462 },  { "u1", 0.01790895462 },  { "v1", 0.00926652983 },
        { "x2", 0.05173771509 },  { "u2", 0.05173771509 },  { "v2", 0.02692624212 },  { "x3", 0.1282114818 },
        { "u3", 0.1282114818 },   { "v3", 0.0586856056 } };
    std::vector<double> w;
    for ( auto const& s : c.inputs )
    {
      auto it = named.find( s.name );
      w.push_back( it == named.end() ? 1.0 : it->second );
    }
    return w;
  }
  return std::vector<double>( c.inputs.size(), 1.0 );
}

inline double fixture_alpha( std::string const& name )
{
  if ( name == "fig2" || name.rfind( "chain", 0 ) == 0 )
    return *paper_params( "paper-mdfa" ).alpha;
  if ( name == "fig4" || name == "csa17" )
    return *paper_params( "paper-sfa7" ).alpha;
  return 1.0;
}

inline std::vector<formula> negate_all( std::vector<formula> const& ts )
{
  std::vector<formula> out;
  for ( auto const& t : ts )
    out.push_back( negate( t, basis::b0 ) );
  return out;
}

/*! \brief Applies block templates to railed arguments. */
inline std::vector<rail> apply_templates( block_spec const& b, std::vector<formula> const& negated, basis target,
                                          std::vector<rail> const& args )
{
  std::vector<rail> out;
  out.reserve( b.templates.size() );
  if ( target == basis::b2 )
  {
    std::vector<formula> pos;
    for ( auto const& a : args )
      pos.push_back( a.pos );
    for ( auto const& t : b.templates )
      out.push_back( { instantiate( t, pos, { basis::b2, true } ), make_const( true ) } );
    return out;
  }
  std::vector<formula> pos, neg;
  for ( auto const& a : args )
  {
    pos.push_back( a.pos );
    neg.push_back( a.neg );
  }
  for ( std::size_t i = 0; i < b.templates.size(); ++i )
  {
    rail r;
    r.pos = instantiate_dual_rail( b.templates[i], pos, neg, true );
    if ( target == basis::b0 )
      r.neg = instantiate_dual_rail( negated[i], pos, neg, true );
    out.push_back( std::move( r ) );
  }
  return out;
}

/*! \brief A block together with its negated templates (for B0 dual-rail application). */
struct prepared_block
{
  block_spec block;
  std::vector<formula> negated;

  explicit prepared_block( block_spec b ) : block( std::move( b ) )
  {
    if ( block.base == basis::b0 )
      negated = negate_all( block.templates );
  }

  std::vector<rail> operator()( basis target, std::vector<rail> const& args ) const
  {
    return apply_templates( block, negated, target, args );
  }
};

inline bool is_zero_item( std::vector<rail> const& comps )
{
  return std::all_of( comps.begin(), comps.end(), []( rail const& r ) { return r.pos.is_const( false ); } );
}

} // namespace detail

inline csa_fixture make_fixture( std::string const& name )
{
  auto const& lib = block_library();
  csa_fixture f;
  f.name = name;
  f.composite = lib.composite( name );
  f.flat = lib.block( name );
  if ( f.flat.base == basis::b0 )
    f.negated_templates = detail::negate_all( f.flat.templates );
  f.slot_weights = detail::fixture_weights( name, f.composite );
  f.alpha = detail::fixture_alpha( name );
  return f;
}

/*! \brief Names accepted by `build_options::csa`. */
inline std::vector<std::string> counter_composites()
{
  return { "fig2", "fig3", "fig4", "chain1", "chain2", "chain3", "chain4", "csa17" };
}

/*! \brief Size key of a pooled item: leaf count for standard items, the slot cost measure otherwise. */
inline double item_key( encoding e, std::vector<rail> const& comps, double alpha )
{
  std::vector<double> sizes;
  for ( auto const& r : comps )
    sizes.push_back( static_cast<double>( r.pos.leaf_count() ) );
  return slot_cost( e, sizes, alpha );
}

/*! \brief AND/OR/XOR on rails with constant folding; over B0 both polarities are kept. */
struct rail_ops
{
  basis base;

  rail land( rail const& a, rail const& b ) const
  {
    rail r;
    r.pos = fold_gate( gate_table::and_, a.pos, b.pos, base );
    if ( base == basis::b0 )
      r.neg = fold_gate( gate_table::or_, a.neg, b.neg, base );
    return r;
  }

  rail lor( rail const& a, rail const& b ) const
  {
    rail r;
    r.pos = fold_gate( gate_table::or_, a.pos, b.pos, base );
    if ( base == basis::b0 )
      r.neg = fold_gate( gate_table::and_, a.neg, b.neg, base );
    return r;
  }

  rail lnot( rail const& a ) const
  {
    if ( base == basis::b0 )
      return { a.neg, a.pos };
    return { negate( a.pos, basis::b2 ), make_const( true ) };
  }

  rail lxor( rail const& a, rail const& b ) const
  {
    if ( base == basis::b2 )
      return { fold_gate( gate_table::xor_, a.pos, b.pos, base ), make_const( true ) };
    return lor( land( a, lnot( b ) ), land( lnot( a ), b ) );
  }

  /*! \brief x ? hi : lo */
  rail mux( rail const& x, rail const& hi, rail const& lo ) const { return lor( land( x, hi ), land( lnot( x ), lo ) ); }
};

namespace detail
{

class counter_scheduler
{
public:
  counter_scheduler( uint64_t n, build_options const& opts )
      : n_( n ), opts_( opts ), fix_( make_fixture( opts.composite_name() ) ),
        xor_enc_( encoder_block( encoding::xor_pair, basis::b2 ) ),
        xor_enc_b0_( encoder_block( encoding::xor_pair, basis::b0 ) ),
        mon_enc_( encoder_block( encoding::mon_pair, basis::b0 ) ),
        tri_enc_( encoder_block( encoding::sort_triple, basis::b0 ) ), fa_( full_adder( opts.base ) ),
        ha_( half_adder( opts.base ) )
  {
    if ( opts.base == basis::b0 && fix_.flat.base != basis::b0 )
      throw basis_error( "build: composite " + fix_.name + " is not a B0 construction" );
    for ( std::size_t i = 0; i < fix_.composite.inputs.size(); ++i )
    {
      auto const& s = fix_.composite.inputs[i];
      groups_[{ s.enc, s.significance }].push_back( i );
    }
    for ( auto const& in : fix_.composite.inputs )
      if ( in.significance == 0 )
        base_capacity_ += decoded_arity( in.enc );
    for ( auto& [k, idx] : groups_ )
      std::stable_sort( idx.begin(), idx.end(),
                        [&]( std::size_t a, std::size_t b ) { return fix_.slot_weights[a] < fix_.slot_weights[b]; } );
  }

  counter_build run()
  {
    for ( uint32_t i = 0; i < n_; ++i )
      pool_.add( encoding::standard, 0, { var_rail( i ) }, 1.0 );
    uint64_t guard = 0;
    auto const guard_limit = 64 * n_ + 1024;
    if ( opts_.schedule == schedule_order::lowest_significance )
    {
      while ( auto s = pool_.lowest_over( opts_.threshold ) )
      {
        if ( ++guard > guard_limit )
          throw error( "build_counter: scheduler did not converge" );
        apply_at( *s, nullptr );
      }
    }
    else
    {
      std::vector<staged_item> staged;
      while ( true )
      {
        std::vector<unsigned> crowded;
        for ( auto const& [k, b] : pool_.buckets() )
          if ( pool_.bits( k.second ) > opts_.threshold &&
               ( crowded.empty() || crowded.back() != k.second ) )
            crowded.push_back( k.second );
        if ( crowded.empty() )
          break;
        if ( ++guard > guard_limit )
          throw error( "build_counter: scheduler did not converge" );
        for ( auto s : crowded )
        {
          auto const apps = std::max<uint64_t>( 1, pool_.bits( s ) / base_capacity_ );
          for ( uint64_t a = 0; a < apps && pool_.bits( s ) > 0; ++a )
            apply_at( s, &staged );
        }
        for ( auto& st : staged )
          add_item( st.enc, st.sig, std::move( st.comps ), item_origin::composite );
        staged.clear();
      }
    }
    finish();
    counter_build out;
    out.csa = fix_.name;
    out.rails = std::move( result_ );
    for ( auto const& r : out.rails )
      out.bits.push_back( r.pos );
    out.stats = stats_;
    return out;
  }

private:
  std::vector<rail> encode( encoding e, std::vector<rail> const& bits )
  {
    ++stats_.encoder_uses;
    switch ( e )
    {
    case encoding::xor_pair:
      return opts_.base == basis::b2 ? xor_enc_( basis::b2, bits ) : xor_enc_b0_( basis::b0, bits );
    case encoding::mon_pair:
      return mon_enc_( opts_.base, bits );
    case encoding::sort_triple:
      return tri_enc_( opts_.base, bits );
    case encoding::standard:
      break;
    }
    return bits;
  }

  /*! \brief Standard bits with the same weighted sum as an encoded item. */
  std::vector<rail> decode_item( encoding e, std::vector<rail> const& comps )
  {
    ++stats_.decoded_items;
    switch ( e )
    {
    case encoding::standard:
      return comps;
    case encoding::xor_pair:
    {
      // (u ^ v, v) -> u, v
      auto const u = rail_ops{ opts_.base }.lxor( comps[0], comps[1] );
      return { u, comps[1] };
    }
    case encoding::mon_pair:
      return { comps[0], comps[1] };
    case encoding::sort_triple:
      return { comps[0], comps[1], comps[2] };
    }
    return comps;
  }

  void add_item( encoding e, unsigned sig, std::vector<rail> comps, item_origin origin )
  {
    if ( detail::is_zero_item( comps ) )
      return;
    auto const key = item_key( e, comps, fix_.alpha );
    pool_.add( e, sig, std::move( comps ), key, origin );
  }

  /*! \brief (generate, propagate) of columns [lo, hi), split in the middle. */
  static std::pair<rail, rail> generate( rail_ops const& ops, std::vector<rail> const& g, std::vector<rail> const& p,
                                         unsigned lo, unsigned hi )
  {
    if ( hi - lo == 1 )
      return { g[lo], p[lo] };
    auto const mid = lo + ( hi - lo ) / 2;
    auto const low = generate( ops, g, p, lo, mid );
    auto const high = generate( ops, g, p, mid, hi );
    return { ops.lor( high.first, ops.land( high.second, low.first ) ), ops.land( high.second, low.second ) };
  }

  struct staged_item
  {
    encoding enc;
    unsigned sig;
    std::vector<rail> comps;
  };

  void apply_at( unsigned s, std::vector<staged_item>* staged )
  {
    // encodings this composite cannot take at its base significance are decoded first
    for ( auto e : pool_.encodings_at( s ) )
    {
      if ( e == encoding::standard || groups_.count( { e, 0u } ) )
        continue;
      for ( auto& item : pool_.take( e, s, pool_.size( e, s ) ) )
        for ( auto& b : decode_item( e, item.components ) )
          add_item( encoding::standard, s, { b }, item_origin::decoder );
    }

    std::vector<std::vector<rail>> slot_args( fix_.composite.inputs.size() );
    std::map<std::pair<encoding, unsigned>, std::vector<pool_item>> drawn;
    for ( auto const& [k, idx] : groups_ )
      drawn[k] = pool_.take( k.first, s + k.second, idx.size() );
    for ( auto const& [k, idx] : groups_ )
    {
      if ( k.first == encoding::standard )
        continue;
      auto& items = drawn[k];
      auto const arity = decoded_arity( k.first );
      while ( items.size() < idx.size() )
      {
        auto bits = pool_.take( encoding::standard, s + k.second, arity );
        if ( bits.empty() )
          break;
        std::vector<rail> in;
        for ( auto& b : bits )
          in.push_back( b.components.front() );
        while ( in.size() < arity )
          in.push_back( zero_rail() );
        auto comps = encode( k.first, in );
        auto const key = item_key( k.first, comps, fix_.alpha );
        items.push_back( pool_item{ std::move( comps ), key, pool_.next_id(), item_origin::encoder } );
      }
    }
    for ( auto const& [k, idx] : groups_ )
    {
      auto& items = drawn[k];
      if ( k.first != encoding::standard )
        for ( auto const& it : items )
          stats_.closure &= it.origin == item_origin::composite || it.origin == item_origin::encoder;
      std::stable_sort( items.begin(), items.end(), pool_item_order{} );
      // zeros count as the smallest formulas and take the smallest-weight slots
      auto const pad = idx.size() - items.size();
      stats_.padded_slots += pad;
      for ( std::size_t j = 0; j < idx.size(); ++j )
      {
        auto const slot_index = idx[j];
        auto const enc = fix_.composite.inputs[slot_index].enc;
        if ( j < pad )
          slot_args[slot_index].assign( component_count( enc ), zero_rail() );
        else
          slot_args[slot_index] = std::move( items[j - pad].components );
      }
    }
    std::vector<rail> args;
    for ( auto& a : slot_args )
      args.insert( args.end(), a.begin(), a.end() );
    auto const outs = detail::apply_templates( fix_.flat, fix_.negated_templates, opts_.base, args );
    ++stats_.applications;
    std::size_t comp = 0;
    for ( auto const& o : fix_.composite.outputs )
    {
      auto const cnt = component_count( o.enc );
      std::vector<rail> comps( outs.begin() + comp, outs.begin() + comp + cnt );
      comp += cnt;
      if ( staged )
        staged->push_back( { o.enc, s + o.significance, std::move( comps ) } );
      else
        add_item( o.enc, s + o.significance, std::move( comps ), item_origin::composite );
    }
  }

  void finish()
  {
    std::map<unsigned, std::vector<rail>> columns;
    auto const push = [&]( std::map<unsigned, std::vector<rail>>& cols, unsigned col, rail r ) {
      if ( !r.pos.is_const( false ) )
        cols[col].push_back( std::move( r ) );
    };
    for ( auto const& [k, b] : pool_.buckets() )
      for ( auto const& item : b )
        for ( auto& r : ( k.first == encoding::standard ? item.components : decode_item( k.first, item.components ) ) )
          push( columns, k.second, r );
    auto const width = static_cast<unsigned>( std::bit_width( n_ ) );
    auto const by_size = []( rail const& a, rail const& b ) { return a.pos.leaf_count() < b.pos.leaf_count(); };

    // carry-save layers until every column holds at most two bits
    auto const crowded = [&] {
      return std::any_of( columns.begin(), columns.end(), []( auto const& c ) { return c.second.size() > 2; } );
    };
    while ( crowded() )
    {
      std::map<unsigned, std::vector<rail>> next;
      for ( auto& [col, bits] : columns )
      {
        std::stable_sort( bits.begin(), bits.end(), by_size );
        std::size_t i = 0;
        for ( ; i + 3 <= bits.size(); i += 3 )
        {
          auto const out = fa_( opts_.base, { bits[i], bits[i + 1], bits[i + 2] } );
          ++stats_.final_adders;
          push( next, col, out[0] );
          if ( col + 1 < width )
            push( next, col + 1, out[1] );
        }
        for ( ; i < bits.size(); ++i )
          push( next, col, bits[i] );
      }
      columns = std::move( next );
    }

    // two rows left: carry-lookahead sum
    rail_ops const ops{ opts_.base };
    std::vector<rail> g( width, zero_rail() ), p( width, zero_rail() );
    for ( unsigned col = 0; col < width; ++col )
    {
      auto it = columns.find( col );
      if ( it == columns.end() )
        continue;
      auto const& bits = it->second;
      if ( bits.size() == 1 )
      {
        p[col] = bits[0];
      }
      else if ( bits.size() == 2 )
      {
        g[col] = ops.land( bits[0], bits[1] );
        p[col] = ops.lxor( bits[0], bits[1] );
      }
    }
    result_.assign( width, zero_rail() );
    for ( unsigned k = 0; k < width; ++k )
      result_[k] = k == 0 ? p[0] : ops.lxor( p[k], generate( ops, g, p, 0, k ).first );
  }

  uint64_t n_;
  build_options opts_;
  csa_fixture fix_;
  prepared_block xor_enc_, xor_enc_b0_, mon_enc_, tri_enc_, fa_, ha_;
  std::map<std::pair<encoding, unsigned>, std::vector<std::size_t>> groups_;
  uint64_t base_capacity_{ 0 };
  formula_pool pool_;
  build_stats stats_;
  std::vector<rail> result_;
};

} // namespace detail

/*! \brief Bits f_0..f_L of the number of ones among x_0..x_{n-1}, with build statistics. */
inline counter_build build_counter_detailed( uint64_t n, build_options const& opts = {} )
{
  if ( n < 1 || n > max_counter_inputs )
    throw error( "build_counter: n must lie in [1, 2^20], got " + std::to_string( n ) );
  if ( opts.threshold < 3 )
    throw error( "build_counter: threshold must be at least 3" );
  return detail::counter_scheduler( n, opts ).run();
}

inline std::vector<formula> build_counter( uint64_t n, build_options const& opts = {} )
{
  return build_counter_detailed( n, opts ).bits;
}

inline formula build_bit( uint64_t n, unsigned k, build_options const& opts = {} )
{
  if ( n < 1 || n > max_counter_inputs )
    throw error( "build_bit: n must lie in [1, 2^20], got " + std::to_string( n ) );
  auto const width = static_cast<unsigned>( std::bit_width( n ) );
  if ( k >= width )
    throw error( "build_bit: bit " + std::to_string( k ) + " out of range [0, " + std::to_string( width - 1 ) + "]" );
  return build_counter_detailed( n, opts ).bits[k];
}

namespace detail
{

/*! \brief Decision over weight bits `hi-1 .. 0`; `nullopt` marks weights above n. */
inline std::optional<rail> symmetric_tree( std::vector<std::optional<bool>> const& values, std::vector<rail> const& w,
                                           unsigned bit, uint64_t offset, basis b )
{
  if ( bit == 0 )
  {
    auto const v = offset < values.size() ? values[offset] : std::nullopt;
    if ( !v )
      return std::nullopt;
    return *v ? rail{ make_const( true ), make_const( false ) } : zero_rail();
  }
  auto const i = bit - 1;
  auto const lo = symmetric_tree( values, w, i, offset, b );
  auto const hi = symmetric_tree( values, w, i, offset | ( uint64_t{ 1 } << i ), b );
  if ( !lo )
    return hi;
  if ( !hi )
    return lo;
  if ( lo->pos.is_const() && hi->pos.is_const() && lo->pos.value() == hi->pos.value() )
    return lo;
  return rail_ops{ b }.mux( w[i], *hi, *lo );
}

} // namespace detail

/*! \brief Formula for the symmetric function with `values[w]` on inputs of weight w. */
inline formula build_symmetric( std::vector<bool> const& values, uint64_t n, build_options const& opts = {} )
{
  if ( values.size() != n + 1 )
    throw error( "build_symmetric: expected " + std::to_string( n + 1 ) + " values, got " +
                 std::to_string( values.size() ) );
  auto const counter = build_counter_detailed( n, opts );
  std::vector<std::optional<bool>> vals( values.begin(), values.end() );
  auto const width = static_cast<unsigned>( counter.rails.size() );
  auto const r = detail::symmetric_tree( vals, counter.rails, width, 0, opts.base );
  return r ? r->pos : make_const( false );
}

/* ------------------------------------------------------------------ */
/* oracle checks                                                      */
/* ------------------------------------------------------------------ */

struct oracle_report
{
  uint64_t checked{ 0 };
  uint64_t mismatches{ 0 };
  std::optional<uint64_t> first_mismatch;
  bool exhaustive{ true };

  bool passed() const { return mismatches == 0; }
};

namespace detail
{

/*! \brief Runs `accept(lane_values, popcounts, out_words)` over exhaustive or random assignments of n variables. */
template<class Check>
oracle_report check_assignments( std::vector<formula> const& fs, uint64_t n, std::optional<uint64_t> samples,
                                 uint64_t seed, Check&& check )
{
  oracle_report rep;
  compiled_formulas prog( fs );
  if ( prog.num_vars() > n )
    throw index_error( prog.num_vars() - 1, n );
  std::vector<uint64_t> vars( n ), out( fs.size() ), scratch;
  std::vector<uint64_t> counts( 64 );
  if ( !samples )
  {
    if ( n > max_truth_table_vars )
      throw resource_error( "exhaustive check limited to " + std::to_string( max_truth_table_vars ) + " variables" );
    auto const total = uint64_t{ 1 } << n;
    for ( uint64_t w = 0; w * 64 < total; ++w )
    {
      for ( uint32_t i = 0; i < n; ++i )
        vars[i] = enumeration_word( i, w );
      prog.run( vars, out, scratch );
      auto const lanes = std::min<uint64_t>( 64, total - w * 64 );
      for ( uint64_t l = 0; l < lanes; ++l )
      {
        ++rep.checked;
        auto const a = w * 64 + l;
        if ( !check( out, l, static_cast<uint64_t>( std::popcount( a ) ) ) )
        {
          ++rep.mismatches;
          if ( !rep.first_mismatch )
            rep.first_mismatch = a;
        }
      }
    }
    return rep;
  }
  rep.exhaustive = false;
  std::mt19937_64 rng( seed );
  for ( uint64_t done = 0; done < *samples; done += 64 )
  {
    for ( auto& v : vars )
      v = rng();
    prog.run( vars, out, scratch );
    std::fill( counts.begin(), counts.end(), 0 );
    for ( auto v : vars )
      for ( unsigned l = 0; l < 64; ++l )
        counts[l] += ( v >> l ) & 1u;
    auto const lanes = std::min<uint64_t>( 64, *samples - done );
    for ( uint64_t l = 0; l < lanes; ++l )
    {
      ++rep.checked;
      if ( !check( out, l, counts[l] ) )
      {
        ++rep.mismatches;
        if ( !rep.first_mismatch )
          rep.first_mismatch = done + l;
      }
    }
  }
  return rep;
}

} // namespace detail

/*! \brief Compares counter bits with popcount; `samples` empty means exhaustive. */
inline oracle_report check_counter( std::vector<formula> const& bits, uint64_t n, std::optional<uint64_t> samples = {},
                                    uint64_t seed = 1 )
{
  return detail::check_assignments( bits, n, samples, seed, [&]( std::vector<uint64_t> const& out, uint64_t lane, uint64_t pop ) {
    uint64_t v = 0;
    for ( std::size_t k = 0; k < out.size(); ++k )
      v |= ( ( out[k] >> lane ) & 1u ) << k;
    return v == pop;
  } );
}

inline oracle_report check_symmetric( formula const& f, std::vector<bool> const& values, uint64_t n,
                                      std::optional<uint64_t> samples = {}, uint64_t seed = 1 )
{
  return detail::check_assignments( { f }, n, samples, seed, [&]( std::vector<uint64_t> const& out, uint64_t lane, uint64_t pop ) {
    return static_cast<bool>( ( out[0] >> lane ) & 1u ) == values.at( pop );
  } );
}

/* ------------------------------------------------------------------ */
/* growth measurement                                                 */
/* ------------------------------------------------------------------ */

struct growth_row
{
  uint64_t n{ 0 };
  unsigned bit{ 0 };
  uint64_t leaves{ 0 };
};

struct growth_report
{
  std::vector<growth_row> rows;
  double slope{ 0.0 };
  double intercept{ 0.0 };
  /*! \brief Root-mean-square residual of the log-log fit. */
  double residual{ 0.0 };
  /*! \brief n values at which the measured size decreased. */
  std::vector<uint64_t> monotonicity_violations;
  build_options options;
  std::optional<unsigned> bit;

  std::string to_csv() const
  {
    std::string s = "n,bit,leaves\n";
    for ( auto const& r : rows )
      s += std::to_string( r.n ) + "," + std::to_string( r.bit ) + "," + std::to_string( r.leaves ) + "\n";
    return s;
  }
};

/*! \brief Least-squares slope of log y against log x. */
inline std::tuple<double, double, double> loglog_fit( std::vector<double> const& x, std::vector<double> const& y )
{
  auto const m = static_cast<double>( x.size() );
  if ( x.size() < 2 )
    return { 0.0, x.empty() ? 0.0 : std::log( y[0] ), 0.0 };
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for ( std::size_t i = 0; i < x.size(); ++i )
  {
    auto const lx = std::log( x[i] ), ly = std::log( y[i] );
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  auto const den = m * sxx - sx * sx;
  auto const slope = den == 0.0 ? 0.0 : ( m * sxy - sx * sy ) / den;
  auto const icpt = ( sy - slope * sx ) / m;
  double ss = 0;
  for ( std::size_t i = 0; i < x.size(); ++i )
  {
    auto const r = std::log( y[i] ) - ( icpt + slope * std::log( x[i] ) );
    ss += r * r;
  }
  return { slope, icpt, std::sqrt( ss / m ) };
}

/*! \brief Builds each counter and fits the growth of one bit (the top bit when `bit` is empty). */
inline growth_report fit_growth( std::vector<uint64_t> const& n_list, std::optional<unsigned> bit,
                                 build_options const& opts = {} )
{
  growth_report rep;
  rep.options = opts;
  rep.bit = bit;
  std::vector<double> xs, ys;
  for ( auto n : n_list )
  {
    auto const bits = build_counter( n, opts );
    auto const k = bit ? *bit : static_cast<unsigned>( bits.size() - 1 );
    if ( k >= bits.size() )
      throw error( "fit_growth: bit " + std::to_string( k ) + " does not exist for n = " + std::to_string( n ) );
    auto const leaves = bits[k].leaf_count();
    if ( !rep.rows.empty() && leaves < rep.rows.back().leaves )
      rep.monotonicity_violations.push_back( n );
    rep.rows.push_back( { n, k, leaves } );
    if ( leaves > 0 )
    {
      xs.push_back( static_cast<double>( n ) );
      ys.push_back( static_cast<double>( leaves ) );
    }
  }
  std::tie( rep.slope, rep.intercept, rep.residual ) = loglog_fit( xs, ys );
  return rep;
}

} // namespace csaform

/*!
  \file formula.hpp
  \brief Immutable Boolean formula IR over the bases B2 and B0

  A formula is a tree of variables, constants, negations and binary gates.
  Nodes are immutable and reference-counted, so identical subtrees may be
  shared in memory; every size measure is nevertheless the size of the
  expanded tree.  The size of a formula is its number of variable leaves.
*/

#pragma once

#include "error.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace csaform
{

enum class basis
{
  b2, ///< all 2-input gates, negation anywhere
  b0  ///< AND/OR gates, negation only on variable leaves
};

inline std::string to_string( basis b )
{
  return b == basis::b2 ? "b2" : "b0";
}

/*! \brief Gate tables indexed by `(left << 1) | right`. */
namespace gate_table
{
constexpr uint8_t and_ = 0b1000u;
constexpr uint8_t or_ = 0b1110u;
constexpr uint8_t xor_ = 0b0110u;
constexpr uint8_t xnor_ = 0b1001u;

constexpr bool apply( uint8_t table, bool left, bool right )
{
  return ( table >> ( ( left ? 2u : 0u ) | ( right ? 1u : 0u ) ) ) & 1u;
}
} // namespace gate_table

enum class node_kind : uint8_t
{
  variable,
  constant,
  negation,
  gate
};

/*! \brief Saturating addition for leaf counts of very large trees. */
inline uint64_t saturating_add( uint64_t a, uint64_t b )
{
  return a > std::numeric_limits<uint64_t>::max() - b ? std::numeric_limits<uint64_t>::max() : a + b;
}

inline uint64_t saturating_mul( uint64_t a, uint64_t b )
{
  if ( a != 0 && b > std::numeric_limits<uint64_t>::max() / a )
  {
    return std::numeric_limits<uint64_t>::max();
  }
  return a * b;
}

class formula
{
public:
  struct node
  {
    node_kind kind{ node_kind::constant };
    uint8_t table{ 0 };
    bool value{ false };
    uint32_t index{ 0 };
    std::shared_ptr<node const> left;
    std::shared_ptr<node const> right;
    uint64_t leaves{ 0 };
  };

  /*! \brief Constant 0. */
  formula() : node_( zero_node() ) {}

  explicit formula( std::shared_ptr<node const> n ) : node_( std::move( n ) ) {}

  node_kind kind() const { return node_->kind; }
  uint32_t index() const { return node_->index; }
  bool value() const { return node_->value; }
  uint8_t table() const { return node_->table; }
  uint64_t leaf_count() const { return node_->leaves; }

  formula left() const { return formula( node_->left ); }
  formula right() const { return formula( node_->right ); }
  formula child() const { return formula( node_->left ); }

  bool is_var() const { return kind() == node_kind::variable; }
  bool is_const() const { return kind() == node_kind::constant; }
  bool is_const( bool v ) const { return is_const() && value() == v; }
  bool is_not() const { return kind() == node_kind::negation; }
  bool is_gate() const { return kind() == node_kind::gate; }
  bool is_literal() const { return is_var() || ( is_not() && child().is_var() ); }

  node const* get() const { return node_.get(); }
  std::shared_ptr<node const> const& shared() const { return node_; }

private:
  static std::shared_ptr<node const> const& zero_node()
  {
    static auto const n = std::make_shared<node const>();
    return n;
  }

  std::shared_ptr<node const> node_;
};

inline formula make_var( uint32_t index )
{
  auto n = std::make_shared<formula::node>();
  n->kind = node_kind::variable;
  n->index = index;
  n->leaves = 1;
  return formula( std::move( n ) );
}

inline formula make_const( bool value )
{
  auto n = std::make_shared<formula::node>();
  n->kind = node_kind::constant;
  n->value = value;
  return formula( std::move( n ) );
}

inline formula make_not( formula const& f )
{
  auto n = std::make_shared<formula::node>();
  n->kind = node_kind::negation;
  n->left = f.shared();
  n->leaves = f.leaf_count();
  return formula( std::move( n ) );
}

inline formula make_gate( uint8_t table, formula const& a, formula const& b )
{
  auto n = std::make_shared<formula::node>();
  n->kind = node_kind::gate;
  n->table = table & 0xfu;
  n->left = a.shared();
  n->right = b.shared();
  n->leaves = saturating_add( a.leaf_count(), b.leaf_count() );
  return formula( std::move( n ) );
}

inline formula make_and( formula const& a, formula const& b ) { return make_gate( gate_table::and_, a, b ); }
inline formula make_or( formula const& a, formula const& b ) { return make_gate( gate_table::or_, a, b ); }
inline formula make_xor( formula const& a, formula const& b ) { return make_gate( gate_table::xor_, a, b ); }

/*! \brief Structural equality of the expanded trees. */
inline bool structurally_equal( formula const& a, formula const& b )
{
  using key = std::pair<formula::node const*, formula::node const*>;
  struct key_hash
  {
    std::size_t operator()( key const& k ) const
    {
      return std::hash<void const*>{}( k.first ) * 31u ^ std::hash<void const*>{}( k.second );
    }
  };
  std::unordered_set<key, key_hash> equal;
  std::vector<key> stack{ { a.get(), b.get() } };
  while ( !stack.empty() )
  {
    auto const [x, y] = stack.back();
    stack.pop_back();
    if ( x == y || equal.count( { x, y } ) )
    {
      continue;
    }
    if ( x->kind != y->kind || x->leaves != y->leaves )
    {
      return false;
    }
    switch ( x->kind )
    {
    case node_kind::variable:
      if ( x->index != y->index )
        return false;
      break;
    case node_kind::constant:
      if ( x->value != y->value )
        return false;
      break;
    case node_kind::negation:
      stack.emplace_back( x->left.get(), y->left.get() );
      break;
    case node_kind::gate:
      if ( x->table != y->table )
        return false;
      stack.emplace_back( x->left.get(), y->left.get() );
      stack.emplace_back( x->right.get(), y->right.get() );
      break;
    }
    equal.insert( { x, y } );
  }
  return true;
}

inline bool operator==( formula const& a, formula const& b )
{
  return structurally_equal( a, b );
}

/*! \brief Distinct nodes reachable from `roots`, children before parents. */
inline std::vector<formula::node const*> topological_nodes( std::vector<formula> const& roots )
{
  std::vector<formula::node const*> order;
  std::unordered_set<formula::node const*> seen;
  std::vector<std::pair<formula::node const*, bool>> stack;
  for ( auto it = roots.rbegin(); it != roots.rend(); ++it )
  {
    stack.emplace_back( it->get(), false );
  }
  while ( !stack.empty() )
  {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if ( expanded )
    {
      order.push_back( n );
      continue;
    }
    if ( !seen.insert( n ).second )
    {
      continue;
    }
    stack.emplace_back( n, true );
    if ( n->right )
      stack.emplace_back( n->right.get(), false );
    if ( n->left )
      stack.emplace_back( n->left.get(), false );
  }
  return order;
}

/*! \brief One more than the largest variable index, 0 for variable-free formulas. */
inline uint32_t support_bound( formula const& f )
{
  uint32_t bound = 0;
  for ( auto const* n : topological_nodes( { f } ) )
  {
    if ( n->kind == node_kind::variable )
      bound = std::max( bound, n->index + 1 );
  }
  return bound;
}

/*! \brief Number of occurrences of each variable in the expanded tree.

  Computed by propagating path multiplicities over the shared node graph,
  so the cost is linear in the number of distinct nodes.
*/
inline std::vector<uint64_t> leaf_profile( formula const& f, std::size_t nslots )
{
  auto const order = topological_nodes( { f } );
  std::unordered_map<formula::node const*, uint64_t> mult;
  mult.reserve( order.size() );
  mult[f.get()] = 1;
  std::vector<uint64_t> counts( nslots, 0 );
  for ( auto it = order.rbegin(); it != order.rend(); ++it )
  {
    auto const* n = *it;
    auto const m = mult[n];
    switch ( n->kind )
    {
    case node_kind::variable:
      if ( n->index >= nslots )
        throw index_error( n->index, nslots );
      counts[n->index] = saturating_add( counts[n->index], m );
      break;
    case node_kind::constant:
      break;
    case node_kind::negation:
      mult[n->left.get()] = saturating_add( mult[n->left.get()], m );
      break;
    case node_kind::gate:
      mult[n->left.get()] = saturating_add( mult[n->left.get()], m );
      mult[n->right.get()] = saturating_add( mult[n->right.get()], m );
      break;
    }
  }
  return counts;
}

inline uint64_t leaf_count( formula const& f )
{
  return f.leaf_count();
}

struct basis_report
{
  bool valid{ true };
  std::vector<std::string> diagnostics;
};

/*! \brief Checks the structural rules of basis `b`.

  Diagnostics name the first path at which each offending node is reached,
  using `root`, then `.l`/`.r` for gate children and `.n` for negation.
*/
inline basis_report validate_basis( formula const& f, basis b, std::size_t max_diagnostics = 64 )
{
  basis_report report;
  if ( b == basis::b2 )
  {
    return report;
  }
  std::unordered_set<formula::node const*> seen;
  std::vector<std::pair<formula::node const*, std::string>> stack{ { f.get(), "root" } };
  auto const table_name = []( uint8_t t ) {
    std::string s;
    for ( auto i = 0u; i < 4u; ++i )
      s.push_back( ( t >> i ) & 1u ? '1' : '0' );
    return s;
  };
  while ( !stack.empty() )
  {
    auto [n, path] = std::move( stack.back() );
    stack.pop_back();
    if ( !seen.insert( n ).second )
      continue;
    if ( n->kind == node_kind::negation )
    {
      if ( n->left->kind != node_kind::variable )
      {
        report.valid = false;
        if ( report.diagnostics.size() < max_diagnostics )
          report.diagnostics.push_back( path + ": negation of a non-variable subformula" );
      }
      stack.emplace_back( n->left.get(), path + ".n" );
    }
    else if ( n->kind == node_kind::gate )
    {
      if ( n->table != gate_table::and_ && n->table != gate_table::or_ )
      {
        report.valid = false;
        if ( report.diagnostics.size() < max_diagnostics )
          report.diagnostics.push_back( path + ": gate " + table_name( n->table ) + " is not AND/OR" );
      }
      stack.emplace_back( n->right.get(), path + ".r" );
      stack.emplace_back( n->left.get(), path + ".l" );
    }
  }
  return report;
}

inline bool is_monotone( formula const& f )
{
  for ( auto const* n : topological_nodes( { f } ) )
  {
    if ( n->kind == node_kind::negation )
      return false;
    if ( n->kind == node_kind::gate && n->table != gate_table::and_ && n->table != gate_table::or_ )
      return false;
  }
  return true;
}

/*! \brief Swaps AND and OR and complements constants.

  The result computes `!f(!x)`; variable occurrences are unchanged.
*/
inline formula dualize_monotone( formula const& f )
{
  if ( !is_monotone( f ) )
    throw monotonicity_error( "dualize_monotone: formula contains a negation or a non-AND/OR gate" );
  std::unordered_map<formula::node const*, formula> memo;
  for ( auto const* n : topological_nodes( { f } ) )
  {
    switch ( n->kind )
    {
    case node_kind::variable:
      memo.emplace( n, make_var( n->index ) );
      break;
    case node_kind::constant:
      memo.emplace( n, make_const( !n->value ) );
      break;
    case node_kind::gate:
      memo.emplace( n, make_gate( n->table == gate_table::and_ ? gate_table::or_ : gate_table::and_, memo.at( n->left.get() ),
                                  memo.at( n->right.get() ) ) );
      break;
    case node_kind::negation:
      break;
    }
  }
  return memo.at( f.get() );
}

/*! \brief Negation that keeps `f` within basis `b`.

  Over B2 this wraps `f` in a negation node (removing a double negation).
  Over B0 the negation is pushed to the leaves by De Morgan's laws, which
  keeps the leaf count.
*/
inline formula negate( formula const& f, basis b )
{
  if ( b == basis::b2 )
  {
    if ( f.is_not() )
      return f.child();
    if ( f.is_const() )
      return make_const( !f.value() );
    return make_not( f );
  }
  std::unordered_map<formula::node const*, formula> memo;
  for ( auto const* n : topological_nodes( { f } ) )
  {
    switch ( n->kind )
    {
    case node_kind::variable:
      memo.emplace( n, make_not( make_var( n->index ) ) );
      break;
    case node_kind::constant:
      memo.emplace( n, make_const( !n->value ) );
      break;
    case node_kind::negation:
      if ( n->left->kind != node_kind::variable )
        throw basis_error( "negate(b0): negation above a non-variable subformula" );
      memo.emplace( n, formula( n->left ) );
      break;
    case node_kind::gate:
      if ( n->table == gate_table::and_ || n->table == gate_table::or_ )
      {
        memo.emplace( n, make_gate( n->table == gate_table::and_ ? gate_table::or_ : gate_table::and_,
                                    memo.at( n->left.get() ), memo.at( n->right.get() ) ) );
      }
      else
      {
        throw basis_error( "negate(b0): gate is not AND/OR" );
      }
      break;
    }
  }
  return memo.at( f.get() );
}

/*! \brief Gate construction with constant propagation.

  Constants are free under the leaf metric; folding them only removes
  dead subtrees.  Over B0 a folded AND/OR never introduces a negation.
*/
inline formula fold_gate( uint8_t table, formula const& a, formula const& b, basis target )
{
  auto const unary = [&]( bool c_is_left, bool c, formula const& other ) -> formula {
    auto const at = [&]( bool o ) { return c_is_left ? gate_table::apply( table, c, o ) : gate_table::apply( table, o, c ); };
    auto const f0 = at( false ), f1 = at( true );
    if ( f0 == f1 )
      return make_const( f0 );
    if ( !f0 && f1 )
      return other;
    return negate( other, target );
  };
  if ( a.is_const() && b.is_const() )
    return make_const( gate_table::apply( table, a.value(), b.value() ) );
  if ( a.is_const() )
    return unary( true, a.value(), b );
  if ( b.is_const() )
    return unary( false, b.value(), a );
  return make_gate( table, a, b );
}

struct instantiate_options
{
  basis target{ basis::b2 };
  bool fold_constants{ false };
};

/*! \brief Substitutes `args[i]` for every occurrence of variable `i` in `tmpl`.

  A negated slot `!Var(i)` becomes the negation of `args[i]` (pushed to the
  leaves for a B0 target).  Without constant folding the leaf count of the
  result is `sum_i profile[i] * leaf_count(args[i])`.
*/
inline formula instantiate( formula const& tmpl, std::vector<formula> const& args, instantiate_options const& opts = {} )
{
  std::unordered_map<formula::node const*, formula> memo;
  std::unordered_map<uint32_t, formula> negated_args;
  auto const arg = [&]( uint32_t i ) -> formula const& {
    if ( i >= args.size() )
      throw lookup_error( "instantiate: missing argument for slot " + std::to_string( i ) );
    return args[i];
  };
  for ( auto const* n : topological_nodes( { tmpl } ) )
  {
    switch ( n->kind )
    {
    case node_kind::variable:
      memo.emplace( n, arg( n->index ) );
      break;
    case node_kind::constant:
      memo.emplace( n, make_const( n->value ) );
      break;
    case node_kind::negation:
      if ( n->left->kind == node_kind::variable )
      {
        auto const i = n->left->index;
        auto it = negated_args.find( i );
        if ( it == negated_args.end() )
          it = negated_args.emplace( i, negate( arg( i ), opts.target ) ).first;
        memo.emplace( n, it->second );
      }
      else
      {
        memo.emplace( n, negate( memo.at( n->left.get() ), opts.target ) );
      }
      break;
    case node_kind::gate:
    {
      auto const& l = memo.at( n->left.get() );
      auto const& r = memo.at( n->right.get() );
      memo.emplace( n, opts.fold_constants ? fold_gate( n->table, l, r, opts.target ) : make_gate( n->table, l, r ) );
      break;
    }
    }
  }
  return memo.at( tmpl.get() );
}

/*! \brief B0 instantiation with both polarities of every argument supplied.

  `Var(i)` maps to `positive[i]`, `!Var(i)` to `negative[i]`.  Used when
  templates are applied repeatedly so that negations never re-expand
  already shared subformulas.
*/
inline formula instantiate_dual_rail( formula const& tmpl, std::vector<formula> const& positive,
                                      std::vector<formula> const& negative, bool fold_constants = true )
{
  std::unordered_map<formula::node const*, formula> memo;
  for ( auto const* n : topological_nodes( { tmpl } ) )
  {
    switch ( n->kind )
    {
    case node_kind::variable:
      if ( n->index >= positive.size() )
        throw lookup_error( "instantiate_dual_rail: missing argument for slot " + std::to_string( n->index ) );
      memo.emplace( n, positive[n->index] );
      break;
    case node_kind::constant:
      memo.emplace( n, make_const( n->value ) );
      break;
    case node_kind::negation:
      if ( n->left->kind != node_kind::variable )
        throw basis_error( "instantiate_dual_rail: template is not B0" );
      if ( n->left->index >= negative.size() )
        throw lookup_error( "instantiate_dual_rail: missing argument for slot " + std::to_string( n->left->index ) );
      memo.emplace( n, negative[n->left->index] );
      break;
    case node_kind::gate:
    {
      auto const& l = memo.at( n->left.get() );
      auto const& r = memo.at( n->right.get() );
      memo.emplace( n, fold_constants ? fold_gate( n->table, l, r, basis::b0 ) : make_gate( n->table, l, r ) );
      break;
    }
    }
  }
  return memo.at( tmpl.get() );
}

/*! \brief Renames variable `i` to `mapping[i]`. */
inline formula rename_vars( formula const& f, std::vector<uint32_t> const& mapping )
{
  std::vector<formula> args;
  args.reserve( mapping.size() );
  for ( auto m : mapping )
    args.push_back( make_var( m ) );
  return instantiate( f, args );
}

} // namespace csaform

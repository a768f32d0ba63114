/*!
  \file expr.hpp
  \brief Affine/max expressions for cost bounds

      expr   := term (('+' | '-') term)*
      term   := factor (('*' | '/') factor)*
      factor := NUMBER | NAME | '(' expr ')' | '-' factor
              | 'max' '(' expr (',' expr)* ')'

  Names are bound to variable slots after parsing, so a bound may refer to
  variables declared later in the same file.
*/

#pragma once

#include "error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace csaform
{

class expr
{
public:
  enum class op
  {
    number,
    variable,
    add,
    sub,
    mul,
    div,
    neg,
    max
  };

  struct node
  {
    op kind{ op::number };
    double value{ 0.0 };
    std::string name;
    uint32_t slot{ 0 };
    std::vector<std::shared_ptr<node const>> args;
  };

  expr() : n_( std::make_shared<node>() ) {}
  explicit expr( std::shared_ptr<node const> n ) : n_( std::move( n ) ) {}

  static expr number( double v )
  {
    auto n = std::make_shared<node>();
    n->value = v;
    return expr( n );
  }

  static expr variable( std::string name, uint32_t slot = 0 )
  {
    auto n = std::make_shared<node>();
    n->kind = op::variable;
    n->name = std::move( name );
    n->slot = slot;
    return expr( n );
  }

  static expr make( op k, std::vector<expr> const& args )
  {
    auto n = std::make_shared<node>();
    n->kind = k;
    for ( auto const& a : args )
      n->args.push_back( a.n_ );
    return expr( n );
  }

  op kind() const { return n_->kind; }
  node const& get() const { return *n_; }
  std::vector<expr> args() const
  {
    std::vector<expr> out;
    for ( auto const& a : n_->args )
      out.emplace_back( a );
    return out;
  }

  bool has_max() const
  {
    if ( n_->kind == op::max )
      return true;
    for ( auto const& a : n_->args )
      if ( expr( a ).has_max() )
        return true;
    return false;
  }

  /*! \brief Names of all variables, in first-occurrence order. */
  void collect_names( std::vector<std::string>& names ) const
  {
    if ( n_->kind == op::variable && std::find( names.begin(), names.end(), n_->name ) == names.end() )
      names.push_back( n_->name );
    for ( auto const& a : n_->args )
      expr( a ).collect_names( names );
  }

  /*! \brief Copy with every variable bound to `slots[name]`. */
  expr bind( std::map<std::string, uint32_t> const& slots ) const
  {
    if ( n_->kind == op::variable )
    {
      auto it = slots.find( n_->name );
      if ( it == slots.end() )
        throw lookup_error( "undeclared variable '" + n_->name + "'" );
      return variable( n_->name, it->second );
    }
    if ( n_->args.empty() )
      return *this;
    std::vector<expr> bound;
    for ( auto const& a : n_->args )
      bound.push_back( expr( a ).bind( slots ) );
    return make( n_->kind, bound );
  }

  double eval( std::vector<double> const& values ) const
  {
    auto const& n = *n_;
    auto const arg = [&]( std::size_t i ) { return expr( n.args[i] ).eval( values ); };
    switch ( n.kind )
    {
    case op::number:
      return n.value;
    case op::variable:
      return values.at( n.slot );
    case op::add:
      return arg( 0 ) + arg( 1 );
    case op::sub:
      return arg( 0 ) - arg( 1 );
    case op::mul:
      return arg( 0 ) * arg( 1 );
    case op::div:
      return arg( 0 ) / arg( 1 );
    case op::neg:
      return -arg( 0 );
    case op::max:
    {
      double m = arg( 0 );
      for ( std::size_t i = 1; i < n.args.size(); ++i )
        m = std::max( m, arg( i ) );
      return m;
    }
    }
    return 0.0;
  }

  /*! \brief Value and gradient with respect to `values`; at ties a max takes its first maximal argument. */
  double eval_gradient( std::vector<double> const& values, std::vector<double>& grad ) const
  {
    grad.assign( values.size(), 0.0 );
    return eval_gradient_rec( values, grad, 1.0 );
  }

  /*! \brief Max-free pieces whose pointwise maximum equals this expression.

    Sums and products distribute over max; multipliers and divisors must
    themselves be max-free (and are assumed nonnegative, as bounds are
    nondecreasing).  Throws when the expansion would exceed `limit` pieces
    or a max appears under subtraction, negation, or in a divisor.
  */
  std::vector<expr> pieces( std::size_t limit = 4096 ) const
  {
    auto const& n = *n_;
    switch ( n.kind )
    {
    case op::number:
    case op::variable:
      return { *this };
    case op::max:
    {
      std::vector<expr> out;
      for ( auto const& a : n.args )
        for ( auto const& p : expr( a ).pieces( limit ) )
          out.push_back( p );
      if ( out.size() > limit )
        throw resource_error( "expression expands to more than " + std::to_string( limit ) + " pieces" );
      return out;
    }
    case op::neg:
      if ( has_max() )
        throw error( "max under negation cannot be expanded" );
      return { *this };
    case op::sub:
    case op::div:
      if ( expr( n.args[1] ).has_max() )
        throw error( "max in a subtracted term or divisor cannot be expanded" );
      [[fallthrough]];
    case op::add:
    case op::mul:
    {
      if ( n.kind == op::mul && expr( n.args[0] ).has_max() && expr( n.args[1] ).has_max() )
        throw error( "product of two max terms cannot be expanded" );
      auto const l = expr( n.args[0] ).pieces( limit ), r = expr( n.args[1] ).pieces( limit );
      if ( l.size() * r.size() > limit )
        throw resource_error( "expression expands to more than " + std::to_string( limit ) + " pieces" );
      std::vector<expr> out;
      for ( auto const& a : l )
        for ( auto const& b : r )
          out.push_back( make( n.kind, { a, b } ) );
      return out;
    }
    }
    return { *this };
  }

  void print( std::ostream& os ) const
  {
    auto const& n = *n_;
    auto const arg = [&]( std::size_t i ) { return expr( n.args[i] ); };
    switch ( n.kind )
    {
    case op::number:
    {
      std::ostringstream s;
      s.precision( 10 );
      s << n.value;
      os << s.str();
      break;
    }
    case op::variable:
      os << n.name;
      break;
    case op::neg:
      os << "-(";
      arg( 0 ).print( os );
      os << ")";
      break;
    case op::max:
      os << "max( ";
      for ( std::size_t i = 0; i < n.args.size(); ++i )
      {
        if ( i )
          os << " , ";
        arg( i ).print( os );
      }
      os << " )";
      break;
    default:
    {
      auto const additive = []( expr const& e ) { return e.kind() == op::add || e.kind() == op::sub; };
      auto const wrap = [&]( expr const& e, bool paren ) {
        if ( paren )
          os << "(";
        e.print( os );
        if ( paren )
          os << ")";
      };
      bool const multiplicative = n.kind == op::mul || n.kind == op::div;
      wrap( arg( 0 ), multiplicative && additive( arg( 0 ) ) );
      os << ( n.kind == op::add ? " + " : n.kind == op::sub ? " - " : n.kind == op::mul ? "*" : "/" );
      bool const right_paren = multiplicative ? additive( arg( 1 ) ) || ( n.kind == op::div && arg( 1 ).kind() != op::number &&
                                                                             arg( 1 ).kind() != op::variable )
                                              : n.kind == op::sub && additive( arg( 1 ) );
      wrap( arg( 1 ), right_paren );
      break;
    }
    }
  }

  std::string to_string() const
  {
    std::ostringstream os;
    print( os );
    return os.str();
  }

private:
  double eval_gradient_rec( std::vector<double> const& values, std::vector<double>& grad, double scale ) const
  {
    auto const& n = *n_;
    auto const sub = [&]( std::size_t i ) { return expr( n.args[i] ); };
    switch ( n.kind )
    {
    case op::number:
      return n.value;
    case op::variable:
      grad.at( n.slot ) += scale;
      return values.at( n.slot );
    case op::add:
      return sub( 0 ).eval_gradient_rec( values, grad, scale ) + sub( 1 ).eval_gradient_rec( values, grad, scale );
    case op::sub:
      return sub( 0 ).eval_gradient_rec( values, grad, scale ) - sub( 1 ).eval_gradient_rec( values, grad, -scale );
    case op::neg:
      return -sub( 0 ).eval_gradient_rec( values, grad, -scale );
    case op::mul:
    {
      auto const a = sub( 0 ).eval( values ), b = sub( 1 ).eval( values );
      sub( 0 ).eval_gradient_rec( values, grad, scale * b );
      sub( 1 ).eval_gradient_rec( values, grad, scale * a );
      return a * b;
    }
    case op::div:
    {
      auto const a = sub( 0 ).eval( values ), b = sub( 1 ).eval( values );
      sub( 0 ).eval_gradient_rec( values, grad, scale / b );
      sub( 1 ).eval_gradient_rec( values, grad, -scale * a / ( b * b ) );
      return a / b;
    }
    case op::max:
    {
      std::size_t best = 0;
      double m = sub( 0 ).eval( values );
      for ( std::size_t i = 1; i < n.args.size(); ++i )
      {
        auto const v = sub( i ).eval( values );
        if ( v > m )
        {
          m = v;
          best = i;
        }
      }
      return sub( best ).eval_gradient_rec( values, grad, scale );
    }
    }
    return 0.0;
  }

  std::shared_ptr<node const> n_;
};

namespace detail
{

class expr_parser
{
public:
  expr_parser( std::string_view text, std::size_t line ) : text_( text ), line_( line ) {}

  expr parse()
  {
    auto e = parse_sum();
    skip();
    if ( pos_ < text_.size() )
      fail( "unexpected '" + std::string( 1, text_[pos_] ) + "'" );
    return e;
  }

private:
  expr parse_sum()
  {
    auto e = parse_product();
    for ( ;; )
    {
      skip();
      if ( accept( '+' ) )
        e = expr::make( expr::op::add, { e, parse_product() } );
      else if ( accept( '-' ) )
        e = expr::make( expr::op::sub, { e, parse_product() } );
      else
        return e;
    }
  }

  expr parse_product()
  {
    auto e = parse_factor();
    for ( ;; )
    {
      skip();
      if ( accept( '*' ) )
        e = expr::make( expr::op::mul, { e, parse_factor() } );
      else if ( accept( '/' ) )
        e = expr::make( expr::op::div, { e, parse_factor() } );
      else
        return e;
    }
  }

  expr parse_factor()
  {
    skip();
    if ( pos_ >= text_.size() )
      fail( "unexpected end of expression" );
    auto const c = text_[pos_];
    if ( accept( '(' ) )
    {
      auto e = parse_sum();
      skip();
      if ( !accept( ')' ) )
        fail( "expected ')'" );
      return e;
    }
    if ( accept( '-' ) )
      return expr::make( expr::op::neg, { parse_factor() } );
    if ( std::isdigit( static_cast<unsigned char>( c ) ) || c == '.' )
    {
      auto const start = pos_;
      while ( pos_ < text_.size() &&
              ( std::isdigit( static_cast<unsigned char>( text_[pos_] ) ) || text_[pos_] == '.' || text_[pos_] == 'e' ||
                text_[pos_] == 'E' ||
                ( ( text_[pos_] == '-' || text_[pos_] == '+' ) && pos_ > start &&
                  ( text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E' ) ) ) )
        ++pos_;
      std::string const token( text_.substr( start, pos_ - start ) );
      std::size_t used = 0;
      double v = 0.0;
      try
      {
        v = std::stod( token, &used );
      }
      catch ( std::exception const& )
      {
        used = 0;
      }
      if ( used != token.size() )
        fail_at( start, "malformed number '" + token + "'" );
      return expr::number( v );
    }
    if ( std::isalpha( static_cast<unsigned char>( c ) ) || c == '_' )
    {
      auto const start = pos_;
      while ( pos_ < text_.size() &&
              ( std::isalnum( static_cast<unsigned char>( text_[pos_] ) ) || text_[pos_] == '_' || text_[pos_] == '\'' ) )
        ++pos_;
      std::string const name( text_.substr( start, pos_ - start ) );
      skip();
      if ( name == "max" && pos_ < text_.size() && text_[pos_] == '(' )
      {
        ++pos_;
        std::vector<expr> args{ parse_sum() };
        for ( ;; )
        {
          skip();
          if ( accept( ',' ) )
            args.push_back( parse_sum() );
          else if ( accept( ')' ) )
            break;
          else
            fail( "expected ',' or ')' in max" );
        }
        return args.size() == 1 ? args.front() : expr::make( expr::op::max, args );
      }
      return expr::variable( name );
    }
    fail( "unexpected '" + std::string( 1, c ) + "'" );
  }

  void skip()
  {
    while ( pos_ < text_.size() && std::isspace( static_cast<unsigned char>( text_[pos_] ) ) )
      ++pos_;
  }

  bool accept( char c )
  {
    if ( pos_ < text_.size() && text_[pos_] == c )
    {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail( std::string const& what ) const { fail_at( pos_, what ); }
  [[noreturn]] void fail_at( std::size_t pos, std::string const& what ) const
  {
    throw syntax_error( what, line_, column_offset_ + pos + 1 );
  }

  std::string_view text_;
  std::size_t pos_{ 0 };
  std::size_t line_;
  std::size_t column_offset_{ 0 };
};

} // namespace detail

/*! \brief Parses an expression; `line` is used in error positions. */
inline expr parse_expr( std::string_view text, std::size_t line = 1 )
{
  return detail::expr_parser( text, line ).parse();
}

} // namespace csaform

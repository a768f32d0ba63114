/*!
  \file sexp.hpp
  \brief Canonical s-expression text format for formulas (`.sexp`)

  Grammar:

      formula := (var INT) | (const 0|1) | (not formula)
               | (and formula formula) | (or formula formula)
               | (xor formula formula) | (gate TT4 formula formula)

  TT4 lists the gate output for (left,right) = 00, 01, 10, 11.  `#` starts
  a comment that runs to the end of the line.  Rendering always uses the
  named forms for AND, OR and XOR, so `(gate 0001 a b)` renders as
  `(and a b)`.
*/

#pragma once

#include "formula.hpp"

#include <cctype>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace csaform
{

namespace detail
{

inline std::string table_to_tt4( uint8_t table )
{
  std::string s;
  for ( auto i = 0u; i < 4u; ++i )
    s.push_back( ( table >> i ) & 1u ? '1' : '0' );
  return s;
}

class sexp_parser
{
public:
  explicit sexp_parser( std::string_view text ) : text_( text ) {}

  formula parse_document()
  {
    skip();
    if ( at_end() )
      fail( "expected a formula" );
    auto f = parse_formula();
    skip();
    if ( !at_end() )
      fail( "unexpected trailing input" );
    return f;
  }

private:
  formula parse_formula()
  {
    skip();
    expect( '(' );
    auto const head = word();
    formula result;
    if ( head == "var" )
    {
      auto const v = integer();
      result = make_var( static_cast<uint32_t>( v ) );
    }
    else if ( head == "const" )
    {
      auto const w = word();
      if ( w != "0" && w != "1" )
        fail( "constant must be 0 or 1" );
      result = make_const( w == "1" );
    }
    else if ( head == "not" )
    {
      result = make_not( parse_formula() );
    }
    else if ( head == "and" || head == "or" || head == "xor" )
    {
      auto const table = head == "and" ? gate_table::and_ : head == "or" ? gate_table::or_ : gate_table::xor_;
      auto l = parse_formula();
      auto r = parse_formula();
      result = make_gate( table, l, r );
    }
    else if ( head == "gate" )
    {
      auto const tt = word();
      if ( tt.size() != 4 || tt.find_first_not_of( "01" ) != std::string::npos )
        fail( "gate table must be four characters of 0/1" );
      uint8_t table = 0;
      for ( auto i = 0u; i < 4u; ++i )
        table |= static_cast<uint8_t>( ( tt[i] == '1' ? 1u : 0u ) << i );
      auto l = parse_formula();
      auto r = parse_formula();
      result = make_gate( table, l, r );
    }
    else
    {
      fail( "unknown form '" + head + "'" );
    }
    skip();
    expect( ')' );
    return result;
  }

  std::string word()
  {
    skip();
    std::string w;
    while ( !at_end() && !std::isspace( static_cast<unsigned char>( peek() ) ) && peek() != '(' && peek() != ')' &&
            peek() != '#' )
    {
      w.push_back( next() );
    }
    if ( w.empty() )
      fail( "expected a token" );
    return w;
  }

  uint64_t integer()
  {
    skip();
    auto const line = line_, col = col_;
    auto const w = word();
    if ( w.find_first_not_of( "0123456789" ) != std::string::npos || w.size() > 9 )
      throw syntax_error( "expected a variable index, got '" + w + "'", line, col );
    return std::stoull( w );
  }

  void skip()
  {
    while ( !at_end() )
    {
      if ( peek() == '#' )
      {
        while ( !at_end() && peek() != '\n' )
          next();
      }
      else if ( std::isspace( static_cast<unsigned char>( peek() ) ) )
      {
        next();
      }
      else
      {
        break;
      }
    }
  }

  void expect( char c )
  {
    if ( at_end() || peek() != c )
      fail( std::string( "expected '" ) + c + "'" );
    next();
  }

  [[noreturn]] void fail( std::string const& what ) const { throw syntax_error( what, line_, col_ ); }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char next()
  {
    auto const c = text_[pos_++];
    if ( c == '\n' )
    {
      ++line_;
      col_ = 1;
    }
    else
    {
      ++col_;
    }
    return c;
  }

  std::string_view text_;
  std::size_t pos_{ 0 };
  std::size_t line_{ 1 };
  std::size_t col_{ 1 };
};

} // namespace detail

inline formula parse_sexp( std::string_view text )
{
  return detail::sexp_parser( text ).parse_document();
}

inline formula parse_sexp( std::istream& in )
{
  std::string const text( ( std::istreambuf_iterator<char>( in ) ), std::istreambuf_iterator<char>() );
  return parse_sexp( std::string_view( text ) );
}

inline void render_sexp( std::ostream& os, formula const& f )
{
  switch ( f.kind() )
  {
  case node_kind::variable:
    os << "(var " << f.index() << ")";
    break;
  case node_kind::constant:
    os << "(const " << ( f.value() ? 1 : 0 ) << ")";
    break;
  case node_kind::negation:
    os << "(not ";
    render_sexp( os, f.child() );
    os << ")";
    break;
  case node_kind::gate:
    switch ( f.table() )
    {
    case gate_table::and_:
      os << "(and ";
      break;
    case gate_table::or_:
      os << "(or ";
      break;
    case gate_table::xor_:
      os << "(xor ";
      break;
    default:
      os << "(gate " << detail::table_to_tt4( f.table() ) << " ";
      break;
    }
    render_sexp( os, f.left() );
    os << " ";
    render_sexp( os, f.right() );
    os << ")";
    break;
  }
}

inline std::string render_sexp( formula const& f )
{
  std::ostringstream os;
  render_sexp( os, f );
  return os.str();
}

} // namespace csaform

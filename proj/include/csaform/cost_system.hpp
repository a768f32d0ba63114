/*!
  \file cost_system.hpp
  \brief Cost-transfer systems, parameter sets, size matrices, and balance margins

  System file format (one statement per line, `#` comments):

      system mdfa
      types 2
      param a
      type X: X1 X2 X3 X4
      C1 <= X1 + X2 + X3 + a*U1
      type U: U1 U2 U3
      A1 <= max( X1 + X2 + 3*X3 , (2/a)*X1 + ((a+1)/a)*U1 )

  Bounds belong to the most recent `type` line and may use variables of
  any type and the declared parameters.

  Matrix file format: optional `matrix NAME`, then `sigs_in:` and
  `sigs_out:` lines and one whitespace-separated integer row per output.

  Parameter file format: `key value` lines with keys `name`, `p`,
  `alpha`, `nu`, and one line per weight variable.
*/

#pragma once

#include "encoding.hpp"
#include "error.hpp"
#include "expr.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace csaform
{

constexpr double default_epsilon = 1e-9;

struct cost_bound
{
  std::string name;
  expr rhs;
};

struct cost_type
{
  std::string name;
  std::vector<std::string> inputs;
  std::vector<cost_bound> bounds;
};

class cost_system
{
public:
  std::string name;
  std::vector<std::string> params;
  std::vector<cost_type> types;

  /*! \brief Resolves variable names; called by the parser and builtin constructors. */
  void bind()
  {
    slots_.clear();
    names_.clear();
    for ( auto const& t : types )
      for ( auto const& v : t.inputs )
        add_slot( v );
    for ( auto const& p : params )
      add_slot( p );
    for ( auto& t : types )
      for ( auto& b : t.bounds )
        b.rhs = b.rhs.bind( slots_ );
  }

  /*! \brief Input variables of all types followed by the parameters. */
  std::vector<std::string> const& variables() const { return names_; }
  std::size_t num_weights() const { return names_.size() - params.size(); }

  uint32_t slot_of( std::string const& v ) const
  {
    auto it = slots_.find( v );
    if ( it == slots_.end() )
      throw lookup_error( "system " + name + " has no variable '" + v + "'" );
    return it->second;
  }

  std::string to_text() const
  {
    std::ostringstream os;
    os << "system " << name << "\n";
    os << "types " << types.size() << "\n";
    for ( auto const& p : params )
      os << "param " << p << "\n";
    for ( auto const& t : types )
    {
      os << "type " << t.name << ":";
      for ( auto const& v : t.inputs )
        os << " " << v;
      os << "\n";
      for ( auto const& b : t.bounds )
        os << b.name << " <= " << b.rhs.to_string() << "\n";
    }
    return os.str();
  }

private:
  void add_slot( std::string const& v )
  {
    if ( !slots_.emplace( v, static_cast<uint32_t>( names_.size() ) ).second )
      throw syntax_error( "variable '" + v + "' declared twice", 0, 0 );
    names_.push_back( v );
  }

  std::map<std::string, uint32_t> slots_;
  std::vector<std::string> names_;
};

namespace detail
{

inline std::string trim( std::string const& s )
{
  auto const b = s.find_first_not_of( " \t\r" );
  if ( b == std::string::npos )
    return {};
  auto const e = s.find_last_not_of( " \t\r" );
  return s.substr( b, e - b + 1 );
}

inline std::vector<std::string> split_words( std::string const& s )
{
  std::istringstream is( s );
  std::vector<std::string> w;
  for ( std::string t; is >> t; )
    w.push_back( t );
  return w;
}

inline std::string strip_comment( std::string const& line )
{
  auto const h = line.find( '#' );
  return trim( h == std::string::npos ? line : line.substr( 0, h ) );
}

} // namespace detail

inline cost_system parse_cost_system( std::string const& text )
{
  cost_system sys;
  std::optional<std::size_t> declared_types;
  std::istringstream in( text );
  std::string raw;
  std::size_t line_no = 0;
  while ( std::getline( in, raw ) )
  {
    ++line_no;
    auto const line = detail::strip_comment( raw );
    if ( line.empty() )
      continue;
    auto const le = line.find( "<=" );
    if ( le != std::string::npos )
    {
      if ( sys.types.empty() )
        throw syntax_error( "bound before any type declaration", line_no, 1 );
      auto const lhs = detail::trim( line.substr( 0, le ) );
      if ( lhs.empty() || lhs.find( ' ' ) != std::string::npos )
        throw syntax_error( "bound needs a single output name", line_no, 1 );
      auto const offset = raw.find( "<=" ) + 2;
      expr rhs;
      try
      {
        rhs = parse_expr( line.substr( le + 2 ), line_no );
      }
      catch ( syntax_error const& e )
      {
        throw syntax_error( e.reason, line_no, e.column + offset );
      }
      sys.types.back().bounds.push_back( { lhs, rhs } );
      continue;
    }
    auto words = detail::split_words( line );
    auto const& key = words[0];
    if ( key == "system" && words.size() == 2 )
    {
      sys.name = words[1];
    }
    else if ( key == "types" && words.size() == 2 )
    {
      declared_types = std::stoul( words[1] );
    }
    else if ( key == "param" && words.size() >= 2 )
    {
      sys.params.insert( sys.params.end(), words.begin() + 1, words.end() );
    }
    else if ( key == "type" && words.size() >= 3 && words[1].back() == ':' )
    {
      cost_type t;
      t.name = words[1].substr( 0, words[1].size() - 1 );
      t.inputs.assign( words.begin() + 2, words.end() );
      sys.types.push_back( std::move( t ) );
    }
    else
    {
      throw syntax_error( "unrecognized statement '" + line + "'", line_no, 1 );
    }
  }
  if ( sys.types.empty() )
    throw syntax_error( "system declares no types", line_no, 1 );
  if ( declared_types && *declared_types != sys.types.size() )
    throw syntax_error( "header declares " + std::to_string( *declared_types ) + " types, found " +
                            std::to_string( sys.types.size() ),
                        1, 1 );
  try
  {
    sys.bind();
  }
  catch ( lookup_error const& e )
  {
    throw syntax_error( e.what(), line_no, 1 );
  }
  return sys;
}

inline std::string builtin_system_text( std::string const& name )
{
  if ( name == "mdfa" )
    return "system mdfa\n"
           "types 2\n"
           "param a\n"
           "type X: X1 X2 X3 X4\n"
           "C1 <= X1 + X2 + X3 + a*U1\n"
           "C2 <= X4 + a*U2 + a*U3\n"
           "type U: U1 U2 U3\n"
           "A1 <= max( X1 + X2 + 3*X3 , (2/a)*X1 + (2/a)*X2 + (3/a)*X3 + ((a+1)/a)*U1 )\n"
           "A2 <= max( X4 + (a+2)*U2 , (2/a)*X4 + ((2*a+1)/a)*U2 + ((a+1)/a)*U3 )\n";
  if ( name == "sfa5" )
    return "system sfa5\n"
           "types 2\n"
           "type X: X1 X2 X3\n"
           "C <= 4*X1 + 8*U1 + 4*U2\n"
           "type U: U1 U2\n"
           "A1 <= 2*X1 + 3*U1 + 2*U2\n"
           "A2 <= X2 + X3\n";
  if ( name == "sfa7" )
    return "system sfa7\n"
           "types 2\n"
           "param a\n"
           "type X: X1 X2 X3 X4 X5\n"
           "C1 <= 4*X1 + 8*a*S1 + 4*a*S2\n"
           "C2 <= 8*(X2 + X3 + X4 + X5) + 4*a*S3\n"
           "type S: S1 S2 S3\n"
           "Q1 <= max( 2*X1 + (a+2)*S1 + (a+1)*S2 , (4/a)*X1 + ((2*a+4)/a)*S1 + ((a+2)/a)*S2 )\n"
           "Q2 <= max( 3*(X2 + X3 + X4 + X5) + (a+1)*S3 , (6/a)*(X2 + X3 + X4 + X5) + ((a+2)/a)*S3 )\n";
  throw lookup_error( "unknown builtin system '" + name + "' (expected mdfa, sfa5, or sfa7)" );
}

inline cost_system builtin_system( std::string const& name )
{
  return parse_cost_system( builtin_system_text( name ) );
}

struct param_set
{
  std::string name;
  double p{ 0.5 };
  std::optional<double> alpha;
  std::map<std::string, double> weights;
  std::optional<double> nu;
};

inline param_set parse_params( std::string const& text )
{
  param_set ps;
  bool have_p = false;
  std::istringstream in( text );
  std::string raw;
  std::size_t line_no = 0;
  while ( std::getline( in, raw ) )
  {
    ++line_no;
    auto const line = detail::strip_comment( raw );
    if ( line.empty() )
      continue;
    auto w = detail::split_words( line );
    if ( w.size() != 2 )
      throw syntax_error( "expected 'key value'", line_no, 1 );
    if ( w[0].back() == ':' )
      w[0].pop_back();
    if ( w[0] == "name" )
    {
      ps.name = w[1];
      continue;
    }
    double v = 0.0;
    try
    {
      std::size_t used = 0;
      v = std::stod( w[1], &used );
      if ( used != w[1].size() )
        throw std::invalid_argument( "trailing" );
    }
    catch ( std::exception const& )
    {
      throw syntax_error( "malformed number '" + w[1] + "'", line_no, raw.find( w[1] ) + 1 );
    }
    if ( w[0] == "p" )
    {
      ps.p = v;
      have_p = true;
    }
    else if ( w[0] == "alpha" )
      ps.alpha = v;
    else if ( w[0] == "nu" )
      ps.nu = v;
    else
      ps.weights[w[0]] = v;
  }
  if ( !have_p )
    throw syntax_error( "parameter set has no 'p'", line_no, 1 );
  return ps;
}

inline std::string to_text( param_set const& ps )
{
  std::ostringstream os;
  os.precision( 10 );
  if ( !ps.name.empty() )
    os << "name " << ps.name << "\n";
  os << "p " << ps.p << "\n";
  if ( ps.alpha )
    os << "alpha " << *ps.alpha << "\n";
  if ( ps.nu )
    os << "nu " << *ps.nu << "\n";
  for ( auto const& [k, v] : ps.weights )
    os << k << " " << v << "\n";
  return os.str();
}

/*! \brief Published parameter sets: `paper-mdfa`, `paper-sfa5`, `paper-sfa7`. */
inline param_set paper_params( std::string const& name )
{
  param_set ps;
  ps.name = name;
  if ( name == "paper-mdfa" )
  {
    ps.p = 0.327781;
    ps.alpha = 2.906;
    ps.weights = { { "X1", 1.0 },       { "X2", 1.0 },       { "X3", 0.5149081 }, { "X4", 1.9198088 },
                   { "U1", 1.2176395 }, { "U2", 1.0031176 }, { "U3", 2.3573055 } };
  }
  else if ( name == "paper-sfa5" )
  {
    ps.p = 0.219978;
    ps.weights = { { "X1", 1.0 }, { "X2", 0.031702 }, { "X3", 0.031702 }, { "U1", 1.018913 }, { "U2", 2.0 } };
  }
  else if ( name == "paper-sfa7" )
  {
    ps.p = 0.2204718;
    ps.alpha = 1.6782;
    ps.weights = { { "X1", 1.0 },
                   { "X2", 0.3569540333 },
                   { "X3", 0.3569540333 },
                   { "X4", 0.3569540333 },
                   { "X5", 0.3569540333 },
                   { "S1", 1.1282983248 },
                   { "S2", 2.424317629 },
                   { "S3", 1.6884745179 } };
  }
  else
  {
    throw lookup_error( "unknown parameter set '" + name + "'" );
  }
  return ps;
}

/*! \brief Builtin system a published parameter set belongs to. */
inline std::string paper_params_system( std::string const& params_name )
{
  if ( params_name.rfind( "paper-", 0 ) == 0 )
    return params_name.substr( 6 );
  return {};
}

struct type_margin
{
  std::string type;
  double inputs{ 0.0 };
  double outputs{ 0.0 };
  double margin{ 0.0 };
};

struct margins
{
  std::vector<type_margin> types;
  /*! \brief Output bound values at the given weights, in declaration order. */
  std::vector<std::pair<std::string, double>> bounds;
  double epsilon{ default_epsilon };
  bool feasible{ false };

  double min_margin() const
  {
    double m = INFINITY;
    for ( auto const& t : types )
      m = std::min( m, t.margin );
    return m;
  }
};

/*! \brief Slot values (weights then parameters) of a system for a parameter set. */
inline std::vector<double> system_values( cost_system const& sys, param_set const& ps )
{
  std::vector<double> values( sys.variables().size(), 0.0 );
  for ( std::size_t i = 0; i < sys.num_weights(); ++i )
  {
    auto const& v = sys.variables()[i];
    auto it = ps.weights.find( v );
    if ( it == ps.weights.end() )
      throw lookup_error( "parameter set lacks weight '" + v + "'" );
    if ( !( it->second > 0.0 ) )
      throw error( "weight '" + v + "' must be positive" );
    values[i] = it->second;
  }
  for ( std::size_t i = 0; i < sys.params.size(); ++i )
  {
    if ( !ps.alpha )
      throw lookup_error( "system " + sys.name + " needs parameter '" + sys.params[i] + "' (alpha)" );
    values[sys.num_weights() + i] = *ps.alpha;
  }
  return values;
}

inline margins check_balance( cost_system const& sys, param_set const& ps, double epsilon = default_epsilon )
{
  if ( !( ps.p > 0.0 ) )
    throw error( "p must be positive" );
  auto const values = system_values( sys, ps );
  margins m;
  m.epsilon = epsilon;
  m.feasible = true;
  for ( auto const& t : sys.types )
  {
    type_margin tm;
    tm.type = t.name;
    for ( auto const& v : t.inputs )
      tm.inputs += std::pow( values[sys.slot_of( v )], ps.p );
    for ( auto const& b : t.bounds )
    {
      auto const y = b.rhs.eval( values );
      m.bounds.emplace_back( b.name, y );
      tm.outputs += std::pow( y, ps.p );
    }
    tm.margin = tm.inputs - tm.outputs;
    m.feasible &= tm.margin > epsilon;
    m.types.push_back( tm );
  }
  return m;
}

/* ------------------------------------------------------------------ */
/* size matrices                                                      */
/* ------------------------------------------------------------------ */

struct matrix_system
{
  std::string name;
  std::vector<std::vector<double>> m;
  std::vector<unsigned> sigs_in;
  std::vector<unsigned> sigs_out;

  std::size_t rows() const { return m.size(); }
  std::size_t cols() const { return m.empty() ? 0 : m.front().size(); }

  void validate() const
  {
    if ( m.empty() || m.front().empty() )
      throw error( "matrix " + name + " is empty" );
    for ( auto const& r : m )
    {
      if ( r.size() != cols() )
        throw error( "matrix " + name + " has ragged rows" );
      for ( auto v : r )
        if ( v < 0.0 )
          throw error( "matrix " + name + " has a negative entry" );
    }
    for ( std::size_t c = 0; c < cols(); ++c )
    {
      bool any = false;
      for ( auto const& r : m )
        any |= r[c] > 0.0;
      if ( !any )
        throw error( "matrix " + name + " has an all-zero column " + std::to_string( c ) );
    }
    if ( !sigs_in.empty() && sigs_in.size() != cols() )
      throw error( "matrix " + name + ": sigs_in has " + std::to_string( sigs_in.size() ) + " entries for " +
                   std::to_string( cols() ) + " columns" );
    if ( !sigs_out.empty() && sigs_out.size() != rows() )
      throw error( "matrix " + name + ": sigs_out has " + std::to_string( sigs_out.size() ) + " entries for " +
                   std::to_string( rows() ) + " rows" );
  }

  std::string to_text() const
  {
    std::ostringstream os;
    os << "matrix " << name << "\n";
    auto const line = [&]( char const* key, std::vector<unsigned> const& s ) {
      os << key;
      for ( auto v : s )
        os << " " << v;
      os << "\n";
    };
    if ( !sigs_in.empty() )
      line( "sigs_in:", sigs_in );
    if ( !sigs_out.empty() )
      line( "sigs_out:", sigs_out );
    for ( auto const& r : m )
    {
      for ( std::size_t c = 0; c < r.size(); ++c )
        os << ( c ? " " : "" ) << r[c];
      os << "\n";
    }
    return os.str();
  }
};

inline matrix_system parse_matrix( std::string const& text )
{
  matrix_system ms;
  std::istringstream in( text );
  std::string raw;
  std::size_t line_no = 0;
  auto const read_sigs = [&]( std::string const& rest ) {
    std::vector<unsigned> s;
    for ( auto const& w : detail::split_words( rest ) )
    {
      if ( w.find_first_not_of( "0123456789" ) != std::string::npos )
        throw syntax_error( "significance must be a non-negative integer, got '" + w + "'", line_no, 1 );
      s.push_back( static_cast<unsigned>( std::stoul( w ) ) );
    }
    return s;
  };
  while ( std::getline( in, raw ) )
  {
    ++line_no;
    auto const line = detail::strip_comment( raw );
    if ( line.empty() )
      continue;
    if ( line.rfind( "matrix", 0 ) == 0 )
    {
      ms.name = detail::trim( line.substr( 6 ) );
    }
    else if ( line.rfind( "sigs_in:", 0 ) == 0 )
    {
      ms.sigs_in = read_sigs( line.substr( 8 ) );
    }
    else if ( line.rfind( "sigs_out:", 0 ) == 0 )
    {
      ms.sigs_out = read_sigs( line.substr( 9 ) );
    }
    else
    {
      std::vector<double> row;
      for ( auto const& w : detail::split_words( line ) )
      {
        if ( w.find_first_not_of( "0123456789" ) != std::string::npos )
          throw syntax_error( "matrix entries must be non-negative integers, got '" + w + "'", line_no,
                              raw.find( w ) + 1 );
        row.push_back( std::stod( w ) );
      }
      ms.m.push_back( std::move( row ) );
    }
  }
  ms.validate();
  return ms;
}

/*! \brief The (15,6) chain matrix with its column significances.

  Columns: y at significance 4, then (x, u, v) at significances 3, 2, 1,
  then (u0b, v0b, x0, u0a, v0a) at significance 0.  Rows are the outputs
  at significances 0..5.
*/
inline matrix_system paper_matrix_15x6()
{
  matrix_system ms;
  ms.name = "paper-15x6";
  ms.m = { { 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1 }, { 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 3 },
           { 0, 0, 0, 0, 1, 1, 1, 2, 2, 3, 1, 2, 3, 3, 6 }, { 0, 1, 1, 1, 2, 2, 3, 3, 3, 6, 1, 2, 3, 3, 6 },
           { 1, 2, 2, 3, 3, 3, 6, 3, 3, 6, 1, 2, 3, 3, 6 }, { 1, 4, 4, 9, 3, 3, 6, 3, 3, 6, 1, 2, 3, 3, 6 } };
  ms.sigs_in = { 4, 3, 3, 3, 2, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0 };
  ms.sigs_out = { 0, 1, 2, 3, 4, 5 };
  return ms;
}

/*! \brief The (17,6) matrix; all inputs at significance 0, outputs at 0, 0, 0, 1, 2, 3. */
inline matrix_system paper_matrix_17x6()
{
  matrix_system ms;
  ms.name = "paper-17x6";
  ms.m = { { 4, 8, 8, 8, 8, 8, 8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0 },
           { 0, 0, 0, 0, 0, 0, 0, 4, 4, 4, 8, 8, 0, 0, 0, 0, 0 },
           { 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4, 4, 4, 8, 8 },
           { 12, 16, 16, 24, 24, 24, 24, 16, 16, 16, 24, 24, 16, 16, 16, 24, 24 },
           { 14, 20, 20, 24, 24, 24, 24, 24, 24, 24, 36, 36, 24, 24, 24, 36, 36 },
           { 7, 10, 10, 12, 12, 12, 12, 12, 12, 12, 18, 18, 12, 12, 12, 18, 18 } };
  ms.sigs_in.assign( 17, 0 );
  ms.sigs_out = { 0, 0, 0, 1, 2, 3 };
  return ms;
}

inline matrix_system named_matrix( std::string const& name )
{
  if ( name == "paper-15x6" )
    return paper_matrix_15x6();
  if ( name == "paper-17x6" )
    return paper_matrix_17x6();
  throw lookup_error( "unknown matrix '" + name + "'" );
}

/* ------------------------------------------------------------------ */
/* slot cost measures                                                 */
/* ------------------------------------------------------------------ */

/*! \brief Size quantity of one encoded slot from the sizes of its components.

  standard: x; xor_pair: max(V, U+/alpha); mon_pair: max(and, or);
  sort_triple: max(S', S''', S''/alpha, S^/(2 alpha)).
*/
inline double slot_cost( encoding e, std::vector<double> const& sizes, double alpha = 1.0 )
{
  if ( sizes.size() != component_count( e ) )
    throw error( "slot_cost: component count mismatch" );
  switch ( e )
  {
  case encoding::standard:
    return sizes[0];
  case encoding::xor_pair:
    return std::max( sizes[1], sizes[0] / alpha );
  case encoding::mon_pair:
    return std::max( sizes[0], sizes[1] );
  case encoding::sort_triple:
    return std::max( { sizes[0], sizes[2], sizes[1] / alpha, sizes[3] / ( 2.0 * alpha ) } );
  }
  return 0.0;
}

} // namespace csaform

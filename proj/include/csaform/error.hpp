/*!
  \file error.hpp
  \brief Exception types shared by all csaform modules
*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csaform
{

/*! \brief Base class of every error raised by the library. */
class error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/*! \brief A variable index exceeded the declared arity or assignment length. */
class index_error : public error
{
public:
  index_error( std::size_t index, std::size_t limit )
      : error( "variable index " + std::to_string( index ) + " out of range (limit " + std::to_string( limit ) + ")" ),
        index( index ), limit( limit )
  {
  }

  std::size_t index;
  std::size_t limit;
};

/*! \brief A request exceeds a hard resource cap (truth-table arity, enumeration size, ...). */
class resource_error : public error
{
public:
  using error::error;
};

/*! \brief Malformed `.sexp`, system, params, or matrix text. */
class syntax_error : public error
{
public:
  syntax_error( std::string const& what, std::size_t line, std::size_t column )
      : error( std::to_string( line ) + ":" + std::to_string( column ) + ": " + what ), reason( what ), line( line ),
        column( column )
  {
  }

  std::string reason;
  std::size_t line;
  std::size_t column;
};

/*! \brief Operation requires a monotone formula (AND/OR gates, positive leaves). */
class monotonicity_error : public error
{
public:
  using error::error;
};

/*! \brief A formula does not conform to the basis required by the operation. */
class basis_error : public error
{
public:
  using error::error;
};

/*! \brief Missing template argument, block component, or named entity. */
class lookup_error : public error
{
public:
  using error::error;
};

/*! \brief Search terminated without a certified feasible point. */
class not_certified_error : public error
{
public:
  using error::error;
};

} // namespace csaform

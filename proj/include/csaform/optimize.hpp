/*!
  \file optimize.hpp
  \brief Exponent search for cost systems and size matrices

  Every analysis reduces to: for a given p, maximize over positive weights
  the smallest of a few smooth functions g_j (the balance margins, with
  each max-term expanded into its affine pieces).  The largest p at which
  that maximum exceeds epsilon is located by bisection.

  The inner maximization runs in log-weight coordinates.  A multiplicative
  pattern search (coordinate and random directions, step halving) is
  followed by a sequential quadratic programming polish on the epigraph
  form  max t  s.t.  g_j(z) >= t,  whose subproblems are solved exactly
  over the simplex of multipliers.
*/

#pragma once

#include "cost_system.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <thread>
#include <vector>

namespace csaform
{

struct search_budget
{
  /*! \brief Random restarts besides the neutral start. */
  unsigned restarts{ 8 };
  double p_lo{ 0.05 };
  double p_hi{ 0.9 };
  double p_tol{ 1e-6 };
  double delta_max{ 0.5 };
  double delta_min{ 1e-6 };
  unsigned sqp_iterations{ 400 };
  double epsilon{ default_epsilon };
  unsigned jobs{ 1 };

  /*! \brief Scales the restart count; budget 1 is the default effort. */
  static search_budget from_level( unsigned level )
  {
    search_budget b;
    b.restarts = std::max( 1u, 8u * std::max( 1u, level ) );
    return b;
  }
};

/*! \brief max-min problem in log-coordinates; `eval` fills g and optionally its Jacobian (rows = pieces). */
struct minimax_problem
{
  std::size_t dim{ 0 };
  std::function<void( std::vector<double> const& z, double p, std::vector<double>& g, std::vector<std::vector<double>>* jac )>
      eval;
};

struct inner_result
{
  std::vector<double> z;
  double value{ -INFINITY };
  uint64_t evaluations{ 0 };
};

namespace detail
{

inline double min_of( std::vector<double> const& g )
{
  return g.empty() ? INFINITY : *std::min_element( g.begin(), g.end() );
}

class inner_solver
{
public:
  inner_solver( minimax_problem const& prob, search_budget const& budget ) : prob_( prob ), budget_( budget ) {}

  double value( std::vector<double> const& z, double p )
  {
    ++evaluations_;
    prob_.eval( z, p, g_, nullptr );
    auto const v = min_of( g_ );
    return std::isfinite( v ) ? v : -INFINITY;
  }

  /*! \brief Multiplicative pattern search: steps log(1 +- delta) along coordinates and random unit directions. */
  double pattern_search( std::vector<double>& z, double p, std::mt19937_64& rng )
  {
    auto const n = z.size();
    double best = value( z, p );
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> dirs;
    for ( double delta = budget_.delta_max; delta >= budget_.delta_min; delta /= 2 )
    {
      double const up = std::log1p( delta ), down = std::log1p( -delta );
      bool improved = true;
      while ( improved )
      {
        improved = false;
        dirs.clear();
        for ( std::size_t i = 0; i < n; ++i )
        {
          dirs.emplace_back( n, 0.0 );
          dirs.back()[i] = 1.0;
        }
        for ( std::size_t r = 0; r < 2 * n; ++r )
        {
          std::vector<double> d( n );
          double norm = 0.0;
          for ( auto& x : d )
          {
            x = normal( rng );
            norm += x * x;
          }
          norm = std::sqrt( norm );
          for ( auto& x : d )
            x /= norm;
          dirs.push_back( std::move( d ) );
        }
        for ( auto const& d : dirs )
        {
          for ( double step : { up, down } )
          {
            auto trial = z;
            for ( std::size_t i = 0; i < n; ++i )
              trial[i] += step * d[i];
            auto const v = value( trial, p );
            if ( v > best )
            {
              best = v;
              z = std::move( trial );
              improved = true;
              break;
            }
          }
        }
      }
    }
    return best;
  }

  /*! \brief SQP on max t s.t. g_j(z) >= t with damped BFGS on the Lagrangian. */
  double sqp( std::vector<double>& z, double p )
  {
    auto const n = static_cast<Eigen::Index>( z.size() );
    Eigen::MatrixXd B = Eigen::MatrixXd::Identity( n, n );
    std::vector<double> g;
    std::vector<std::vector<double>> jac;
    ++evaluations_;
    prob_.eval( z, p, g, &jac );
    double phi = min_of( g );
    if ( !std::isfinite( phi ) )
      return -INFINITY;
    for ( unsigned it = 0; it < budget_.sqp_iterations; ++it )
    {
      auto const m = static_cast<Eigen::Index>( g.size() );
      Eigen::MatrixXd J( m, n );
      Eigen::VectorXd gv( m );
      for ( Eigen::Index j = 0; j < m; ++j )
      {
        gv[j] = g[j];
        for ( Eigen::Index i = 0; i < n; ++i )
          J( j, i ) = jac[j][i];
      }
      Eigen::LDLT<Eigen::MatrixXd> const ldlt( B );
      Eigen::MatrixXd const BinvJt = ldlt.solve( J.transpose() );
      Eigen::MatrixXd const Q = J * BinvJt;
      Eigen::VectorXd const lambda = simplex_qp( Q, gv );
      Eigen::VectorXd const d = BinvJt * lambda;
      Eigen::VectorXd const model = gv + J * d;
      double const pred = model.minCoeff() - phi;
      if ( !( pred > 1e-15 * std::max( 1.0, std::abs( phi ) ) ) || d.norm() < 1e-14 )
        break;
      double step = 1.0;
      std::vector<double> trial( z.size() ), tg;
      std::vector<std::vector<double>> tjac;
      bool accepted = false;
      for ( int ls = 0; ls < 40; ++ls )
      {
        for ( Eigen::Index i = 0; i < n; ++i )
          trial[i] = z[i] + step * d[i];
        ++evaluations_;
        prob_.eval( trial, p, tg, &tjac );
        auto const tphi = min_of( tg );
        if ( std::isfinite( tphi ) && tphi >= phi + 1e-4 * step * pred )
        {
          accepted = true;
          break;
        }
        step /= 2;
      }
      if ( !accepted )
        break;
      Eigen::VectorXd s( n ), y( n );
      for ( Eigen::Index i = 0; i < n; ++i )
      {
        s[i] = trial[i] - z[i];
        double gl_new = 0.0, gl_old = 0.0;
        for ( Eigen::Index j = 0; j < m; ++j )
        {
          gl_new -= lambda[j] * tjac[j][i];
          gl_old -= lambda[j] * jac[j][i];
        }
        y[i] = gl_new - gl_old;
      }
      Eigen::VectorXd const Bs = B * s;
      double const sBs = s.dot( Bs ), sy = s.dot( y );
      if ( sBs > 0.0 )
      {
        double theta = 1.0;
        if ( sy < 0.2 * sBs )
          theta = 0.8 * sBs / ( sBs - sy );
        Eigen::VectorXd const r = theta * y + ( 1.0 - theta ) * Bs;
        double const sr = s.dot( r );
        if ( sr > 1e-300 )
          B += r * r.transpose() / sr - Bs * Bs.transpose() / sBs;
      }
      z = trial;
      g = tg;
      jac = tjac;
      phi = min_of( g );
    }
    return phi;
  }

  uint64_t evaluations() const { return evaluations_; }

  /*! \brief argmin over the simplex of 0.5 l'Ql + g'l (dual of the epigraph subproblem). */
  static Eigen::VectorXd simplex_qp( Eigen::MatrixXd const& Q, Eigen::VectorXd const& g )
  {
    auto const m = Q.rows();
    auto const objective = [&]( Eigen::VectorXd const& l ) { return 0.5 * l.dot( Q * l ) + g.dot( l ); };
    Eigen::VectorXd best = Eigen::VectorXd::Zero( m );
    double best_obj = INFINITY;
    if ( m <= 12 )
    {
      for ( uint32_t mask = 1; mask < ( 1u << m ); ++mask )
      {
        std::vector<Eigen::Index> idx;
        for ( Eigen::Index j = 0; j < m; ++j )
          if ( ( mask >> j ) & 1u )
            idx.push_back( j );
        auto const k = static_cast<Eigen::Index>( idx.size() );
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero( k + 1, k + 1 );
        Eigen::VectorXd rhs( k + 1 );
        for ( Eigen::Index a = 0; a < k; ++a )
        {
          for ( Eigen::Index b = 0; b < k; ++b )
            K( a, b ) = Q( idx[a], idx[b] );
          K( a, k ) = 1.0;
          K( k, a ) = 1.0;
          rhs[a] = -g[idx[a]];
        }
        rhs[k] = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> const lu( K );
        if ( !lu.isInvertible() )
          continue;
        Eigen::VectorXd const sol = lu.solve( rhs );
        Eigen::VectorXd l = Eigen::VectorXd::Zero( m );
        bool ok = true;
        for ( Eigen::Index a = 0; a < k; ++a )
        {
          if ( sol[a] < -1e-12 )
            ok = false;
          l[idx[a]] = std::max( 0.0, sol[a] );
        }
        if ( !ok )
          continue;
        auto const obj = objective( l );
        if ( obj < best_obj )
        {
          best_obj = obj;
          best = l;
        }
      }
      return best;
    }
    // projected gradient on the simplex
    Eigen::VectorXd l = Eigen::VectorXd::Constant( m, 1.0 / static_cast<double>( m ) );
    double const L = std::max( 1e-12, Q.norm() );
    for ( int it = 0; it < 20000; ++it )
    {
      Eigen::VectorXd v = l - ( Q * l + g ) / L;
      std::vector<double> u( v.data(), v.data() + m );
      std::sort( u.begin(), u.end(), std::greater<>() );
      double cum = 0.0, tau = 0.0;
      for ( Eigen::Index j = 0; j < m; ++j )
      {
        cum += u[j];
        auto const t = ( cum - 1.0 ) / static_cast<double>( j + 1 );
        if ( u[j] - t > 0 )
          tau = t;
      }
      Eigen::VectorXd const next = ( v.array() - tau ).max( 0.0 ).matrix();
      if ( ( next - l ).norm() < 1e-15 )
        break;
      l = next;
    }
    return l;
  }

private:
  minimax_problem const& prob_;
  search_budget const& budget_;
  std::vector<double> g_;
  uint64_t evaluations_{ 0 };
};

} // namespace detail

struct exponent_search
{
  bool certified{ false };
  double p{ 0.0 };
  std::vector<double> z;
  double value{ -INFINITY };
  unsigned bisection_steps{ 0 };
  uint64_t evaluations{ 0 };
  /*! \brief Whether the same search also certified p + 10 * p_tol (it should not). */
  bool above_certified{ false };
};

/*! \brief Bisection on p over [p_lo, p_hi] with warm-started inner searches. */
inline exponent_search maximize_exponent( minimax_problem const& prob, uint64_t seed, search_budget const& budget )
{
  std::mt19937_64 start_rng( seed );
  std::normal_distribution<double> normal( 0.0, 0.5 );
  std::vector<std::vector<double>> starts{ std::vector<double>( prob.dim, 0.0 ) };
  for ( unsigned r = 0; r < budget.restarts; ++r )
  {
    std::vector<double> z( prob.dim );
    for ( auto& x : z )
      x = normal( start_rng );
    starts.push_back( std::move( z ) );
  }
  exponent_search out;
  std::optional<std::vector<double>> warm;

  // runs candidate starts; returns the lowest-index feasible result
  auto const attempt = [&]( double p ) -> std::optional<inner_result> {
    if ( warm )
    {
      detail::inner_solver solver( prob, budget );
      auto z = *warm;
      auto v = solver.sqp( z, p );
      out.evaluations += solver.evaluations();
      if ( v > budget.epsilon )
        return inner_result{ z, v, 0 };
    }
    std::vector<inner_result> results( starts.size() );
    auto const run = [&]( std::size_t k ) {
      detail::inner_solver solver( prob, budget );
      std::mt19937_64 rng( seed * 1000003u + k );
      auto z = starts[k];
      solver.pattern_search( z, p, rng );
      auto const v = solver.sqp( z, p );
      results[k] = { z, v, solver.evaluations() };
    };
    std::size_t const jobs = std::max( 1u, budget.jobs );
    for ( std::size_t begin = 0; begin < starts.size(); begin += jobs )
    {
      auto const end = std::min( starts.size(), begin + jobs );
      if ( jobs == 1 )
      {
        run( begin );
      }
      else
      {
        std::vector<std::thread> threads;
        for ( auto k = begin; k < end; ++k )
          threads.emplace_back( run, k );
        for ( auto& t : threads )
          t.join();
      }
      for ( auto k = begin; k < end; ++k )
      {
        out.evaluations += results[k].evaluations;
        if ( results[k].value > budget.epsilon )
          return results[k];
      }
    }
    return std::nullopt;
  };

  double lo = budget.p_lo, hi = budget.p_hi;
  auto first = attempt( lo );
  if ( !first )
    return out;
  out.certified = true;
  out.p = lo;
  out.z = first->z;
  out.value = first->value;
  warm = first->z;
  while ( hi - lo > budget.p_tol )
  {
    auto const mid = 0.5 * ( lo + hi );
    ++out.bisection_steps;
    if ( auto r = attempt( mid ) )
    {
      lo = mid;
      out.p = mid;
      out.z = r->z;
      out.value = r->value;
      warm = r->z;
    }
    else
    {
      hi = mid;
    }
  }
  out.above_certified = attempt( out.p + 10 * budget.p_tol ).has_value();
  return out;
}

/* ------------------------------------------------------------------ */
/* cost systems                                                       */
/* ------------------------------------------------------------------ */

namespace detail
{

/*! \brief Minimax problem of a cost system; the first weight is fixed to 1, alpha is free. */
inline minimax_problem cost_system_problem( cost_system const& sys )
{
  struct piece_data
  {
    std::vector<std::vector<expr>> bound_pieces; // per bound
    std::vector<uint32_t> inputs;
  };
  auto const nvars = sys.variables().size();
  auto types = std::make_shared<std::vector<piece_data>>();
  for ( auto const& t : sys.types )
  {
    piece_data pd;
    for ( auto const& v : t.inputs )
      pd.inputs.push_back( sys.slot_of( v ) );
    std::size_t combos = 1;
    for ( auto const& b : t.bounds )
    {
      pd.bound_pieces.push_back( b.rhs.pieces() );
      combos *= pd.bound_pieces.back().size();
      if ( combos > 4096 )
        throw resource_error( "cost system " + sys.name + " expands to more than 4096 constraint pieces" );
    }
    types->push_back( std::move( pd ) );
  }
  minimax_problem prob;
  prob.dim = nvars - 1;
  prob.eval = [types, nvars]( std::vector<double> const& z, double p, std::vector<double>& g,
                              std::vector<std::vector<double>>* jac ) {
    std::vector<double> w( nvars );
    w[0] = 1.0;
    for ( std::size_t i = 1; i < nvars; ++i )
      w[i] = std::exp( z[i - 1] );
    g.clear();
    if ( jac )
      jac->clear();
    std::vector<double> grad;
    for ( auto const& t : *types )
    {
      double in = 0.0;
      std::vector<double> in_grad( nvars, 0.0 );
      for ( auto s : t.inputs )
      {
        auto const wp = std::pow( w[s], p );
        in += wp;
        in_grad[s] += p * wp; // d/dz of w^p
      }
      // per bound: values and log-gradients of piece^p
      std::vector<std::vector<double>> vals( t.bound_pieces.size() );
      std::vector<std::vector<std::vector<double>>> grads( t.bound_pieces.size() );
      for ( std::size_t b = 0; b < t.bound_pieces.size(); ++b )
      {
        for ( auto const& piece : t.bound_pieces[b] )
        {
          auto const y = piece.eval_gradient( w, grad );
          if ( !( y > 0.0 ) )
          {
            vals[b].push_back( NAN );
            grads[b].emplace_back( nvars, 0.0 );
            continue;
          }
          auto const yp = std::pow( y, p );
          vals[b].push_back( yp );
          std::vector<double> gz( nvars );
          for ( std::size_t i = 0; i < nvars; ++i )
            gz[i] = p * yp / y * grad[i] * w[i];
          grads[b].push_back( std::move( gz ) );
        }
      }
      std::vector<std::size_t> pick( t.bound_pieces.size(), 0 );
      for ( ;; )
      {
        double v = in;
        std::vector<double> gz = in_grad;
        for ( std::size_t b = 0; b < pick.size(); ++b )
        {
          v -= vals[b][pick[b]];
          for ( std::size_t i = 0; i < nvars; ++i )
            gz[i] -= grads[b][pick[b]][i];
        }
        g.push_back( std::isnan( v ) ? -INFINITY : v );
        if ( jac )
          jac->emplace_back( gz.begin() + 1, gz.end() );
        std::size_t b = 0;
        while ( b < pick.size() && ++pick[b] == vals[b].size() )
          pick[b++] = 0;
        if ( b == pick.size() )
          break;
      }
    }
  };
  return prob;
}

} // namespace detail

struct optimize_result
{
  bool certified{ false };
  param_set params;
  margins at_optimum;
  unsigned bisection_steps{ 0 };
  uint64_t evaluations{ 0 };
  bool above_certified{ false };
};

/*! \brief Largest certified p for a cost system, with alpha and weights (first weight fixed to 1). */
inline optimize_result optimize_params( cost_system const& sys, uint64_t seed = 1, search_budget const& budget = {} )
{
  if ( sys.params.size() > 1 )
    throw error( "optimize_params supports at most one parameter (alpha)" );
  auto const prob = detail::cost_system_problem( sys );
  auto const s = maximize_exponent( prob, seed, budget );
  optimize_result r;
  r.certified = s.certified;
  r.bisection_steps = s.bisection_steps;
  r.evaluations = s.evaluations;
  r.above_certified = s.above_certified;
  if ( !s.certified )
    return r;
  r.params.name = "optimized-" + sys.name;
  r.params.p = s.p;
  auto const& vars = sys.variables();
  for ( std::size_t i = 0; i < sys.num_weights(); ++i )
    r.params.weights[vars[i]] = i == 0 ? 1.0 : std::exp( s.z[i - 1] );
  if ( !sys.params.empty() )
    r.params.alpha = std::exp( s.z.back() );
  r.at_optimum = check_balance( sys, r.params, budget.epsilon );
  return r;
}

/* ------------------------------------------------------------------ */
/* matrices                                                           */
/* ------------------------------------------------------------------ */

struct matrix_result
{
  bool certified{ false };
  double p{ 0.0 };
  std::vector<double> weights;
  /*! \brief matrix: one margin; bit analysis: a_0 and the nu-weighted sum. */
  std::vector<double> margins;
  /*! \brief Per-significance a_s (bit analysis only). */
  std::vector<double> a;
  double nu{ 1.0 };
  unsigned bisection_steps{ 0 };
  uint64_t evaluations{ 0 };
  bool above_certified{ false };
};

namespace detail
{

inline std::vector<double> matrix_outputs( matrix_system const& ms, std::vector<double> const& x )
{
  std::vector<double> y( ms.rows(), 0.0 );
  for ( std::size_t r = 0; r < ms.rows(); ++r )
    for ( std::size_t c = 0; c < ms.cols(); ++c )
      y[r] += ms.m[r][c] * x[c];
  return y;
}

/*! \brief Evaluates the balance pieces of a matrix; `nu <= 0` selects the plain matrix condition,
           `nu_from_p` uses nu = 2^p. */
struct matrix_evaluator
{
  matrix_system const* ms;
  bool bits{ false };
  std::optional<double> fixed_nu;

  double nu_for( double p ) const { return fixed_nu ? *fixed_nu : std::pow( 2.0, p ); }

  void operator()( std::vector<double> const& z, double p, std::vector<double>& g, std::vector<std::vector<double>>* jac,
                   std::vector<double>* a_out = nullptr ) const
  {
    auto const n = ms->cols();
    std::vector<double> x( n );
    x[0] = 1.0;
    for ( std::size_t i = 1; i < n; ++i )
      x[i] = std::exp( z[i - 1] );
    auto const y = matrix_outputs( *ms, x );
    unsigned top = 0;
    if ( bits )
    {
      for ( auto s : ms->sigs_in )
        top = std::max( top, s );
      for ( auto s : ms->sigs_out )
        top = std::max( top, s );
    }
    std::vector<double> a( top + 1, 0.0 );
    std::vector<std::vector<double>> da( top + 1, std::vector<double>( n, 0.0 ) );
    for ( std::size_t c = 0; c < n; ++c )
    {
      auto const s = bits ? ms->sigs_in[c] : 0u;
      auto const xp = std::pow( x[c], p );
      a[s] += xp;
      da[s][c] += p * xp;
    }
    for ( std::size_t r = 0; r < y.size(); ++r )
    {
      auto const s = bits ? ms->sigs_out[r] : 0u;
      if ( !( y[r] > 0.0 ) )
        continue;
      auto const yp = std::pow( y[r], p );
      a[s] -= yp;
      for ( std::size_t c = 0; c < n; ++c )
        da[s][c] -= p * yp / y[r] * ms->m[r][c] * x[c];
    }
    g.clear();
    if ( jac )
      jac->clear();
    auto const push = [&]( double v, std::vector<double> const& gz ) {
      g.push_back( v );
      if ( jac )
        jac->emplace_back( gz.begin() + 1, gz.end() );
    };
    if ( !bits )
    {
      push( a[0], da[0] );
    }
    else
    {
      auto const nu = nu_for( p );
      push( a[0], da[0] );
      double tot = 0.0;
      std::vector<double> dtot( n, 0.0 );
      for ( unsigned s = 0; s <= top; ++s )
      {
        auto const f = std::pow( nu, -static_cast<double>( s ) );
        tot += a[s] * f;
        for ( std::size_t c = 0; c < n; ++c )
          dtot[c] += da[s][c] * f;
      }
      // nu = 2^p depends on p only, not on the weights
      push( tot, dtot );
    }
    if ( a_out )
      *a_out = a;
  }
};

inline matrix_result matrix_search( matrix_system const& ms, detail::matrix_evaluator ev, uint64_t seed,
                                    search_budget const& budget )
{
  ms.validate();
  minimax_problem prob;
  prob.dim = ms.cols() - 1;
  prob.eval = [ev]( std::vector<double> const& z, double p, std::vector<double>& g, std::vector<std::vector<double>>* jac ) {
    ev( z, p, g, jac );
  };
  auto const s = maximize_exponent( prob, seed, budget );
  matrix_result r;
  r.certified = s.certified;
  r.bisection_steps = s.bisection_steps;
  r.evaluations = s.evaluations;
  r.above_certified = s.above_certified;
  if ( !s.certified )
    return r;
  r.p = s.p;
  r.weights.push_back( 1.0 );
  for ( auto v : s.z )
    r.weights.push_back( std::exp( v ) );
  ev( s.z, s.p, r.margins, nullptr, &r.a );
  r.nu = ev.bits ? ev.nu_for( s.p ) : 1.0;
  return r;
}

} // namespace detail

/*! \brief Largest p with weights X > 0 (first fixed to 1) such that sum X^p - sum (MX)^p > epsilon. */
inline matrix_result matrix_exponent( matrix_system const& ms, uint64_t seed = 1, search_budget const& budget = {} )
{
  return detail::matrix_search( ms, { &ms, false, std::nullopt }, seed, budget );
}

/*! \brief Largest p with a_0 > epsilon and sum_s a_s nu^-s > epsilon; nu = 2^p unless `nu` is given. */
inline matrix_result bit_exponent( matrix_system const& ms, uint64_t seed = 1, search_budget const& budget = {},
                                   std::optional<double> nu = std::nullopt )
{
  if ( ms.sigs_in.size() != ms.cols() || ms.sigs_out.size() != ms.rows() )
    throw error( "bit_exponent: matrix " + ms.name + " needs sigs_in and sigs_out" );
  return detail::matrix_search( ms, { &ms, true, nu }, seed, budget );
}

} // namespace csaform

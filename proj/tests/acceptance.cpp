#include <csaform/csaform.hpp>
#include <csaform/report.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace csaform;

namespace
{

struct outcome
{
  bool pass{ false };
  std::string detail;
  std::string attachment;
};

int failures = 0;

void criterion( int id, std::string const& title, std::function<outcome()> const& body )
{
  auto const start = std::chrono::steady_clock::now();
  outcome o;
  try
  {
    o = body();
  }
  catch ( std::exception const& e )
  {
    o.pass = false;
    o.detail = std::string( "exception: " ) + e.what();
  }
  auto const secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
  std::ostringstream line;
  line.setf( std::ios::fixed );
  line.precision( 1 );
  line << ( o.pass ? "PASS" : "FAIL" ) << "  criterion " << id << "  " << title << "  (" << o.detail << "; " << secs << " s)";
  std::cout << line.str() << std::endl;
  if ( !o.pass )
  {
    ++failures;
    if ( !o.attachment.empty() )
      std::cout << o.attachment << std::endl;
  }
}

std::string fmt( double x, int digits = 6 )
{
  std::ostringstream os;
  os.precision( digits );
  os << x;
  return os.str();
}

/* ------------------------------------------------------------------ */

outcome block_correctness()
{
  auto const& lib = block_library();
  std::vector<std::string> const required = { "fa3_b2",  "fa3_b0", "mdfa",   "fig2",   "sfa5",   "fig3",
                                              "sfa7",    "sfa7p",  "fig4",   "xor_pair_encoder", "mon_pair_encoder",
                                              "sort_triple_encoder", "chain1", "chain2", "chain3", "chain4", "csa17" };
  for ( auto const& r : required )
    if ( !lib.blocks.count( r ) )
      return { false, "missing block " + r, {} };
  uint64_t total = 0;
  std::string bad;
  auto const start = std::chrono::steady_clock::now();
  for ( auto const& [name, b] : lib.blocks )
  {
    auto const r = verify_block( b );
    total += r.assignments_checked;
    if ( !r.passed() || !r.exhaustive )
      bad += " " + name;
  }
  auto const secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
  bool const ok = bad.empty() && secs < 60.0;
  return { ok, std::to_string( lib.blocks.size() ) + " blocks, " + std::to_string( total ) + " assignments" +
                   ( bad.empty() ? "" : ", failing:" + bad ),
           {} };
}

outcome paper_parameters()
{
  std::string detail;
  bool ok = true;
  for ( auto const* name : { "mdfa", "sfa5", "sfa7" } )
  {
    auto const m = check_balance( builtin_system( name ), paper_params( std::string( "paper-" ) + name ) );
    ok &= m.feasible;
    detail += std::string( detail.empty() ? "" : ", " ) + name + " min margin " + fmt( m.min_margin(), 4 ) +
              ( m.feasible ? "" : " (not > 1e-9)" );
  }
  return { ok, detail, {} };
}

outcome exponent_recovery()
{
  struct target
  {
    char const* system;
    double limit;
    double paper;
  };
  std::string detail;
  bool ok = true;
  for ( auto const& t : { target{ "mdfa", 3.0510, 3.0509 }, target{ "sfa5", 4.5470, 4.546 }, target{ "sfa7", 4.5360, 4.5358 } } )
  {
    auto const start = std::chrono::steady_clock::now();
    auto const r = optimize_params( builtin_system( t.system ), 1 );
    auto const secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    auto const inv = r.certified ? 1.0 / r.params.p : INFINITY;
    bool const good = r.certified && r.at_optimum.feasible && inv <= t.limit && std::abs( inv - t.paper ) <= 0.002 && secs < 300.0;
    ok &= good;
    detail += std::string( detail.empty() ? "" : ", " ) + t.system + " 1/p* " + fmt( inv, 7 ) + " in " + fmt( secs, 3 ) + " s";
  }
  return { ok, detail, {} };
}

outcome matrix_analyses()
{
  auto const a = matrix_exponent( named_matrix( "paper-15x6" ) );
  auto const b = matrix_exponent( named_matrix( "paper-17x6" ) );
  auto const c = bit_exponent( named_matrix( "paper-15x6" ) );
  auto const d = bit_exponent( named_matrix( "paper-17x6" ) );
  auto const near = []( matrix_result const& r, double want ) { return r.certified && std::abs( 1.0 / r.p - want ) <= 0.01; };
  bool const ok = near( a, 3.089 ) && near( b, 4.558 ) && near( c, 2.2285 ) && near( d, 3.8183 ) &&
                  std::abs( 1.0 + 1.0 / c.p - 3.2285 ) <= 0.01 && std::abs( 1.0 + 1.0 / d.p - 4.8183 ) <= 0.01;
  return { ok,
           "15x6 " + fmt( 1.0 / a.p ) + ", 17x6 " + fmt( 1.0 / b.p ) + ", bits 15x6 " + fmt( 1.0 / c.p ) + " (sym " +
               fmt( 1.0 + 1.0 / c.p ) + "), bits 17x6 " + fmt( 1.0 / d.p ) + " (sym " + fmt( 1.0 + 1.0 / d.p ) + ")",
           {} };
}

/* A B0-valid formula with exactly `leaves` leaves over fresh variables. */
formula sized_formula( uint64_t leaves, uint32_t& next )
{
  formula f = make_var( next++ );
  for ( uint64_t i = 1; i < leaves; ++i )
    f = make_and( f, make_var( next++ ) );
  return f;
}

outcome cost_soundness()
{
  struct pairing
  {
    char const* composite;
    char const* system;
    double alpha_lo, alpha_hi;
  };
  std::mt19937_64 rng( 2024 );
  std::uniform_int_distribution<uint64_t> size( 1, 40 );
  uint64_t checks = 0;
  std::string worst;
  for ( auto const& pr : { pairing{ "fig2", "mdfa", 1.2, 4.0 }, pairing{ "fig3", "sfa5", 1.0, 1.0 }, pairing{ "fig4", "sfa7", 1.1, 3.0 } } )
  {
    auto const& comp = block_library().composite( pr.composite );
    auto const flat = flatten( comp );
    auto const sys = builtin_system( pr.system );
    std::uniform_real_distribution<double> alpha_dist( pr.alpha_lo, pr.alpha_hi );
    for ( int trial = 0; trial < 1000; ++trial )
    {
      double const alpha = sys.params.empty() ? 1.0 : alpha_dist( rng );
      uint32_t next = 0;
      std::vector<formula> args;
      param_set ps;
      ps.p = 0.5;
      if ( !sys.params.empty() )
        ps.alpha = alpha;
      for ( auto const& s : comp.inputs )
      {
        std::vector<double> sizes;
        for ( std::size_t c = 0; c < component_count( s.enc ); ++c )
        {
          auto const k = size( rng );
          sizes.push_back( static_cast<double>( k ) );
          args.push_back( sized_formula( k, next ) );
        }
        ps.weights[s.name] = slot_cost( s.enc, sizes, alpha );
      }
      auto const values = system_values( sys, ps );
      std::size_t t = 0;
      for ( auto const& s : comp.outputs )
      {
        std::vector<double> sizes;
        for ( std::size_t c = 0; c < component_count( s.enc ); ++c, ++t )
          sizes.push_back( static_cast<double>( instantiate( flat.templates[t], args, { comp.base, false } ).leaf_count() ) );
        auto const measured = slot_cost( s.enc, sizes, alpha );
        double bound = -1;
        for ( auto const& ty : sys.types )
          for ( auto const& b : ty.bounds )
            if ( b.name == s.name )
              bound = b.rhs.eval( values );
        if ( bound < 0 )
          return { false, std::string( "no bound named " ) + s.name + " in " + pr.system, {} };
        ++checks;
        if ( measured > bound * ( 1 + 1e-12 ) )
        {
          worst = std::string( pr.composite ) + "." + s.name + " measured " + fmt( measured ) + " > bound " + fmt( bound ) +
                  " at alpha " + fmt( alpha );
          return { false, worst, {} };
        }
      }
    }
  }
  return { true, std::to_string( checks ) + " output bounds checked over 3000 size vectors", {} };
}

outcome construction_correctness()
{
  uint64_t builds = 0, assignments = 0;
  std::string bad;
  for ( auto b : { basis::b2, basis::b0 } )
  {
    build_options o;
    o.base = b;
    for ( uint64_t n = 1; n <= 16; ++n )
    {
      auto const r = check_counter( build_counter( n, o ), n );
      ++builds;
      assignments += r.checked;
      if ( !r.passed() )
        bad += " counter/" + to_string( b ) + "/" + std::to_string( n );
    }
    for ( uint64_t n : { 64u, 256u, 1024u } )
    {
      auto const r = check_counter( build_counter( n, o ), n, 10000, n );
      ++builds;
      assignments += r.checked;
      if ( !r.passed() || r.checked != 10000 )
        bad += " counter/" + to_string( b ) + "/" + std::to_string( n );
    }
    for ( uint64_t n = 1; n <= 15; ++n )
    {
      std::vector<std::pair<std::string, std::vector<bool>>> fs;
      std::vector<bool> maj( n + 1 ), par( n + 1 );
      for ( uint64_t w = 0; w <= n; ++w )
      {
        maj[w] = 2 * w > n;
        par[w] = w & 1u;
      }
      fs.emplace_back( "majority", maj );
      fs.emplace_back( "parity", par );
      for ( uint64_t k = 0; k <= n; ++k )
      {
        std::vector<bool> ex( n + 1 );
        ex[k] = true;
        fs.emplace_back( "exactly" + std::to_string( k ), ex );
      }
      for ( auto const& [name, values] : fs )
      {
        auto const r = check_symmetric( build_symmetric( values, n, o ), values, n );
        ++builds;
        assignments += r.checked;
        if ( !r.passed() || !r.exhaustive )
          bad += " " + name + "/" + to_string( b ) + "/" + std::to_string( n );
      }
    }
  }
  return { bad.empty(), std::to_string( builds ) + " builds, " + std::to_string( assignments ) + " assignments" + ( bad.empty() ? "" : ", failing:" + bad ),
           {} };
}

outcome dual_identities()
{
  using namespace dsl;
  std::string bad;
  /* T_5^4 over (x1, u1 v1, u1|v1, u2 v2, u2|v2) */
  auto const t54 = sfa5().templates[1];
  auto const expanded = instantiate( t54, { v( 0 ), v( 1 ) & v( 2 ), v( 1 ) | v( 2 ), v( 3 ) & v( 4 ), v( 3 ) | v( 4 ) } );
  if ( !( compute_truth_table( expanded, 5 ) == threshold_table( 5, 4 ) ) )
    bad += " T54";
  if ( !( compute_truth_table( dualize_monotone( expanded ), 5 ) == threshold_table( 5, 2 ) ) )
    bad += " dual(T54)";
  auto const swapped = rename_vars( dualize_monotone( t54 ), { 0, 2, 1, 4, 3 } );
  if ( !( compute_truth_table( instantiate( swapped, { v( 0 ), v( 1 ) & v( 2 ), v( 1 ) | v( 2 ), v( 3 ) & v( 4 ), v( 3 ) | v( 4 ) } ), 5 ) ==
          threshold_table( 5, 2 ) ) )
    bad += " swapped-dual(T54)";

  /* T_4^1 and T_4^2 over (y, s', s'', s''') with the s' <-> s''' swap */
  auto const triple = std::vector<formula>{ v( 0 ), ( v( 1 ) | v( 2 ) ) | v( 3 ), ( ( v( 1 ) | v( 2 ) ) & v( 3 ) ) | ( v( 1 ) & v( 2 ) ),
                                            ( v( 1 ) & v( 2 ) ) & v( 3 ) };
  for ( unsigned k : { 1u, 2u } )
  {
    auto const t = threshold4_over_triple( k );
    if ( !( compute_truth_table( instantiate( t, triple ), 4 ) == threshold_table( 4, k ) ) )
      bad += " T4" + std::to_string( k );
    auto const dual = rename_vars( dualize_monotone( t ), { 0, 3, 2, 1 } );
    if ( !( compute_truth_table( instantiate( dual, triple ), 4 ) == threshold_table( 4, 5 - k ) ) )
      bad += " dual(T4" + std::to_string( k ) + ")";
    if ( !( compute_truth_table( dualize_monotone( instantiate( t, triple ) ), 4 ) == threshold_table( 4, 5 - k ) ) )
      bad += " expanded-dual(T4" + std::to_string( k ) + ")";
  }
  return { bad.empty(), bad.empty() ? "T5^4 -> T5^2, T4^1 -> T4^4, T4^2 -> T4^3" : "failing:" + bad, {} };
}

outcome growth_sanity()
{
  std::vector<uint64_t> ns;
  for ( uint64_t n = 32; n <= 4096; n *= 2 )
    ns.push_back( n );
  build_options b2;
  b2.base = basis::b2;
  b2.csa = "fig2";
  build_options b0;
  b0.base = basis::b0;
  b0.csa = "fig4";
  auto const g2 = fit_growth( ns, std::nullopt, b2 );
  auto const g0 = fit_growth( ns, std::nullopt, b0 );
  bool const ok = g2.slope >= 2.5 && g2.slope <= 3.6 && g0.slope >= 3.8 && g0.slope <= 5.2;
  std::string const detail = "b2/fig2 slope " + fmt( g2.slope, 4 ) + " (rms " + fmt( g2.residual, 3 ) + "), b0/fig4 slope " +
                             fmt( g0.slope, 4 ) + " (rms " + fmt( g0.residual, 3 ) + ")";
  return { ok, detail, "b2/fig2\n" + g2.to_csv() + "b0/fig4\n" + g0.to_csv() };
}

std::pair<int, std::string> run_cli( std::string const& args, std::filesystem::path const& dir )
{
  auto const cmd = "cd '" + dir.string() + "' && '" CSAFORM_CLI "' " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen( cmd.c_str(), "r" );
  if ( !pipe )
    throw std::runtime_error( "popen failed" );
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ( ( got = fread( buf.data(), 1, buf.size(), pipe ) ) > 0 )
    out.append( buf.data(), got );
  auto const status = pclose( pipe );
  return { WIFEXITED( status ) ? WEXITSTATUS( status ) : -1, out };
}

outcome cli_determinism()
{
  auto const dir = std::filesystem::temp_directory_path() / ( "csaform_acceptance_" + std::to_string( ::getpid() ) );
  std::filesystem::create_directories( dir );
  std::vector<std::string> const commands = {
      "verify-blocks --block mdfa --block sfa7 --block csa17 --seed 3",
      "catalog --block fig2 --seed 3",
      "check --system mdfa --params paper-mdfa --seed 3",
      "optimize --system sfa5 --seed 3",
      "matrix-exponent --matrix paper-17x6 --seed 3",
      "bit-exponent --matrix paper-15x6 --seed 3",
      "plan --params paper-mdfa --n 1024 --seed 3",
      "build --n 40 --basis b0 --selftest random:2000 --out c40.sexp --seed 3",
      "build-bit --n 33 --bit 4 --selftest random:3000 --out bit.sexp --seed 3",
      "synth-sym --n 12 --function exactly:5 --selftest exhaustive --seed 3",
      "fit --n-list 8,16,32,64 --seed 3",
      "eval --formula bit.sexp --input 101010101010101010101010101010101 --seed 3" };
  std::string bad;
  for ( auto const& c : commands )
  {
    auto const [s1, o1] = run_cli( c, dir );
    auto const [s2, o2] = run_cli( c, dir );
    std::string p1, p2;
    try
    {
      p1 = json::parse( o1 ).at( "payload" ).dump();
      p2 = json::parse( o2 ).at( "payload" ).dump();
    }
    catch ( std::exception const& )
    {
      bad += " [" + c + ": no report]";
      continue;
    }
    if ( s1 != 0 || s2 != 0 )
      bad += " [" + c + ": exit " + std::to_string( s1 ) + "/" + std::to_string( s2 ) + "]";
    else if ( p1 != p2 )
      bad += " [" + c + ": payload differs]";
  }
  std::filesystem::remove_all( dir );
  return { bad.empty(), std::to_string( commands.size() ) + " commands run twice" + ( bad.empty() ? "" : ", failing:" + bad ), {} };
}

} // namespace

int main()
{
  criterion( 1, "block correctness", block_correctness );
  criterion( 2, "published parameter certification", paper_parameters );
  criterion( 3, "exponent recovery by optimization", exponent_recovery );
  criterion( 4, "matrix exponents", matrix_analyses );
  criterion( 5, "cost-bound soundness", cost_soundness );
  criterion( 6, "construction correctness", construction_correctness );
  criterion( 7, "dual and threshold identities", dual_identities );
  criterion( 8, "growth sanity", growth_sanity );
  criterion( 9, "CLI determinism", cli_determinism );
  std::cout << ( failures == 0 ? "all criteria passed" : std::to_string( failures ) + " criterion(s) failed" ) << std::endl;
  return failures == 0 ? 0 : 1;
}

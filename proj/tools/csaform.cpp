#include <csaform/csaform.hpp>
#include <csaform/report.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace csaform;

namespace
{

enum exit_code
{
  exit_ok = 0,
  exit_usage = 1,
  exit_check = 2,
  exit_resource = 3
};

class usage_error : public error
{
public:
  using error::error;
};

constexpr uint64_t max_written_leaves = uint64_t{ 1 } << 26;

struct common_options
{
  std::string system;
  std::string matrix;
  std::string params;
  uint64_t n{ 0 };
  std::optional<unsigned> bit;
  std::string basis_name{ "b2" };
  std::string csa;
  uint64_t seed{ 1 };
  unsigned budget{ 1 };
  std::string out;
  std::string format{ "json" };
  std::string selftest{ "off" };
  unsigned jobs{ 1 };

  std::vector<std::string> blocks;
  unsigned threshold{ 3 };
  std::string schedule{ "rounds" };
  std::optional<double> nu;
  double p_factor{ 0.97 };
  std::string values;
  std::string function;
  std::string n_list{ "32,64,128,256,512,1024,2048,4096" };
  std::string band;
  std::string formula_path;
  std::string input;
};

std::string read_file( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw usage_error( "cannot open '" + path + "'" );
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file( std::string const& path, std::string const& text )
{
  std::ofstream out( path );
  if ( !out )
    throw usage_error( "cannot write '" + path + "'" );
  out << text;
}

bool is_builtin_system( std::string const& name )
{
  return name == "mdfa" || name == "sfa5" || name == "sfa7";
}

cost_system resolve_system( std::string const& name )
{
  if ( is_builtin_system( name ) )
    return builtin_system( name );
  return parse_cost_system( read_file( name ) );
}

param_set resolve_params( std::string const& name )
{
  if ( name.rfind( "paper-", 0 ) == 0 )
    return paper_params( name );
  auto ps = parse_params( read_file( name ) );
  if ( ps.name.empty() )
    ps.name = name;
  return ps;
}

matrix_system resolve_matrix( std::string const& name )
{
  if ( name.rfind( "paper-", 0 ) == 0 )
    return named_matrix( name );
  auto ms = parse_matrix( read_file( name ) );
  if ( ms.name.empty() )
    ms.name = name;
  return ms;
}

basis resolve_basis( std::string const& name )
{
  if ( name == "b2" )
    return basis::b2;
  if ( name == "b0" )
    return basis::b0;
  throw usage_error( "unknown basis '" + name + "'" );
}

search_budget make_budget( common_options const& o )
{
  auto b = search_budget::from_level( o.budget );
  b.jobs = std::max( 1u, o.jobs );
  return b;
}

build_options make_build_options( common_options const& o )
{
  build_options b;
  b.base = resolve_basis( o.basis_name );
  b.csa = o.csa;
  b.threshold = o.threshold;
  b.seed = o.seed;
  if ( o.schedule == "rounds" )
    b.schedule = schedule_order::rounds;
  else if ( o.schedule == "lowest-significance" )
    b.schedule = schedule_order::lowest_significance;
  else
    throw usage_error( "unknown schedule '" + o.schedule + "'" );
  if ( !b.csa.empty() )
  {
    auto const names = counter_composites();
    if ( std::find( names.begin(), names.end(), b.csa ) == names.end() )
      throw usage_error( "unknown csa '" + b.csa + "'" );
  }
  return b;
}

/* selftest = off | exhaustive | random:K */
struct selftest_mode
{
  bool enabled{ false };
  std::optional<uint64_t> samples;
};

selftest_mode parse_selftest( std::string const& s )
{
  if ( s == "off" )
    return {};
  if ( s == "exhaustive" )
    return { true, std::nullopt };
  if ( s.rfind( "random:", 0 ) == 0 )
  {
    auto const k = s.substr( 7 );
    if ( k.empty() || k.find_first_not_of( "0123456789" ) != std::string::npos )
      throw usage_error( "bad selftest sample count '" + k + "'" );
    return { true, std::stoull( k ) };
  }
  throw usage_error( "unknown selftest mode '" + s + "'" );
}

std::vector<bool> parse_bits( std::string const& s, std::string const& what )
{
  std::vector<bool> v;
  for ( auto c : s )
  {
    if ( c != '0' && c != '1' )
      throw usage_error( what + " must be a string of 0 and 1" );
    v.push_back( c == '1' );
  }
  return v;
}

std::vector<bool> symmetric_values( common_options const& o )
{
  if ( !o.values.empty() )
  {
    auto v = parse_bits( o.values, "--values" );
    if ( o.n == 0 )
      return v;
    if ( v.size() != o.n + 1 )
      throw usage_error( "--values needs n+1 = " + std::to_string( o.n + 1 ) + " entries" );
    return v;
  }
  if ( o.n == 0 )
    throw usage_error( "--n is required with --function" );
  std::vector<bool> v( o.n + 1 );
  auto const arg = [&]( std::string const& prefix ) -> std::optional<uint64_t> {
    if ( o.function.rfind( prefix, 0 ) != 0 )
      return std::nullopt;
    auto const k = o.function.substr( prefix.size() );
    if ( k.empty() || k.find_first_not_of( "0123456789" ) != std::string::npos )
      throw usage_error( "bad function argument in '" + o.function + "'" );
    return std::stoull( k );
  };
  for ( uint64_t w = 0; w <= o.n; ++w )
  {
    if ( o.function == "majority" )
      v[w] = 2 * w > o.n;
    else if ( o.function == "parity" )
      v[w] = w & 1u;
    else if ( o.function == "const0" )
      v[w] = false;
    else if ( o.function == "const1" )
      v[w] = true;
    else if ( auto k = arg( "exactly:" ) )
      v[w] = w == *k;
    else if ( auto k = arg( "atleast:" ) )
      v[w] = w >= *k;
    else
      throw usage_error( "unknown function '" + o.function + "'" );
  }
  return v;
}

std::vector<uint64_t> parse_n_list( std::string const& s )
{
  std::vector<uint64_t> ns;
  std::istringstream in( s );
  std::string tok;
  while ( std::getline( in, tok, ',' ) )
  {
    if ( tok.empty() || tok.find_first_not_of( "0123456789" ) != std::string::npos )
      throw usage_error( "bad entry '" + tok + "' in --n-list" );
    ns.push_back( std::stoull( tok ) );
  }
  if ( ns.empty() )
    throw usage_error( "--n-list is empty" );
  for ( std::size_t i = 1; i < ns.size(); ++i )
    if ( ns[i] <= ns[i - 1] )
      throw usage_error( "--n-list must be ascending" );
  return ns;
}

std::string bit_file( std::string const& out, std::size_t k )
{
  std::filesystem::path p( out );
  auto name = p.stem().string() + "." + std::to_string( k ) + p.extension().string();
  return ( p.parent_path() / name ).string();
}

void write_formulas( std::vector<std::pair<std::string, formula>> const& files, json& payload )
{
  uint64_t total = 0;
  for ( auto const& [path, f] : files )
    total = saturating_add( total, f.leaf_count() );
  if ( total > max_written_leaves )
    throw resource_error( "refusing to write " + std::to_string( total ) + " leaves (limit " +
                          std::to_string( max_written_leaves ) + ")" );
  auto names = json::array();
  for ( auto const& [path, f] : files )
  {
    write_file( path, render_sexp( f ) + "\n" );
    names.push_back( path );
  }
  payload["files"] = names;
}

json basis_check( formula const& f, basis b )
{
  auto const r = validate_basis( f, b, 4 );
  return { { "valid", r.valid }, { "diagnostics", r.diagnostics } };
}

/* ------------------------------------------------------------------ */

using command_fn = std::function<int( common_options const&, json& )>;

int cmd_verify_blocks( common_options const& o, json& payload )
{
  auto const& lib = block_library();
  std::vector<std::string> names = o.blocks;
  if ( names.empty() )
    for ( auto const& [name, b] : lib.blocks )
      names.push_back( name );
  verify_options vo;
  vo.jobs = std::max( 1u, o.jobs );
  auto reports = json::array();
  bool all = true;
  uint64_t total = 0;
  for ( auto const& name : names )
  {
    auto const r = verify_block( lib.block( name ), vo );
    all &= r.passed();
    total += r.assignments_checked;
    reports.push_back( to_json( r ) );
  }
  payload["blocks"] = reports;
  payload["assignments_checked"] = total;
  payload["passed"] = all;
  return all ? exit_ok : exit_check;
}

int cmd_catalog( common_options const& o, json& payload )
{
  auto const& lib = block_library();
  auto entries = json::array();
  if ( o.blocks.empty() )
    for ( auto const& [name, b] : lib.blocks )
      entries.push_back( catalog_entry( b ) );
  else
    for ( auto const& name : o.blocks )
      entries.push_back( catalog_entry( lib.block( name ) ) );
  payload["composites"] = [&] {
    std::vector<std::string> c;
    for ( auto const& [name, x] : lib.composites )
      c.push_back( name );
    return c;
  }();
  payload["blocks"] = entries;
  if ( !o.out.empty() )
  {
    write_file( o.out, payload.dump( 2 ) + "\n" );
    payload["files"] = { o.out };
  }
  return exit_ok;
}

int cmd_check( common_options const& o, json& payload )
{
  if ( o.params.empty() )
    throw usage_error( "check needs --params" );
  auto const ps = resolve_params( o.params );
  auto sys_name = o.system.empty() ? paper_params_system( o.params ) : o.system;
  if ( sys_name.empty() )
    throw usage_error( "check needs --system" );
  auto const sys = resolve_system( sys_name );
  auto const m = check_balance( sys, ps );
  payload["system"] = sys.name;
  payload["params"] = to_json( ps );
  payload["margins"] = to_json( m );
  return m.feasible ? exit_ok : exit_check;
}

int cmd_optimize( common_options const& o, json& payload )
{
  if ( o.system.empty() )
    throw usage_error( "optimize needs --system" );
  auto const sys = resolve_system( o.system );
  auto const r = optimize_params( sys, o.seed, make_budget( o ) );
  payload["system"] = sys.name;
  payload["result"] = to_json( r );
  return r.certified ? exit_ok : exit_check;
}

int cmd_matrix( common_options const& o, json& payload, bool bits )
{
  if ( o.matrix.empty() )
    throw usage_error( "this command needs --matrix" );
  auto const ms = resolve_matrix( o.matrix );
  auto const r = bits ? bit_exponent( ms, o.seed, make_budget( o ), o.nu ) : matrix_exponent( ms, o.seed, make_budget( o ) );
  payload["matrix"] = ms.name;
  payload["rows"] = ms.rows();
  payload["cols"] = ms.cols();
  payload["result"] = to_json( r, bits );
  return r.certified ? exit_ok : exit_check;
}

int cmd_plan( common_options const& o, json& payload )
{
  auto const n = o.n == 0 ? uint64_t{ 1024 } : o.n;
  if ( !o.matrix.empty() )
  {
    auto const ms = resolve_matrix( o.matrix );
    param_set ps;
    if ( o.params.empty() )
    {
      auto const r = matrix_exponent( ms, o.seed, make_budget( o ) );
      if ( !r.certified )
      {
        payload["error"] = "matrix exponent not certified";
        return exit_check;
      }
      ps = matrix_param_set( ms, r.p * o.p_factor, r.weights );
      payload["p_factor"] = json_number( o.p_factor );
    }
    else
    {
      ps = resolve_params( o.params );
    }
    payload["matrix"] = ms.name;
    payload["params"] = to_json( ps );
    payload["plan"] = to_json( plan_levels( ms, ps, n ) );
    return exit_ok;
  }
  if ( o.params.empty() )
    throw usage_error( "plan needs --params (or --matrix)" );
  auto const ps = resolve_params( o.params );
  auto sys_name = o.system.empty() ? paper_params_system( o.params ) : o.system;
  if ( sys_name.empty() )
    throw usage_error( "plan needs --system" );
  auto const sys = resolve_system( sys_name );
  payload["system"] = sys.name;
  payload["params"] = to_json( ps );
  payload["plan"] = to_json( plan_levels( sys, ps, n ) );
  return exit_ok;
}

int cmd_build( common_options const& o, json& payload )
{
  if ( o.n == 0 )
    throw usage_error( "build needs --n" );
  auto const opts = make_build_options( o );
  auto const st = parse_selftest( o.selftest );
  auto const b = build_counter_detailed( o.n, opts );
  payload["n"] = o.n;
  payload["options"] = to_json( opts );
  auto bits = json::array();
  uint64_t total = 0;
  bool valid = true;
  for ( std::size_t k = 0; k < b.bits.size(); ++k )
  {
    auto const bc = basis_check( b.bits[k], opts.base );
    valid &= bc["valid"].get<bool>();
    total = saturating_add( total, b.bits[k].leaf_count() );
    bits.push_back( { { "bit", k }, { "leaves", b.bits[k].leaf_count() }, { "basis", bc } } );
  }
  payload["bits"] = bits;
  payload["total_leaves"] = total;
  payload["stats"] = to_json( b.stats );
  bool ok = valid;
  if ( st.enabled )
  {
    auto const r = check_counter( b.bits, o.n, st.samples, o.seed );
    payload["selftest"] = to_json( r );
    ok &= r.passed();
  }
  if ( !o.out.empty() )
  {
    std::vector<std::pair<std::string, formula>> files;
    for ( std::size_t k = 0; k < b.bits.size(); ++k )
      files.emplace_back( bit_file( o.out, k ), b.bits[k] );
    write_formulas( files, payload );
  }
  return ok ? exit_ok : exit_check;
}

int cmd_build_bit( common_options const& o, json& payload )
{
  if ( o.n == 0 || !o.bit )
    throw usage_error( "build-bit needs --n and --bit" );
  auto const opts = make_build_options( o );
  auto const st = parse_selftest( o.selftest );
  auto const f = build_bit( o.n, *o.bit, opts );
  payload["n"] = o.n;
  payload["bit"] = *o.bit;
  payload["options"] = to_json( opts );
  payload["leaves"] = f.leaf_count();
  auto const bc = basis_check( f, opts.base );
  payload["basis"] = bc;
  bool ok = bc["valid"].get<bool>();
  if ( st.enabled )
  {
    std::vector<bool> values( o.n + 1 );
    for ( uint64_t w = 0; w <= o.n; ++w )
      values[w] = ( w >> *o.bit ) & 1u;
    auto const r = check_symmetric( f, values, o.n, st.samples, o.seed );
    payload["selftest"] = to_json( r );
    ok &= r.passed();
  }
  if ( !o.out.empty() )
    write_formulas( { { o.out, f } }, payload );
  return ok ? exit_ok : exit_check;
}

int cmd_synth_sym( common_options const& o, json& payload )
{
  if ( o.values.empty() && o.function.empty() )
    throw usage_error( "synth-sym needs --values or --function" );
  auto const values = symmetric_values( o );
  auto const n = static_cast<uint64_t>( values.size() - 1 );
  if ( n == 0 )
    throw usage_error( "synth-sym needs at least one variable" );
  auto const opts = make_build_options( o );
  auto const st = parse_selftest( o.selftest );
  auto const f = build_symmetric( values, n, opts );
  std::string vs;
  for ( auto v : values )
    vs.push_back( v ? '1' : '0' );
  payload["n"] = n;
  payload["values"] = vs;
  payload["options"] = to_json( opts );
  payload["leaves"] = f.leaf_count();
  auto const bc = basis_check( f, opts.base );
  payload["basis"] = bc;
  bool ok = bc["valid"].get<bool>();
  if ( st.enabled )
  {
    auto const r = check_symmetric( f, values, n, st.samples, o.seed );
    payload["selftest"] = to_json( r );
    ok &= r.passed();
  }
  if ( !o.out.empty() )
    write_formulas( { { o.out, f } }, payload );
  return ok ? exit_ok : exit_check;
}

int cmd_fit( common_options const& o, json& payload, std::string& csv )
{
  auto const ns = parse_n_list( o.n_list );
  auto const opts = make_build_options( o );
  auto const g = fit_growth( ns, o.bit, opts );
  payload = to_json( g );
  csv = g.to_csv();
  if ( !o.out.empty() )
  {
    write_file( o.out, csv );
    payload["files"] = { o.out };
  }
  if ( o.band.empty() )
    return exit_ok;
  auto const comma = o.band.find( ',' );
  if ( comma == std::string::npos )
    throw usage_error( "--band expects LO,HI" );
  double lo = 0, hi = 0;
  try
  {
    lo = std::stod( o.band.substr( 0, comma ) );
    hi = std::stod( o.band.substr( comma + 1 ) );
  }
  catch ( std::exception const& )
  {
    throw usage_error( "--band expects LO,HI" );
  }
  bool const inside = g.slope >= lo && g.slope <= hi;
  payload["band"] = { json_number( lo ), json_number( hi ) };
  payload["within_band"] = inside;
  return inside ? exit_ok : exit_check;
}

int cmd_eval( common_options const& o, json& payload )
{
  if ( o.formula_path.empty() )
    throw usage_error( "eval needs --formula" );
  auto const f = parse_sexp( std::string_view( read_file( o.formula_path ) ) );
  auto const nvars = support_bound( f );
  payload["leaves"] = f.leaf_count();
  payload["variables"] = nvars;
  payload["b2"] = basis_check( f, basis::b2 );
  payload["b0"] = basis_check( f, basis::b0 );
  payload["monotone"] = is_monotone( f );
  if ( !o.input.empty() )
  {
    auto const bits = parse_bits( o.input, "--input" );
    if ( bits.size() < nvars )
      throw usage_error( "--input has " + std::to_string( bits.size() ) + " bits, formula reads " +
                         std::to_string( nvars ) );
    payload["input"] = o.input;
    payload["value"] = eval( f, bits ) ? 1 : 0;
  }
  else if ( nvars <= 12 )
  {
    payload["truth_table"] = compute_truth_table( f, nvars ).to_string();
  }
  return exit_ok;
}

/* ------------------------------------------------------------------ */

void render_text( std::ostream& os, json const& j, std::string const& prefix )
{
  if ( j.is_object() )
  {
    for ( auto it = j.begin(); it != j.end(); ++it )
      render_text( os, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key() );
    return;
  }
  if ( j.is_array() && !j.empty() && ( j.front().is_object() || j.front().is_array() ) )
  {
    for ( std::size_t i = 0; i < j.size(); ++i )
      render_text( os, j[i], prefix + "[" + std::to_string( i ) + "]" );
    return;
  }
  os << prefix << ": " << ( j.is_string() ? j.get<std::string>() : j.dump() ) << "\n";
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "Counting and symmetric-function formulas from carry-save adder blocks" };
  app.require_subcommand( 1 );
  common_options o;
  std::string command;
  std::function<int( json& )> action;
  std::string csv;

  auto const add_common = [&]( CLI::App* sub ) {
    sub->add_option( "--seed", o.seed, "Random seed" );
    sub->add_option( "--format", o.format, "Output format" )->check( CLI::IsMember( { "json", "csv", "text" } ) );
    sub->add_option( "--jobs", o.jobs, "Worker threads" )->check( CLI::PositiveNumber );
  };
  auto const add_build = [&]( CLI::App* sub ) {
    sub->add_option( "--basis", o.basis_name, "b0 or b2" )->check( CLI::IsMember( { "b0", "b2" } ) );
    sub->add_option( "--csa", o.csa, "fig2|fig3|fig4|chain1..chain4|csa17" );
    sub->add_option( "--threshold", o.threshold, "Items per significance before the final adder" )->check( CLI::Range( 3u, 1u << 20 ) );
    sub->add_option( "--schedule", o.schedule, "rounds or lowest-significance" );
    sub->add_option( "--selftest", o.selftest, "exhaustive|random:K|off" );
    sub->add_option( "--out", o.out, "Output .sexp path" );
  };
  auto const add_search = [&]( CLI::App* sub ) {
    sub->add_option( "--budget", o.budget, "Search effort level" )->check( CLI::Range( 1u, 64u ) );
  };
  auto const bind = [&]( CLI::App* sub, std::function<int( json& )> fn ) {
    sub->callback( [&command, &action, sub, fn] {
      command = sub->get_name();
      action = fn;
    } );
  };

  auto* verify = app.add_subcommand( "verify-blocks", "Exhaustively verify every library block" );
  add_common( verify );
  verify->add_option( "--block", o.blocks, "Restrict to these blocks" );
  bind( verify, [&]( json& p ) { return cmd_verify_blocks( o, p ); } );

  auto* catalog = app.add_subcommand( "catalog", "Export the block catalog" );
  add_common( catalog );
  catalog->add_option( "--block", o.blocks, "Restrict to these blocks" );
  catalog->add_option( "--out", o.out, "Write the catalog document to this path" );
  bind( catalog, [&]( json& p ) { return cmd_catalog( o, p ); } );

  auto* check = app.add_subcommand( "check", "Evaluate the balance margins of a parameter set" );
  add_common( check );
  check->add_option( "--system", o.system, "mdfa|sfa5|sfa7 or a system file" );
  check->add_option( "--params", o.params, "paper-mdfa|paper-sfa5|paper-sfa7 or a params file" );
  bind( check, [&]( json& p ) { return cmd_check( o, p ); } );

  auto* optimize = app.add_subcommand( "optimize", "Maximize p for a cost system" );
  add_common( optimize );
  add_search( optimize );
  optimize->add_option( "--system", o.system, "mdfa|sfa5|sfa7 or a system file" );
  bind( optimize, [&]( json& p ) { return cmd_optimize( o, p ); } );

  auto* mexp = app.add_subcommand( "matrix-exponent", "Exponent of a size-transfer matrix" );
  add_common( mexp );
  add_search( mexp );
  mexp->add_option( "--matrix", o.matrix, "paper-15x6|paper-17x6 or a matrix file" );
  bind( mexp, [&]( json& p ) { return cmd_matrix( o, p, false ); } );

  auto* bexp = app.add_subcommand( "bit-exponent", "Per-bit exponent of a matrix with significances" );
  add_common( bexp );
  add_search( bexp );
  bexp->add_option( "--matrix", o.matrix, "paper-15x6|paper-17x6 or a matrix file" );
  bexp->add_option( "--nu", o.nu, "Fixed nu instead of 2^p" );
  bind( bexp, [&]( json& p ) { return cmd_matrix( o, p, true ); } );

  auto* plan = app.add_subcommand( "plan", "Integer level plan for a parameter set" );
  add_common( plan );
  add_search( plan );
  plan->add_option( "--system", o.system, "mdfa|sfa5|sfa7 or a system file" );
  plan->add_option( "--matrix", o.matrix, "paper-15x6|paper-17x6 or a matrix file" );
  plan->add_option( "--params", o.params, "Parameter set name or file" );
  plan->add_option( "--n", o.n, "Number of inputs" )->check( CLI::PositiveNumber );
  plan->add_option( "--p-factor", o.p_factor, "Scale of the optimized p used for a matrix without --params" )
      ->check( CLI::Range( 0.01, 1.0 ) );
  bind( plan, [&]( json& p ) { return cmd_plan( o, p ); } );

  auto* build = app.add_subcommand( "build", "Build every bit of the counting function" );
  add_common( build );
  add_build( build );
  build->add_option( "--n", o.n, "Number of inputs" )->check( CLI::PositiveNumber );
  bind( build, [&]( json& p ) { return cmd_build( o, p ); } );

  auto* build_bit_cmd = app.add_subcommand( "build-bit", "Build one bit of the counting function" );
  add_common( build_bit_cmd );
  add_build( build_bit_cmd );
  build_bit_cmd->add_option( "--n", o.n, "Number of inputs" )->check( CLI::PositiveNumber );
  build_bit_cmd->add_option( "--bit", o.bit, "Bit index" );
  bind( build_bit_cmd, [&]( json& p ) { return cmd_build_bit( o, p ); } );

  auto* sym = app.add_subcommand( "synth-sym", "Build a symmetric function" );
  add_common( sym );
  add_build( sym );
  sym->add_option( "--n", o.n, "Number of inputs" );
  sym->add_option( "--values", o.values, "Value per input weight 0..n, e.g. 000111" );
  sym->add_option( "--function", o.function, "majority|parity|exactly:K|atleast:K|const0|const1" );
  bind( sym, [&]( json& p ) { return cmd_synth_sym( o, p ); } );

  auto* fit = app.add_subcommand( "fit", "Measure growth of counter size in n" );
  add_common( fit );
  fit->add_option( "--basis", o.basis_name, "b0 or b2" )->check( CLI::IsMember( { "b0", "b2" } ) );
  fit->add_option( "--csa", o.csa, "fig2|fig3|fig4|chain1..chain4|csa17" );
  fit->add_option( "--threshold", o.threshold, "Items per significance before the final adder" )->check( CLI::Range( 3u, 1u << 20 ) );
  fit->add_option( "--schedule", o.schedule, "rounds or lowest-significance" );
  fit->add_option( "--bit", o.bit, "Bit index (top bit when absent)" );
  fit->add_option( "--n-list", o.n_list, "Ascending comma-separated sizes" );
  fit->add_option( "--band", o.band, "Fail unless the slope lies in LO,HI" );
  fit->add_option( "--out", o.out, "Write the CSV to this path" );
  bind( fit, [&]( json& p ) { return cmd_fit( o, p, csv ); } );

  auto* ev = app.add_subcommand( "eval", "Inspect or evaluate a .sexp formula" );
  add_common( ev );
  ev->add_option( "--formula", o.formula_path, "Formula file" )->required();
  ev->add_option( "--input", o.input, "Assignment, variable 0 first" );
  bind( ev, [&]( json& p ) { return cmd_eval( o, p ); } );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& e )
  {
    auto const code = app.exit( e );
    return code == 0 ? exit_ok : exit_usage;
  }

  if ( o.format == "csv" && command != "fit" )
  {
    std::cerr << "error: --format csv is only available for fit\n";
    return exit_usage;
  }

  json report;
  report["command"] = command;
  std::vector<std::string> args( argv + 1, argv + argc );
  report["argv"] = args;
  report["config"] = { { "system", o.system },     { "matrix", o.matrix },     { "params", o.params },
                       { "n", o.n },               { "bit", o.bit ? json( *o.bit ) : json( nullptr ) },
                       { "basis", o.basis_name },  { "csa", o.csa },           { "threshold", o.threshold },
                       { "schedule", o.schedule }, { "budget", o.budget },     { "selftest", o.selftest },
                       { "format", o.format },     { "jobs", o.jobs } };
  report["seed"] = o.seed;
  json payload = json::object();
  int status = exit_ok;
  auto const start = std::chrono::steady_clock::now();
  try
  {
    status = action( payload );
  }
  catch ( usage_error const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  catch ( resource_error const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_resource;
  }
  catch ( not_certified_error const& e )
  {
    payload["error"] = e.what();
    status = exit_check;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  auto const wall = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();

  report["payload"] = payload;
  report["exit_status"] = status;
  report["wall_time_s"] = json_number( wall );

  if ( o.format == "csv" )
    std::cout << csv;
  else if ( o.format == "text" )
    render_text( std::cout, report, "" );
  else
    std::cout << report.dump( 2 ) << "\n";
  return status;
}

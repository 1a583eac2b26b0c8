use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optmat::error::Error;
use optmat::exec::{run_query, RunOptions};
use optmat::gen::{generate_case, triples_to_ntriples, GenParams, QueryClass};
use optmat::index::{build_index_dir, IndexStore};
use optmat::ntriples::parse_ntriples;
use optmat::oracle::Convention;
use optmat::verify::verify_case;

#[derive(Parser)]
#[command(name = "optmat", about = "BGP/OPTIONAL query engine over compressed bitmatrix indexes")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build dictionary and index slices from an N-Triples file
    Index(IndexArgs),
    /// Run a query against a built index
    Query(QueryArgs),
    /// Check the engine against the reference evaluator
    Verify(VerifyArgs),
    /// Print index statistics
    Stats(StatsArgs),
    /// Generate a random graph and query of a declared class
    Gen(GenArgs),
}

#[derive(Args)]
struct IndexArgs {
    /// N-Triples input
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    index_dir: PathBuf,
    /// Overwrite an existing index directory
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index_dir: PathBuf,
    /// File holding exactly one query
    #[arg(long)]
    query: PathBuf,
    /// Print supernode graph, orders, and pattern order to stderr
    #[arg(long)]
    dump_plan: bool,
    /// Run nullification and best-match unconditionally
    #[arg(long)]
    force_best_match: bool,
    /// Also write the stats report as JSON to this path
    #[arg(long)]
    stats_json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Index the engine side runs against (file mode)
    #[arg(long, required_unless_present = "random")]
    index_dir: Option<PathBuf>,
    /// Raw N-Triples data the oracle side reads (file mode)
    #[arg(long, required_unless_present = "random")]
    data: Option<PathBuf>,
    #[arg(long)]
    query: Option<PathBuf>,
    /// Generate and check this many random cases instead
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Query class for random mode
    #[arg(long, default_value = "mixed-wd")]
    class: String,
    /// Join compatibility convention for the oracle
    #[arg(long, default_value = "intolerant")]
    oracle_convention: String,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    index_dir: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <prefix>.nt and <prefix>.rq
    #[arg(long)]
    out_prefix: PathBuf,
    #[arg(long, default_value = "mixed-wd")]
    class: String,
    #[arg(long, default_value_t = 40)]
    triples: usize,
    #[arg(long, default_value_t = 8)]
    max_tps: usize,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::UnsupportedFeature(_) | Error::UnsupportedPattern(_) | Error::CartesianProduct(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Index(a) => cmd_index(a),
        Cmd::Query(a) => cmd_query(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Stats(a) => cmd_stats(a),
        Cmd::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("read {}", path.display()), e))
}

fn cmd_index(a: IndexArgs) -> Result<ExitCode, Error> {
    if a.index_dir.join("manifest.tsv").exists() && !a.force {
        eprintln!(
            "error: {} already holds an index; pass --force to overwrite",
            a.index_dir.display()
        );
        return Ok(ExitCode::from(1));
    }
    let text = read_file(&a.data)?;
    let triples = parse_ntriples(&text)?;
    let (dict, encoded, manifest) = build_index_dir(&triples, &a.index_dir)?;
    println!("#triples: {}", encoded.len());
    println!("#S: {}", dict.s_count());
    println!("#P: {}", dict.p_count());
    println!("#O: {}", dict.o_count());
    println!("#bitmats: {}", manifest.entries.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_query(a: QueryArgs) -> Result<ExitCode, Error> {
    let store = IndexStore::open(&a.index_dir)?;
    let text = read_file(&a.query)?;
    let out = run_query(&store, &text, RunOptions { force_best_match: a.force_best_match })?;

    if a.dump_plan {
        eprint!("{}", out.plan_report);
    }

    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let header: Vec<String> = out.header.iter().map(|h| format!("?{h}")).collect();
    let _ = writeln!(w, "{}", header.join("\t"));
    for row in &out.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Some(t) => t.to_string(),
                None => "NULL".to_string(),
            })
            .collect();
        let _ = writeln!(w, "{}", cells.join("\t"));
    }

    eprint!("{}", out.stats.text_report());
    if let Some(path) = a.stats_json {
        let json = serde_json::to_string_pretty(&out.stats.json_report()).expect("stats serialize");
        std::fs::write(&path, json).map_err(|e| Error::io(format!("write {}", path.display()), e))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_convention(s: &str) -> Result<Convention, Error> {
    match s {
        "intolerant" => Ok(Convention::NullIntolerant),
        "tolerant" => Ok(Convention::NullTolerant),
        other => Err(Error::QueryParse(format!("unknown convention {other}"))),
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, Error> {
    let convention = parse_convention(&a.oracle_convention)?;
    if let Some(n) = a.random {
        let class = QueryClass::parse(&a.class)
            .ok_or_else(|| Error::QueryParse(format!("unknown class {}", a.class)))?;
        let params = GenParams::class(class);
        for i in 0..n {
            let case = generate_case(a.seed.wrapping_add(i as u64), &params);
            match verify_case(&case.triples, &case.query_text, convention)? {
                None => {}
                Some(div) => {
                    eprintln!("case {i} (seed {}) diverged", a.seed.wrapping_add(i as u64));
                    eprint!("{}", div.dump());
                    return Ok(ExitCode::from(3));
                }
            }
        }
        println!("PASS: {n} random {} cases agree with the reference evaluator", class.name());
        return Ok(ExitCode::SUCCESS);
    }

    let data = a.data.expect("clap enforces --data without --random");
    let index_dir = a.index_dir.expect("clap enforces --index-dir without --random");
    let query =
        a.query.ok_or_else(|| Error::QueryParse("--query is required with --data".into()))?;
    let triples = parse_ntriples(&read_file(&data)?)?;
    let text = read_file(&query)?;
    let store = IndexStore::open(&index_dir)?;
    match optmat::verify::verify_with_store(&store, &triples, &text, convention)? {
        None => {
            println!("PASS");
            Ok(ExitCode::SUCCESS)
        }
        Some(div) => {
            eprint!("{}", div.dump());
            println!("FAIL");
            Ok(ExitCode::from(3))
        }
    }
}

fn cmd_stats(a: StatsArgs) -> Result<ExitCode, Error> {
    let store = IndexStore::open(&a.index_dir)?;
    let dict = &store.dict;
    let total: u64 = store
        .manifest
        .entries
        .iter()
        .filter(|(f, _, _)| *f == optmat::bitmat::Family::So)
        .map(|(_, _, c)| c)
        .sum();
    if a.json {
        let v = serde_json::json!({
            "#triples": total,
            "#S": dict.s_count(),
            "#P": dict.p_count(),
            "#O": dict.o_count(),
            "#S-O shared": dict.so_count(),
            "#bitmats": store.manifest.entries.len(),
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("stats serialize"));
    } else {
        println!("#triples: {total}");
        println!("#S: {}", dict.s_count());
        println!("#P: {}", dict.p_count());
        println!("#O: {}", dict.o_count());
        println!("#S-O shared: {}", dict.so_count());
        println!("#bitmats: {}", store.manifest.entries.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(a: GenArgs) -> Result<ExitCode, Error> {
    let class = QueryClass::parse(&a.class)
        .ok_or_else(|| Error::QueryParse(format!("unknown class {}", a.class)))?;
    let mut params = GenParams::class(class);
    params.n_triples = a.triples;
    params.max_tps = a.max_tps;
    let case = generate_case(a.seed, &params);
    let nt = a.out_prefix.with_extension("nt");
    let rq = a.out_prefix.with_extension("rq");
    std::fs::write(&nt, triples_to_ntriples(&case.triples))
        .map_err(|e| Error::io(format!("write {}", nt.display()), e))?;
    std::fs::write(&rq, format!("{}\n", case.query_text))
        .map_err(|e| Error::io(format!("write {}", rq.display()), e))?;
    println!("class: {}", case.class.name());
    println!("triples: {}", case.triples.len());
    println!("patterns: {}", case.query.patterns.len());
    println!("wrote {} and {}", nt.display(), rq.display());
    Ok(ExitCode::SUCCESS)
}

//! Command-line surface over the grammar-compression library: build,
//! access, extract, search, stats, verify, bench.
//!
//! Exit codes: 0 ok / found, 1 verification failed / not found, 2 usage
//! or I/O errors.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use slp_core::engine::{Cost, Engine, EngineKind};
use slp_core::grammar::{Slp, DEFAULT_ORACLE_CAP};
use slp_core::heavy_path::{build_forest, decompose, heavy_path_stats};
use slp_core::substring::extract;
use slp_core::{
    build_grammar, decode_input, encode_output, parse_slp, search, serialize_slp, SellersMatcher,
};

#[derive(Parser)]
#[command(name = "slp", version, about = "Queries over grammar-compressed strings")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Baseline,
    Linear,
    Biased,
}

impl EngineArg {
    fn kind(self) -> EngineKind {
        match self {
            EngineArg::Baseline => EngineKind::Baseline,
            EngineArg::Linear => EngineKind::LinearSpace,
            EngineArg::Biased => EngineKind::Biased,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct EngineOpts {
    /// Random access machinery to use.
    #[arg(long, value_enum, default_value = "biased")]
    engine: EngineArg,
    /// Recursion depth of the biased index.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
    levels: u8,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compress a file into an SLPv1 grammar.
    Build {
        input: PathBuf,
        output: PathBuf,
        /// Treat the input as UTF-8 instead of Latin-1 bytes.
        #[arg(long)]
        utf8: bool,
    },
    /// Print the character at a position.
    Access {
        slp: PathBuf,
        i: u64,
        #[command(flatten)]
        opts: EngineOpts,
        /// Also print a JSON cost record.
        #[arg(long)]
        cost: bool,
    },
    /// Write the raw bytes of S[i, j) to standard output.
    Extract {
        slp: PathBuf,
        i: u64,
        j: u64,
        #[command(flatten)]
        opts: EngineOpts,
        /// Encode the output as UTF-8 instead of Latin-1 bytes.
        #[arg(long)]
        utf8: bool,
        #[arg(long)]
        cost: bool,
    },
    /// Print the end positions of approximate pattern occurrences.
    Search {
        slp: PathBuf,
        pattern: String,
        /// Edit distance threshold.
        #[arg(short, long, default_value_t = 0)]
        k: usize,
        #[command(flatten)]
        opts: EngineOpts,
        #[arg(long)]
        cost: bool,
    },
    /// Print structural statistics as JSON lines.
    Stats {
        slp: PathBuf,
        #[command(flatten)]
        opts: EngineOpts,
        /// Dump the longest heavy path's search trees as DOT.
        #[arg(long)]
        dump_ibst: bool,
    },
    /// Run the invariant suites.
    Verify {
        slp: PathBuf,
        /// Cap on full-expansion checks, in characters.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure per-query work counters; CSV on standard output.
    Bench {
        slp: PathBuf,
        /// Queries per engine.
        #[arg(long, default_value_t = 1000)]
        queries: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads for the query workload.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=2))]
        levels: u8,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_slp(path: &PathBuf) -> Result<Slp, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_slp(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Build {
            input,
            output,
            utf8,
        } => {
            let bytes = fs::read(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let chars = decode_input(&bytes, utf8).map_err(|e| format!("invalid UTF-8: {e}"))?;
            let slp = build_grammar(&chars).map_err(|e| e.to_string())?;
            fs::write(&output, serialize_slp(&slp))
                .map_err(|e| format!("{}: {e}", output.display()))?;
            let n = slp.rule_count();
            let len = slp.text_len();
            eprintln!(
                "n = {n} rules, N = {len} chars, ratio = {:.3}",
                n as f64 / len as f64
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Access { slp, i, opts, cost } => {
            let engine = Engine::build(load_slp(&slp)?, opts.engine.kind(), opts.levels);
            let (ch, c) = engine.access_with_cost(i).map_err(|e| e.to_string())?;
            println!("{ch}");
            if cost {
                println!("{}", cost_json(&engine, &c));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Extract {
            slp,
            i,
            j,
            opts,
            utf8,
            cost,
        } => {
            let engine = Engine::build(load_slp(&slp)?, opts.engine.kind(), opts.levels);
            let (s, stats) = extract(&engine, i, j).map_err(|e| e.to_string())?;
            let chars: Vec<char> = s.chars().collect();
            let bytes = encode_output(&chars, utf8)
                .map_err(|c| format!("character U+{:04X} does not fit Latin-1; use --utf8", c as u32))?;
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes).map_err(|e| e.to_string())?;
            out.flush().map_err(|e| e.to_string())?;
            if cost {
                eprintln!(
                    "{}",
                    json!({
                        "random_accesses": stats.random_accesses,
                        "decode_steps": stats.decode_steps,
                        "collected_roots": stats.collected_roots,
                        "pred_visits": stats.cost.pred_visits,
                    })
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Search {
            slp,
            pattern,
            k,
            opts,
            cost,
        } => {
            let engine = Engine::build(load_slp(&slp)?, opts.engine.kind(), opts.levels);
            let pat: Vec<char> = pattern.chars().collect();
            let (ends, stats) =
                search(&engine, &pat, k, &SellersMatcher).map_err(|e| e.to_string())?;
            let mut out = std::io::stdout().lock();
            for e in &ends {
                writeln!(out, "{e}").map_err(|e| e.to_string())?;
            }
            out.flush().map_err(|e| e.to_string())?;
            if cost {
                eprintln!(
                    "{}",
                    json!({
                        "occ": stats.occ,
                        "nodes": stats.nodes,
                        "window_chars": stats.window_chars,
                        "max_window": stats.max_window,
                        "sum_occ_local": stats.sum_occ_local,
                    })
                );
            }
            Ok(if ends.is_empty() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Stats {
            slp,
            opts,
            dump_ibst,
        } => {
            let slp = load_slp(&slp)?;
            let info = decompose(&slp);
            let forest = build_forest(&slp, &info);
            let hp_stats = heavy_path_stats(&slp, &info, &forest);
            let mut out = std::io::stdout().lock();
            writeln!(
                out,
                "{}",
                json!({
                    "n": slp.rule_count(),
                    "text_len": slp.text_len(),
                    "h_roots": hp_stats.h_roots,
                    "max_h_depth": hp_stats.max_h_depth,
                    "light_edge_histogram": hp_stats.light_edge_histogram,
                })
            )
            .map_err(|e| e.to_string())?;
            let engine = Engine::build(slp, EngineKind::Biased, opts.levels);
            let wa = engine.wa_index().expect("biased engine has an index");
            writeln!(out, "{}", serde_json::to_string(&wa.stats()).unwrap())
                .map_err(|e| e.to_string())?;
            if dump_ibst {
                let longest = wa
                    .hp
                    .paths
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, p)| p.nodes.len())
                    .map(|(i, _)| i)
                    .unwrap();
                let path = &wa.hp.paths[longest];
                for (side, chain) in [("left", &path.left), ("right", &path.right)] {
                    if let Some(t) = chain.ibst() {
                        write!(out, "{}", t.to_dot(&format!("path{longest}_{side}")))
                            .map_err(|e| e.to_string())?;
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            slp,
            oracle_cap,
            seed,
        } => {
            let slp = load_slp(&slp)?;
            let results = slp_core::verify::run_suites(&slp, oracle_cap, seed);
            let mut ok = true;
            for r in &results {
                if r.skipped {
                    println!("SKIP {}", r.name);
                } else {
                    match &r.outcome {
                        Ok(()) => println!("PASS {}", r.name),
                        Err(why) => {
                            ok = false;
                            println!("FAIL {}: {why}", r.name);
                        }
                    }
                }
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Bench {
            slp,
            queries,
            seed,
            threads,
            levels,
        } => {
            bench(&load_slp(&slp)?, queries, seed, threads.max(1), levels)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cost_json(engine: &Engine, c: &Cost) -> String {
    json!({
        "engine": engine.kind().name(),
        "levels": engine.levels(),
        "rule_visits": c.rule_visits,
        "pred_visits": c.pred_visits,
        "hp_switches": c.hp_switches,
        "fallbacks": c.fallbacks,
    })
    .to_string()
}

/// Deterministic work counters per engine; wall-clock timings go to
/// standard error so the CSV stays reproducible.
fn bench(slp: &Slp, queries: u64, seed: u64, threads: usize, levels: u8) -> Result<(), String> {
    let n = slp.text_len();
    // Splitmix-style index sequence, deterministic in the seed.
    let indexes: Vec<u64> = {
        let mut x = seed.wrapping_add(0x9e3779b97f4a7c15);
        (0..queries)
            .map(|_| {
                x = x.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = x;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                (z ^ (z >> 31)) % n
            })
            .collect()
    };

    println!("engine,levels,build_work,queries,rule_visits_mean,pred_visits_mean,pred_visits_max,hp_switches_mean,hp_switches_max,decode_steps");
    for (kind, lv) in [
        (EngineKind::Baseline, 0),
        (EngineKind::LinearSpace, 0),
        (EngineKind::Biased, levels),
    ] {
        let started = std::time::Instant::now();
        let engine = Engine::build(slp.clone(), kind, lv);
        let build_elapsed = started.elapsed();

        let started = std::time::Instant::now();
        let costs: Vec<Cost> = if threads == 1 {
            indexes
                .iter()
                .map(|&i| engine.access_with_cost(i).expect("index in range").1)
                .collect()
        } else {
            // Deterministic partition; engines take concurrent readers.
            let chunk = indexes.len().div_ceil(threads);
            let mut costs = vec![Cost::default(); indexes.len()];
            std::thread::scope(|scope| {
                for (slots, block) in costs.chunks_mut(chunk).zip(indexes.chunks(chunk)) {
                    let engine = &engine;
                    scope.spawn(move || {
                        for (slot, &i) in slots.iter_mut().zip(block) {
                            *slot = engine.access_with_cost(i).expect("index in range").1;
                        }
                    });
                }
            });
            costs
        };
        let query_elapsed = started.elapsed();

        let m = costs.len().max(1) as f64;
        let mean = |f: fn(&Cost) -> u64| costs.iter().map(f).sum::<u64>() as f64 / m;
        let max = |f: fn(&Cost) -> u64| costs.iter().map(f).max().unwrap_or(0);

        // Decode throughput proxy: one mid-string extraction of 4096 chars.
        let decode_steps = if n >= 2 {
            let span = 4096.min(n / 2);
            let start = n / 4;
            extract(&engine, start, start + span)
                .map(|(_, s)| s.decode_steps)
                .unwrap_or(0)
        } else {
            0
        };

        println!(
            "{},{},{},{},{:.2},{:.2},{},{:.2},{},{}",
            kind.name(),
            lv,
            engine.build_work(),
            costs.len(),
            mean(|c| c.rule_visits),
            mean(|c| c.pred_visits),
            max(|c| c.pred_visits),
            mean(|c| c.hp_switches),
            max(|c| c.hp_switches),
            decode_steps,
        );
        eprintln!(
            "{}: build {:.1?}, {} queries in {:.1?}",
            kind.name(),
            build_elapsed,
            costs.len(),
            query_elapsed
        );
    }
    Ok(())
}

//! Command-line front end.
//!
//! Exit status: 0 success, 1 inequivalent (or a failed rule check),
//! 2 unknown, 64 usage error, 65 malformed input, 74 I/O failure.

use std::fs;
use std::io::{self, Read as _};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use relfrag::automata::{export_dot, minimize};
use relfrag::constants::ModelClass;
use relfrag::decide::{
    decide_terms, decide_word_equiv, verification_config, verify_rules, DecideConfig, Justification,
    Verdict,
};
use relfrag::fo::{export_equation_smt2, export_equation_tptp};
use relfrag::normalforms::{
    collapse_constants, complement_dual, complement_nf, decompose_sigma_n, elim_bot_top, projection_nf,
    union_nf,
};
use relfrag::rewrite::{parse_rules, Rule, RewriteSystem};
use relfrag::search::{run_search, OracleConfig, WordOracle};
use relfrag::word::Word;
use relfrag::{eval, parse_term, Structure, Term};

const EXIT_INEQUIVALENT: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATAERR: u8 = 65;
const EXIT_IOERR: u8 = 74;

#[derive(Parser)]
#[command(name = "relfrag", version, about = "Equations of the bounded variable-occurrence calculus of relations")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true, env = "RELFRAG_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a term on a structure given as JSON.
    Eval {
        term: String,
        /// Structure file (`-` for standard input).
        #[arg(long)]
        structure: String,
    },
    /// Decide an equation between terms (or words with --words).
    Equiv(EquivArgs),
    /// Number of variable occurrences of a term.
    Vo { term: String },
    /// Least Sigma/Pi levels of a term.
    Level { term: String },
    /// Normalize a word with a rule system.
    Normalize {
        #[arg(long)]
        word: String,
        #[command(flatten)]
        rules: RulesArg,
        /// Print every rewriting step.
        #[arg(long)]
        trace: bool,
    },
    /// List the irreducible words in shortlex order.
    EnumerateIrreducible {
        #[command(flatten)]
        rules: RulesArg,
        /// Print at most this many words.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Count the irreducible words.
    CountIrreducible {
        #[command(flatten)]
        rules: RulesArg,
    },
    /// Decide whether the irreducible words are finitely many.
    Cofinite {
        /// Rule file or `builtin:NAME` (alternative to --rules).
        source: Option<String>,
        #[command(flatten)]
        rules: RulesArg,
    },
    /// Search for a rule system with finitely many irreducible words.
    Search(SearchArgs),
    /// Write the automaton of irreducible words in DOT.
    ExportDfa {
        #[command(flatten)]
        rules: RulesArg,
        /// Minimize the automaton first.
        #[arg(long)]
        minimal: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an SMT-LIB 2 proof obligation for an equation.
    ExportSmt(ExportArgs),
    /// Write a TPTP proof obligation for an equation.
    ExportTptp(ExportArgs),
    /// Check rules on every structure of size 5 and samples at sizes 6, 7.
    VerifyRules {
        /// Rule file or `builtin:NAME`.
        source: String,
        /// Samples per sampled size.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply one normal-form pass to a term.
    Nf {
        #[arg(value_enum)]
        pass: Pass,
        term: String,
        /// Level for sigma-decompose.
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Fresh variable for sigma-decompose.
        #[arg(long, default_value = "h")]
        hole: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pass {
    Complement,
    Projection,
    ElimBotTop,
    Union,
    Collapse,
    ComplementDual,
    SigmaDecompose,
}

#[derive(Args)]
struct RulesArg {
    /// Rule file or `builtin:NAME`.
    #[arg(long = "rules", default_value = "builtin:figure1")]
    rules: String,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long)]
    lhs: String,
    #[arg(long)]
    rhs: String,
    /// Model class: `rel` or `rel>=M`.
    #[arg(long, default_value = "rel")]
    mode: String,
    /// Treat both sides as words; decided on structures of size >= 5.
    #[arg(long)]
    words: bool,
    /// Random samples in the bounded check.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long = "max-len")]
    max_len: usize,
    /// Candidate budget; accepts `1000000`, `10^6` or `1e6`.
    #[arg(long, default_value = "10^6", value_parser = parse_count)]
    budget: u64,
    /// Samples per sampled size in the oracle.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the discovered rules to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    lhs: String,
    #[arg(long)]
    rhs: String,
    /// Treat both sides as words applied to the variable `a`.
    #[arg(long)]
    words: bool,
    #[arg(long = "min-size", default_value_t = 5)]
    min_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run this solver on the emitted file and report its answer.
    #[arg(long = "run-solver")]
    run_solver: Option<PathBuf>,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let bad = || format!("invalid count `{s}`");
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(bad);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return 10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or_else(bad);
    }
    s.replace('_', "").parse().map_err(|_| bad())
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    msg: String,
}

fn data_err(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_DATAERR,
        msg: e.to_string(),
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure {
        code: EXIT_IOERR,
        msg: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn term(s: &str) -> Result<Term, Failure> {
    parse_term(s).map_err(data_err)
}

fn word(s: &str) -> Result<Word, Failure> {
    Word::parse(s).map_err(data_err)
}

fn read_source(src: &str) -> Result<String, Failure> {
    if src == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| io_err(Path::new("<stdin>"), e))?;
        return Ok(s);
    }
    fs::read_to_string(src).map_err(|e| io_err(Path::new(src), e))
}

fn load_rules(src: &str) -> Result<Vec<Rule>, Failure> {
    let text = if src.starts_with("builtin:") {
        src.to_string()
    } else {
        read_source(src)?
    };
    parse_rules(&text).map_err(data_err)
}

fn load_system(src: &str) -> Result<RewriteSystem, Failure> {
    RewriteSystem::new(load_rules(src)?).map_err(data_err)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let json = cli.json;
    match &cli.command {
        Cmd::Eval { term: t, structure } => {
            let t = term(t)?;
            let s = Structure::from_json(&read_source(structure)?).map_err(data_err)?;
            let r = eval(&t, &s).map_err(data_err)?;
            let pairs: Vec<[usize; 2]> = r.pairs().into_iter().map(|(x, y)| [x, y]).collect();
            if json {
                println!("{}", json!({ "size": s.size, "pairs": pairs }));
            } else {
                println!("{}", serde_json::to_string(&pairs).expect("serialisable"));
            }
            Ok(0)
        }
        Cmd::Equiv(a) => equiv(a, json),
        Cmd::Vo { term: t } => {
            let n = term(t)?.vo();
            if json {
                println!("{}", json!({ "vo": n }));
            } else {
                println!("{n}");
            }
            Ok(0)
        }
        Cmd::Level { term: t } => {
            let info = term(t)?.fragment_info();
            if json {
                println!(
                    "{}",
                    json!({ "sigma_level": info.sigma_level, "pi_level": info.pi_level })
                );
            } else {
                println!("{info}");
            }
            Ok(0)
        }
        Cmd::Normalize { word: w, rules, trace } => {
            let sys = load_system(&rules.rules)?;
            let (nf, steps) = sys.normalize(&word(w)?);
            if json {
                println!(
                    "{}",
                    json!({
                        "normal_form": nf.to_string(),
                        "steps": steps
                            .iter()
                            .map(|s| json!({ "rule": s.rule + 1, "position": s.position, "result": s.result.to_string() }))
                            .collect::<Vec<_>>(),
                    })
                );
            } else {
                if *trace {
                    for s in &steps {
                        println!(
                            "rule {} ({}) at {}: {}",
                            s.rule + 1,
                            sys.rules()[s.rule],
                            s.position,
                            s.result
                        );
                    }
                }
                println!("{nf}");
            }
            Ok(0)
        }
        Cmd::EnumerateIrreducible { rules, limit } => {
            let words = load_system(&rules.rules)?
                .enumerate_irreducibles()
                .map_err(data_err)?;
            let shown = &words[..limit.unwrap_or(words.len()).min(words.len())];
            if json {
                let ws: Vec<String> = shown.iter().map(Word::to_string).collect();
                println!("{}", json!({ "count": words.len(), "words": ws }));
            } else {
                for w in shown {
                    println!("{w}");
                }
            }
            Ok(0)
        }
        Cmd::CountIrreducible { rules } => {
            let n = load_system(&rules.rules)?.count_irreducibles().map_err(data_err)?;
            if json {
                println!("{{\"count\":{n}}}");
            } else {
                println!("{n}");
            }
            Ok(0)
        }
        Cmd::Cofinite { source, rules } => {
            let src = source.as_deref().unwrap_or(&rules.rules);
            let r = load_system(src)?.cofiniteness();
            let opt = |v: Option<String>| v.unwrap_or_else(|| "null".into());
            let max = opt(r.max_complement_length.map(|m| m.to_string()));
            let count = opt(r.complement_count.map(|c| c.to_string()));
            if json {
                println!(
                    "{{\"cofinite\":{},\"max_length\":{max},\"count\":{count}}}",
                    r.cofinite
                );
            } else if r.cofinite {
                println!("cofinite: true");
                println!("longest irreducible word: {max}");
                println!("irreducible words: {count}");
            } else {
                println!("cofinite: false");
            }
            Ok(0)
        }
        Cmd::Search(a) => search(a, json),
        Cmd::ExportDfa { rules, minimal, out } => {
            let mut d = load_system(&rules.rules)?.irreducible_dfa();
            if *minimal {
                d = minimize(&d);
            }
            write_out(out, &export_dot(&d))?;
            Ok(0)
        }
        Cmd::ExportSmt(a) => export(a, true, json),
        Cmd::ExportTptp(a) => export(a, false, json),
        Cmd::VerifyRules {
            source,
            samples,
            seed,
        } => {
            let rules = load_rules(source)?;
            let checks = verify_rules(&rules, &verification_config(*samples, *seed));
            let passed = checks.iter().filter(|c| c.passed()).count();
            if json {
                let items: Vec<Value> = checks
                    .iter()
                    .map(|c| {
                        json!({
                            "rule": c.rule.to_string(),
                            "pass": c.passed(),
                            "witness": c.witness.as_ref().map(|w| w.to_structure().to_json_value()),
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    json!({ "passed": passed, "total": checks.len(), "rules": items })
                );
            } else {
                for (i, c) in checks.iter().enumerate() {
                    match &c.witness {
                        None => println!("rule {:>2} pass  {}", i + 1, c.rule),
                        Some(w) => println!(
                            "rule {:>2} FAIL  {}  witness {}",
                            i + 1,
                            c.rule,
                            w.to_structure().to_json()
                        ),
                    }
                }
                println!("{passed}/{} pass", checks.len());
            }
            Ok(if passed == checks.len() { 0 } else { EXIT_INEQUIVALENT })
        }
        Cmd::Nf { pass, term: t, n, hole } => nf(*pass, &term(t)?, *n, hole, json),
    }
}

fn verdict_exit(v: &Verdict) -> u8 {
    match v {
        Verdict::Equivalent(_) => 0,
        Verdict::Inequivalent(_) => EXIT_INEQUIVALENT,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn print_verdict(v: &Verdict, json: bool) {
    if json {
        println!("{}", v.to_json_value());
        return;
    }
    match v {
        Verdict::Equivalent(j) => {
            println!("equivalent");
            match j {
                Justification::Constant { class, small_sizes } => {
                    println!("both sides have constant class {class}; small sizes checked: {small_sizes:?}")
                }
                Justification::Words { lhs, rhs } => {
                    println!("common normal form: {}", lhs.normal_form);
                    println!("lhs: {} steps, rhs: {} steps", lhs.steps.len(), rhs.steps.len());
                }
                Justification::Pipeline {
                    canonical,
                    small_sizes,
                    ..
                } => {
                    let ws: Vec<String> = canonical
                        .words
                        .iter()
                        .map(|(l, w)| format!("{w} [{l}]"))
                        .collect();
                    let c = canonical.constant.map_or("none".to_string(), |c| c.to_string());
                    println!("canonical form: constant {c}; words {}", ws.join(", "));
                    println!("small sizes checked exhaustively: {small_sizes:?}");
                }
            }
        }
        Verdict::Inequivalent(s) => {
            println!("inequivalent");
            println!("witness: {}", s.to_json());
        }
        Verdict::Unknown(c) => {
            println!("unknown");
            println!(
                "no counterexample: exhaustive sizes {:?}, {} samples at sizes {:?}",
                c.exhaustive_sizes, c.samples_per_size, c.sample_sizes
            );
        }
    }
}

fn equiv(a: &EquivArgs, json: bool) -> Outcome {
    let v = if a.words {
        let oracle = WordOracle::new(OracleConfig {
            seed: a.seed,
            ..OracleConfig::default()
        })
        .map_err(data_err)?;
        decide_word_equiv(&word(&a.lhs)?, &word(&a.rhs)?, &oracle)
    } else {
        let mode: ModelClass = a.mode.parse().map_err(|e: String| Failure {
            code: EXIT_USAGE,
            msg: e,
        })?;
        let cfg = DecideConfig {
            samples: a.samples,
            seed: a.seed,
            ..DecideConfig::default()
        };
        decide_terms(&term(&a.lhs)?, &term(&a.rhs)?, mode, &cfg)
    };
    print_verdict(&v, json);
    Ok(verdict_exit(&v))
}

fn search(a: &SearchArgs, json: bool) -> Outcome {
    let mut cfg = OracleConfig::default();
    if let Some(s) = a.samples {
        cfg.samples_per_size = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let r = run_search(&cfg, a.max_len, a.budget, &[]).map_err(data_err)?;
    let sys = RewriteSystem::new(r.rules.clone()).map_err(data_err)?;
    if let Some(p) = &a.out {
        fs::write(p, sys.to_text()).map_err(|e| io_err(p, e))?;
    }
    if json {
        let rules: Vec<String> = r.rules.iter().map(Rule::to_string).collect();
        println!(
            "{}",
            json!({
                "cofinite": r.cofinite,
                "admitted": r.admitted,
                "candidates_examined": r.candidates_examined,
                "oracle_calls": r.oracle_calls,
                "representatives": r.representatives,
                "stop": serde_json::to_value(r.stop).expect("serialisable"),
                "rules": rules,
            })
        );
    } else {
        print!("{}", sys.to_text());
        println!(
            "# admitted {} rules; cofinite: {}; stop: {:?}; candidates examined: {}; oracle calls: {}",
            r.admitted, r.cofinite, r.stop, r.candidates_examined, r.oracle_calls
        );
    }
    Ok(0)
}

fn export(a: &ExportArgs, smt: bool, json: bool) -> Outcome {
    if a.min_size == 0 {
        return Err(Failure {
            code: EXIT_USAGE,
            msg: "--min-size must be at least 1".into(),
        });
    }
    let (l, r) = if a.words {
        let v = Term::var("a");
        (word(&a.lhs)?.apply(&v), word(&a.rhs)?.apply(&v))
    } else {
        (term(&a.lhs)?, term(&a.rhs)?)
    };
    let text = if smt {
        export_equation_smt2(&l, &r, a.min_size)
    } else {
        export_equation_tptp(&l, &r, a.min_size)
    };
    let Some(solver) = &a.run_solver else {
        write_out(&a.out, &text)?;
        return Ok(0);
    };
    let path = match &a.out {
        Some(p) => p.clone(),
        None => std::env::temp_dir().join(format!(
            "relfrag-{}.{}",
            std::process::id(),
            if smt { "smt2" } else { "p" }
        )),
    };
    fs::write(&path, &text).map_err(|e| io_err(&path, e))?;
    let output = Command::new(solver)
        .arg(&path)
        .output()
        .map_err(|e| io_err(solver, e))?;
    if a.out.is_none() {
        let _ = fs::remove_file(&path);
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    let answer = stdout.lines().next().unwrap_or("").trim().to_string();
    if json {
        println!("{}", json!({ "solver": solver, "answer": answer }));
    } else {
        println!("{answer}");
    }
    Ok(0)
}

fn nf(pass: Pass, t: &Term, n: u32, hole: &str, json: bool) -> Outcome {
    let terms: Vec<Term> = match pass {
        Pass::Complement => vec![complement_nf(t).map_err(data_err)?],
        Pass::Projection => vec![projection_nf(t)],
        Pass::ElimBotTop => vec![elim_bot_top(t)],
        Pass::Union => union_nf(t).map_err(data_err)?,
        Pass::Collapse => vec![collapse_constants(t)],
        Pass::ComplementDual => vec![complement_dual(t).map_err(data_err)?],
        Pass::SigmaDecompose => {
            let (t0, t1) = decompose_sigma_n(t, n, hole).map_err(data_err)?;
            vec![t0, t1]
        }
    };
    let strs: Vec<String> = terms.iter().map(Term::to_string).collect();
    if json {
        println!("{}", json!({ "terms": strs }));
    } else {
        for s in strs {
            println!("{s}");
        }
    }
    Ok(0)
}

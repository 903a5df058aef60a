//! Umbrella command line for the workbench: checking, searching,
//! transforming and synthesizing derivations, plus grammar recognition.

use clap::{Args, Parser, Subcommand};
use lambek::cutelim::eliminate_cuts;
use lambek::derivation::{from_json, to_json};
use lambek::encode::{
    bfs_trace, build_grammar_from_type0, grammar_formulas, internalization_selftest, internalizer,
    synthesize_sequent_derivation, BfsLimits, BfsOutcome, Scheme, Type0Grammar,
};
use lambek::grammar::{s_recognize, t_recognize, Lexicon};
use lambek::project::{
    destoup_derivation, enstoup_derivation, project_derivation, project_sequent, ProjMode,
};
use lambek::search::{search, SearchBudget, SearchVerdict};
use lambek::{check, parse_sequent, CalculusId, Derivation};
use std::fs;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "lambek", about = "Workbench for bracketed Lambek calculi with a subexponential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 64)]
    max_depth: usize,
    #[arg(long, default_value_t = 3)]
    max_contractions: usize,
    #[arg(long, default_value_t = 256)]
    max_size: usize,
    /// Wall-clock limit in milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_depth: self.max_depth,
            max_contractions: self.max_contractions,
            max_sequent_size: self.max_size,
            time_limit: self.time_limit_ms.map(Duration::from_millis),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Verify a derivation against a calculus.
    Check {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        derivation: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Bounded backward proof search. Exit code: 0 derivable, 1 underivable,
    /// 2 unknown.
    Search {
        #[arg(long)]
        calculus: String,
        /// Sequent text, or @file to read it from a file.
        #[arg(long)]
        sequent: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        emit_derivation: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Eliminate cuts in a primed-system derivation.
    Cutelim {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        derivation: String,
        #[arg(long)]
        out: String,
        /// Print the (kappa, sigma) step log.
        #[arg(long)]
        trace: bool,
    },
    /// Apply the bracket-forgetting projection to a sequent or derivation.
    Project {
        #[arg(long, value_parser = ["pi", "pi_q"])]
        mode: String,
        #[arg(long, default_value = "q")]
        unit_var: String,
        #[arg(long)]
        sequent: Option<String>,
        #[arg(long)]
        derivation: Option<String>,
        /// Source calculus (required for --derivation).
        #[arg(long)]
        calculus: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Flatten stoups: primed stoup system -> stoup-free system.
    Destoup {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        derivation: String,
        #[arg(long)]
        out: String,
    },
    /// Simulate a stoup-free derivation in the primed stoup system (with cuts).
    Enstoup {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        derivation: String,
        #[arg(long)]
        out: String,
    },
    /// Semi-Thue encodings: internalise a grammar and synthesize derivations.
    Encode {
        #[arg(long)]
        grammar: String,
        #[arg(long, value_parser = ["malc", "relevant", "b2015", "b2018", "b2018st", "buszkowski"])]
        scheme: String,
        /// Space-separated word, e.g. "a a b b".
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value = "q")]
        unit_var: String,
        #[arg(long)]
        emit_sequent: bool,
        #[arg(long)]
        emit_derivation: Option<String>,
        #[arg(long)]
        selftest: bool,
        #[arg(long, default_value_t = 12)]
        max_word_len: usize,
        #[arg(long, default_value_t = 200000)]
        max_words: usize,
    },
    /// Categorial-grammar recognition over a lexicon.
    Parse {
        #[arg(long)]
        calculus: String,
        #[arg(long)]
        lexicon: String,
        #[arg(long, value_parser = ["s", "t"], default_value = "s")]
        mode: String,
        #[arg(long, default_value_t = 4)]
        max_brackets: usize,
        #[arg(long)]
        phrase: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

/// Calculus names may carry `+brules=<file>[:prime]`, loading a JSON list of
/// B-rules.
fn load_calculus(spec: &str) -> Result<CalculusId, String> {
    if let Some((base, rest)) = spec.split_once("+brules=") {
        let (file, primed) = match rest.split_once(':') {
            Some((f, "prime")) => (f, true),
            Some((_, other)) => return Err(format!("unknown brules flavour `{other}`")),
            None => (rest, false),
        };
        let text = fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?;
        let rules: Vec<lambek::BRule> =
            serde_json::from_str(&text).map_err(|e| format!("{file}: {e}"))?;
        let base = CalculusId::by_name(base).map_err(|e| e.to_string())?;
        base.extend_with_b_rules(rules, primed).map_err(|e| e.to_string())
    } else {
        CalculusId::by_name(spec).map_err(|e| e.to_string())
    }
}

fn load_derivation(path: &str) -> Result<Derivation, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    from_json(&text).map_err(|e| e.to_string())
}

fn sequent_arg(arg: &str) -> Result<lambek::Sequent, String> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    parse_sequent(text.trim()).map_err(|e| e.to_string())
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Check { calculus, derivation, format } => {
            let c = load_calculus(&calculus)?;
            let d = load_derivation(&derivation)?;
            match check(&c, &d) {
                Ok(()) => {
                    match format {
                        Format::Json => println!(
                            "{}",
                            serde_json::json!({"ok": true, "sequent": d.sequent.to_string()})
                        ),
                        Format::Text => println!("ok: {}", d.sequent),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    match format {
                        Format::Json => println!(
                            "{}",
                            serde_json::json!({"ok": false, "error": e.to_string()})
                        ),
                        Format::Text => println!("error: {e}"),
                    }
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Search { calculus, sequent, budget, emit_derivation, format } => {
            let c = load_calculus(&calculus)?;
            let goal = sequent_arg(&sequent)?;
            let verdict = search(&c, &goal, &budget.budget()).map_err(|e| e.to_string())?;
            let (label, code) = match &verdict {
                SearchVerdict::Derivable(_) => ("derivable", 0u8),
                SearchVerdict::Underivable => ("underivable", 1),
                SearchVerdict::Unknown(_) => ("unknown", 2),
            };
            if let (Some(path), SearchVerdict::Derivable(d)) = (&emit_derivation, &verdict) {
                fs::write(path, to_json(d)).map_err(|e| e.to_string())?;
            }
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"verdict": label, "sequent": goal.to_string()})
                ),
                Format::Text => match &verdict {
                    SearchVerdict::Derivable(d) => {
                        println!("derivable ({} rules)", d.node_count())
                    }
                    SearchVerdict::Underivable => println!("underivable (space exhausted)"),
                    SearchVerdict::Unknown(cap) => println!("unknown (budget cap: {cap:?})"),
                },
            }
            Ok(ExitCode::from(code))
        }
        Command::Cutelim { calculus, derivation, out, trace } => {
            let c = load_calculus(&calculus)?;
            let d = load_derivation(&derivation)?;
            let (result, log) = eliminate_cuts(&c, &d).map_err(|e| e.to_string())?;
            if trace {
                for step in &log {
                    println!("{:>16}  kappa={} sigma={}", step.case, step.kappa, step.sigma);
                }
            }
            fs::write(&out, to_json(&result)).map_err(|e| e.to_string())?;
            println!("cut-free derivation of `{}` written to {out}", result.sequent);
            Ok(ExitCode::SUCCESS)
        }
        Command::Project { mode, unit_var, sequent, derivation, calculus, out } => {
            let mode = if mode == "pi" { ProjMode::Pi } else { ProjMode::PiQ };
            if let Some(text) = sequent {
                let s = sequent_arg(&text)?;
                println!("{}", project_sequent(&s, mode, &unit_var));
                return Ok(ExitCode::SUCCESS);
            }
            let (Some(derivation), Some(calculus)) = (derivation, calculus) else {
                return Err("--derivation needs --calculus (and --out)".into());
            };
            let c = load_calculus(&calculus)?;
            let d = load_derivation(&derivation)?;
            let (tgt, projected) =
                project_derivation(&c, &d, mode, &unit_var).map_err(|e| e.to_string())?;
            let out = out.ok_or("--out is required with --derivation")?;
            fs::write(&out, to_json(&projected)).map_err(|e| e.to_string())?;
            println!("projected into {}: `{}` -> {out}", tgt.name, projected.sequent);
            Ok(ExitCode::SUCCESS)
        }
        Command::Destoup { calculus, derivation, out } => {
            let c = load_calculus(&calculus)?;
            let d = load_derivation(&derivation)?;
            let (tgt, flat) = destoup_derivation(&c, &d).map_err(|e| e.to_string())?;
            fs::write(&out, to_json(&flat)).map_err(|e| e.to_string())?;
            println!("flattened into {}: -> {out}", tgt.name);
            Ok(ExitCode::SUCCESS)
        }
        Command::Enstoup { calculus, derivation, out } => {
            let c = load_calculus(&calculus)?;
            let d = load_derivation(&derivation)?;
            let (tgt, stouped) = enstoup_derivation(&c, &d).map_err(|e| e.to_string())?;
            fs::write(&out, to_json(&stouped)).map_err(|e| e.to_string())?;
            println!(
                "simulated in {} with {} cuts -> {out}",
                tgt.name,
                stouped.cut_count()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Encode {
            grammar,
            scheme,
            word,
            unit_var,
            emit_sequent,
            emit_derivation,
            selftest,
            max_word_len,
            max_words,
        } => {
            let text = fs::read_to_string(&grammar).map_err(|e| format!("{grammar}: {e}"))?;
            let g = Type0Grammar::parse(&text).map_err(|e| e.to_string())?;
            let scheme = Scheme::parse(&scheme).ok_or("unknown scheme")?;
            if selftest {
                if scheme == Scheme::Buszkowski {
                    lambek::encode::brule_equivalence_selftest(&g).map_err(|e| e.to_string())?;
                    println!("B-rule equivalence self-test: ok");
                } else {
                    let formulas = grammar_formulas(&g);
                    let phi =
                        internalizer(&formulas, scheme, &unit_var).map_err(|e| e.to_string())?;
                    internalization_selftest(&phi, &formulas, scheme, &unit_var)
                        .map_err(|e| e.to_string())?;
                    println!("internalization self-test: ok");
                }
            }
            let Some(word) = word else { return Ok(ExitCode::SUCCESS) };
            let word: Vec<String> = word.split_whitespace().map(String::from).collect();
            let limits = BfsLimits { max_word_len, max_words };
            if emit_sequent && scheme != Scheme::Buszkowski {
                let (_, goal) =
                    build_grammar_from_type0(&g, scheme, &unit_var).map_err(|e| e.to_string())?;
                println!("goal: {goal}");
            }
            match bfs_trace(&g, &word, &limits) {
                BfsOutcome::Found(_) => {}
                BfsOutcome::NotFoundExhausted => {
                    println!("word is not generated by the grammar (rewriting space exhausted)");
                    return Ok(ExitCode::from(1));
                }
                BfsOutcome::NotFoundCapped => {
                    println!("no rewriting trace within the budget; membership unknown");
                    return Ok(ExitCode::from(2));
                }
            }
            let syn = synthesize_sequent_derivation(&g, &word, scheme, &unit_var, &limits)
                .map_err(|e| e.to_string())?;
            check(&syn.calculus, &syn.derivation).map_err(|e| e.to_string())?;
            println!(
                "synthesized a {}-rule derivation of `{}` in {}",
                syn.derivation.node_count(),
                syn.derivation.sequent,
                syn.calculus.name
            );
            if let Some(path) = emit_derivation {
                fs::write(&path, to_json(&syn.derivation)).map_err(|e| e.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Parse { calculus, lexicon, mode, max_brackets, phrase, budget, format } => {
            let c = load_calculus(&calculus)?;
            let text = fs::read_to_string(&lexicon).map_err(|e| format!("{lexicon}: {e}"))?;
            let lex = Lexicon::parse(&text).map_err(|e| e.to_string())?;
            let words: Vec<&str> = phrase.split_whitespace().collect();
            let verdict = if mode == "s" {
                s_recognize(&c, &lex, &words, &budget.budget())
            } else {
                t_recognize(&c, &lex, &words, &budget.budget(), max_brackets)
            }
            .map_err(|e| e.to_string())?;
            let (label, code) = match &verdict {
                SearchVerdict::Derivable(_) => ("accepted", 0u8),
                SearchVerdict::Underivable => ("rejected", 1),
                SearchVerdict::Unknown(_) => ("unknown", 2),
            };
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({"verdict": label, "phrase": phrase})
                ),
                Format::Text => match &verdict {
                    SearchVerdict::Derivable(d) => {
                        println!("accepted: {}", d.sequent)
                    }
                    SearchVerdict::Underivable => println!("rejected (space exhausted)"),
                    SearchVerdict::Unknown(cap) => println!("unknown (budget cap: {cap:?})"),
                },
            }
            Ok(ExitCode::from(code))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

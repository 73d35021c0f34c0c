use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use pebblelog::canonical::{canonical_eval, synthesize_canonical, DEFAULT_SYNTHESIS_BUDGET};
use pebblelog::datalog::{parse_program, DatalogProgram, Evaluator};
use pebblelog::lab::{run_experiment, EXPERIMENTS};
use pebblelog::logic::{equiv_q, eval_traced, parse_formula, Formula, Route, SemanticsMode, DEFAULT_EQUIV_BUDGET, DEFAULT_SO_BUDGET};
use pebblelog::pebble::{greatest_strategy_family, DEFAULT_GAME_BUDGET};
use pebblelog::structure::{hom_search, parse_structure, serialize_structure};
use pebblelog::{Budget, Error, Structure};

#[derive(Parser)]
#[command(name = "pebblelog", version, about = "Datalog, pebble games and MSO/GSO on small finite structures")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Output::Human, global = true)]
    output: Output,
    /// Overrides the default budget of the chosen operation (also PEBBLELOG_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Human,
    Tsv,
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Least fixed point of a Datalog program.
    Eval {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        dump_idb: bool,
    },
    /// Existential (l,k)-pebble game.
    Pebble {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(short)]
        l: usize,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        dump_family: bool,
    },
    /// Canonical Datalog program of a finite template.
    Canonical {
        #[command(subcommand)]
        action: CanonicalAction,
    },
    /// Model-check an MSO/GSO sentence.
    Mso {
        #[arg(long)]
        formula: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        guarded: bool,
        #[arg(long)]
        trace: bool,
    },
    /// Quantifier-rank equivalence under guarded semantics.
    Equivq {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(short)]
        q: usize,
        /// Maximal arity of second-order moves.
        #[arg(long, default_value_t = 1)]
        cap: usize,
    },
    /// Homomorphism search.
    Hom {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
    },
    /// Built-in experiments with expected verdicts.
    Lab {
        #[command(subcommand)]
        action: LabAction,
    },
    /// Validate a structure (.st), program (.dl) or formula (.fml) and pretty-print it.
    Formats {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
}

#[derive(Subcommand)]
enum CanonicalAction {
    Eval {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(short)]
        l: usize,
        #[arg(short)]
        k: usize,
    },
    Synth {
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(short)]
        l: usize,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LabAction {
    Run {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        experiment: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Structure,
    Program,
    Formula,
}

/// One verdict with its provenance.
struct Report {
    op: &'static str,
    inputs: Vec<(&'static str, String)>,
    params: Map<String, Value>,
    verdict: String,
    witness: Option<Value>,
    /// extra human-readable lines
    details: Vec<String>,
}

impl Report {
    fn new(op: &'static str, verdict: impl Into<String>) -> Self {
        Report {
            op,
            inputs: Vec::new(),
            params: Map::new(),
            verdict: verdict.into(),
            witness: None,
            details: Vec::new(),
        }
    }

    fn input(mut self, name: &'static str, path: &Path) -> Self {
        self.inputs.push((name, path.display().to_string()));
        self
    }

    fn param(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.params.insert(name.to_string(), v.into());
        self
    }

    fn print(&self, mode: Output) {
        match mode {
            Output::Human => {
                println!("{}", self.verdict);
                for d in &self.details {
                    println!("{d}");
                }
            }
            Output::Tsv => {
                let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let witness = self.witness.as_ref().map(flat).unwrap_or_default();
                println!("{}\t{}\t{}\t{}", self.op, params.join(","), self.verdict, witness);
            }
            Output::JsonLines => {
                let inputs: Map<String, Value> =
                    self.inputs.iter().map(|(k, v)| (k.to_string(), Value::from(v.clone()))).collect();
                let mut obj = json!({
                    "op": self.op,
                    "inputs": inputs,
                    "params": self.params,
                    "verdict": self.verdict,
                });
                if let Some(w) = &self.witness {
                    obj["witness"] = w.clone();
                }
                println!("{obj}");
            }
        }
    }
}

fn flat(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) => xs.iter().map(flat).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_structure(path: &Path) -> Result<Structure> {
    Ok(parse_structure(&read(path)?).with_context(|| path.display().to_string())?)
}

fn load_program(path: &Path) -> Result<DatalogProgram> {
    Ok(parse_program(&read(path)?).with_context(|| path.display().to_string())?)
}

fn load_formula(path: &Path) -> Result<Formula> {
    Ok(parse_formula(&read(path)?).with_context(|| path.display().to_string())?)
}

fn budget(flag: Option<u64>, default: Budget) -> Result<Budget> {
    if let Some(b) = flag {
        return Ok(Budget(b));
    }
    match std::env::var("PEBBLELOG_BUDGET") {
        Ok(s) => {
            let b = s.trim().parse().map_err(|_| Error::InvalidParameters(format!("PEBBLELOG_BUDGET={s}")))?;
            Ok(Budget(b))
        }
        Err(_) => Ok(default),
    }
}

fn goal(b: bool) -> &'static str {
    if b {
        "GOAL"
    } else {
        "NO-GOAL"
    }
}

fn truth(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out = cli.output;
    let report = match cli.command {
        Command::Eval {
            program,
            structure,
            dump_idb,
        } => {
            let p = load_program(&program)?;
            let a = load_structure(&structure)?;
            let ev = Evaluator::new(&p)?;
            let mut r = Report::new("eval", goal(ev.derives_goal(&a)?))
                .input("program", &program)
                .input("structure", &structure);
            if dump_idb {
                let mut facts = Vec::new();
                for (name, tuples) in ev.idb_relations(&a)? {
                    for t in tuples {
                        let args = if t.is_empty() { String::new() } else { a.show_tuple(&t) };
                        facts.push(format!("{name}{args}"));
                    }
                }
                r.witness = Some(json!(facts));
                r.details = facts;
            }
            r
        }
        Command::Pebble {
            a,
            b,
            l,
            k,
            dump_family,
        } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            let fam = greatest_strategy_family(&sa, &sb, l, k, budget(cli.budget, DEFAULT_GAME_BUDGET)?)?;
            let mut r = Report::new("pebble", if fam.is_empty() { "SPOILER" } else { "DUPLICATOR" })
                .input("A", &a)
                .input("B", &b)
                .param("l", l)
                .param("k", k);
            if dump_family {
                let lines = fam.dump(&sa, &sb);
                r.witness = Some(json!(lines));
                r.details = lines;
            }
            r
        }
        Command::Canonical { action } => match action {
            CanonicalAction::Eval { a, b, l, k } => {
                let sa = load_structure(&a)?;
                let sb = load_structure(&b)?;
                let v = canonical_eval(&sa, &sb, l, k, budget(cli.budget, DEFAULT_GAME_BUDGET)?)?;
                Report::new("canonical eval", goal(v))
                    .input("A", &a)
                    .input("B", &b)
                    .param("l", l)
                    .param("k", k)
            }
            CanonicalAction::Synth { b, l, k, o } => {
                let sb = load_structure(&b)?;
                let c = synthesize_canonical(&sb, l, k, budget(cli.budget, DEFAULT_SYNTHESIS_BUDGET)?)?;
                let text = c.program.to_string();
                let mut r = Report::new("canonical synth", format!("{} rules", c.program.rules().len()))
                    .input("B", &b)
                    .param("l", l)
                    .param("k", k);
                match &o {
                    Some(path) => {
                        fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
                        r = r.param("output", path.display().to_string());
                    }
                    None if out == Output::Human => {
                        print!("{text}");
                        return Ok(ExitCode::SUCCESS);
                    }
                    None => r.witness = Some(Value::from(text)),
                }
                r
            }
        },
        Command::Mso {
            formula,
            structure,
            guarded,
            trace,
        } => {
            let phi = load_formula(&formula)?;
            let a = load_structure(&structure)?;
            let mode = if guarded {
                SemanticsMode::Guarded
            } else {
                SemanticsMode::Standard
            };
            let res = eval_traced(&phi, &a, mode, Route::Auto, budget(cli.budget, DEFAULT_SO_BUDGET)?, &[])?;
            let mut r = Report::new("mso", truth(res.value))
                .input("formula", &formula)
                .input("structure", &structure)
                .param("guarded", guarded);
            if trace {
                r = r.param("route", format!("{:?}", res.route).to_lowercase());
                if let Some((name, tuples)) = res.witness {
                    let shown: Vec<String> = tuples.iter().map(|t| a.show_tuple(t)).collect();
                    let line = format!("{name} = {{{}}}", shown.join(", "));
                    r.details.push(line.clone());
                    r.witness = Some(Value::from(line));
                }
            }
            r
        }
        Command::Equivq { a, b, q, cap } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            let res = equiv_q(&sa, &sb, q, cap, budget(cli.budget, DEFAULT_EQUIV_BUDGET)?)?;
            let mut r = Report::new("equivq", truth(res.equivalent))
                .input("A", &a)
                .input("B", &b)
                .param("q", q)
                .param("cap", cap);
            if let Some(f) = res.witness {
                r.details.push(f.to_string());
                r.witness = Some(Value::from(f.to_string()));
            }
            r
        }
        Command::Hom { a, b } => {
            let sa = load_structure(&a)?;
            let sb = load_structure(&b)?;
            let h = hom_search(&sa, &sb)?;
            let mut r = Report::new("hom", truth(h.is_some())).input("A", &a).input("B", &b);
            if let Some(h) = h {
                let pairs: Vec<String> = sa
                    .elements()
                    .map(|x| format!("{}->{}", sa.name(x), sb.name(h.apply(x))))
                    .collect();
                let line = pairs.join(",");
                r.details.push(line.clone());
                r.witness = Some(Value::from(line));
            }
            r
        }
        Command::Lab {
            action: LabAction::Run { experiment },
        } => {
            let rep = run_experiment(&experiment)?;
            match out {
                Output::Human => println!("{rep}"),
                _ => {
                    for row in &rep.rows {
                        let r = Report {
                            op: "lab run",
                            inputs: vec![("experiment", experiment.clone())],
                            params: Map::new(),
                            verdict: row.observed.clone(),
                            witness: None,
                            details: Vec::new(),
                        }
                        .param("case", row.case.clone())
                        .param("expected", row.expected.clone());
                        r.print(out);
                    }
                }
            }
            return Ok(if rep.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Formats { file, kind } => {
            let kind = match kind {
                Some(k) => k,
                None => match file.extension().and_then(|e| e.to_str()) {
                    Some("st") => Kind::Structure,
                    Some("dl") => Kind::Program,
                    Some("fml") => Kind::Formula,
                    _ => return Err(Error::InvalidInput(format!("cannot infer the format of {}; pass --kind", file.display())).into()),
                },
            };
            let pretty = match kind {
                Kind::Structure => serialize_structure(&load_structure(&file)?),
                Kind::Program => load_program(&file)?.to_string(),
                Kind::Formula => format!("{}\n", load_formula(&file)?),
            };
            if out == Output::Human {
                print!("{pretty}");
                return Ok(ExitCode::SUCCESS);
            }
            let mut r = Report::new("formats", "VALID").input("file", &file);
            r.witness = Some(Value::from(pretty));
            r
        }
    };
    report.print(out);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e.chain().any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_budget));
            ExitCode::from(if budget { 3 } else { 2 })
        }
    }
}

//! `cohere`: parse, Morleyize, chase, prove, force and refute from the shell.
//!
//! Exit status is 0 on success, `proved` or `forced`, 2 on an outcome the
//! bounds left open or negative (`unknown`, `not_forced`, exhausted fuel, a
//! finite countermodel), and 1 on errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cohere::chase::{chase_regular, DEFAULT_FUEL};
use cohere::cover::{check_certificates, prove, Verdict as Proof, DEFAULT_MAX_DEPTH};
use cohere::diagram::{Diagram, ElementId};
use cohere::morley::{alias_table, morleyize, Schema, Target};
use cohere::oracle::refute;
use cohere::semantics::{build_beth_tree, BethEngine, Forcer, Kind, Verdict};
use cohere::syntax::{parse_formula_in_context, parse_sequent, parse_theory, print_theory, Formula, Sequent, Sym, Theory};

#[derive(Parser, Debug)]
#[command(name = "cohere", version, about = "Regular and coherent theories: chase, proof search and forcing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// Output format; `dot` applies to `force` only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Chase fuel: rule applications per chase.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL, value_parser = positive)]
    fuel: usize,
    /// Proof-search depth bound.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DEPTH, value_parser = positive)]
    max_depth: usize,
    /// Domain-size bound for the finite-model oracle (at most 4).
    #[arg(long, global = true, default_value_t = 3)]
    max_size: usize,
    /// Accepted for scripting symmetry; no subcommand samples randomly.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Regular,
    Coherent,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Kripke,
    BethStar,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a theory and print it back in normal form.
    Parse { theory: PathBuf },
    /// Morleyize a theory over the closure of its axioms and extra formulas.
    Morleyize {
        theory: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Regular)]
        target: TargetArg,
        /// Extra formulas, one per line.
        #[arg(long)]
        extras: Option<PathBuf>,
        /// Also write the alias table as JSON to this file.
        #[arg(long)]
        aliases: Option<PathBuf>,
    },
    /// Chase a diagram under a regular theory.
    Chase {
        theory: PathBuf,
        /// Initial diagram as JSON.
        #[arg(long, conflicts_with = "empty", required_unless_present = "empty")]
        diagram: Option<PathBuf>,
        /// Start from the empty diagram.
        #[arg(long)]
        empty: bool,
    },
    /// Search for a dynamical-cover proof of a sequent.
    Prove {
        theory: PathBuf,
        #[arg(long)]
        sequent: String,
    },
    /// Evaluate forcing over a tree of diagrams built from a root.
    Force {
        theory: PathBuf,
        #[arg(long, value_enum, default_value_t = KindArg::BethStar)]
        kind: KindArg,
        /// Root diagram as JSON.
        #[arg(long, conflicts_with = "chase_empty", required_unless_present = "chase_empty")]
        root: Option<PathBuf>,
        /// Use the closed empty diagram as the root.
        #[arg(long)]
        chase_empty: bool,
        /// Levels of the tree below the root.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// `<formula> [ctx v, ...]`; open formulas are checked at every tuple.
        #[arg(long)]
        query: String,
    },
    /// Look for a finite countermodel of a sequent.
    Oracle {
        theory: PathBuf,
        #[arg(long)]
        sequent: String,
    },
    /// Check `prove --format json` output against a theory and sequent.
    CheckCert {
        theory: PathBuf,
        #[arg(long)]
        sequent: String,
        /// The proof JSON.
        #[arg(long)]
        cert: PathBuf,
    },
}

/// What a command prints, and whether its outcome was positive.
struct Outcome {
    text: String,
    json: Value,
    dot: Option<String>,
    positive: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome {
            text,
            json,
            dot: None,
            positive: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let rendered = match cli.global.format {
                Format::Text => out.text,
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&out.json).expect("JSON values serialize")),
                Format::Dot => match out.dot {
                    Some(d) => d,
                    None => {
                        eprintln!("error: --format dot applies to `force` only");
                        return ExitCode::from(1);
                    }
                },
            };
            print!("{rendered}");
            ExitCode::from(if out.positive { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_theory(path: &Path) -> Result<Theory> {
    parse_theory(&read(path)?).map_err(|e| anyhow!("{}:{e}", path.display()))
}

fn load_diagram(path: &Path) -> Result<Diagram> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("{}: invalid JSON", path.display()))?;
    Diagram::from_json(&v).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn sequent_arg(text: &str, t: &Theory) -> Result<Sequent> {
    parse_sequent(text, &t.signature).map_err(|e| anyhow!("--sequent:{e}"))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.format == Format::Dot && !matches!(cli.command, Command::Force { .. }) {
        bail!("--format dot applies to `force` only");
    }
    match &cli.command {
        Command::Parse { theory } => parse_cmd(&load_theory(theory)?),
        Command::Morleyize {
            theory,
            target,
            extras,
            aliases,
        } => morleyize_cmd(&load_theory(theory)?, *target, extras.as_deref(), aliases.as_deref()),
        Command::Chase { theory, diagram, .. } => {
            let t = load_theory(theory)?;
            let d = match diagram {
                Some(p) => load_diagram(p)?,
                None => Diagram::new(),
            };
            chase_cmd(&t, &d, g.fuel)
        }
        Command::Prove { theory, sequent } => {
            let t = load_theory(theory)?;
            let s = sequent_arg(sequent, &t)?;
            prove_cmd(&t, &s, g.max_depth)
        }
        Command::Force {
            theory,
            kind,
            root,
            depth,
            query,
            ..
        } => {
            let t = load_theory(theory)?;
            let root = root.as_deref().map(load_diagram).transpose()?;
            force_cmd(&t, *kind, root, *depth, query, g.fuel)
        }
        Command::Oracle { theory, sequent } => {
            let t = load_theory(theory)?;
            let s = sequent_arg(sequent, &t)?;
            oracle_cmd(&t, &s, g.max_size)
        }
        Command::CheckCert { theory, sequent, cert } => {
            let t = load_theory(theory)?;
            let s = sequent_arg(sequent, &t)?;
            let v: Value = serde_json::from_str(&read(cert)?).with_context(|| format!("{}: invalid JSON", cert.display()))?;
            check_certificates(&t, &s, &v).map_err(|e| anyhow!("{}: {e}", cert.display()))?;
            Ok(Outcome::ok("certificate valid\n".into(), json!({"valid": true})))
        }
    }
}

fn sequent_json(s: &Sequent) -> Value {
    json!({
        "antecedent": s.antecedent.to_string(),
        "consequent": s.consequent.to_string(),
        "context": s.context.vars().iter().map(ToString::to_string).collect::<Vec<_>>(),
    })
}

fn parse_cmd(t: &Theory) -> Result<Outcome> {
    let relations: serde_json::Map<String, Value> = t.signature.relations().map(|(r, a)| (r.to_string(), json!(a))).collect();
    let json = json!({
        "name": t.name,
        "relations": relations,
        "axioms": t.axioms.iter().map(sequent_json).collect::<Vec<_>>(),
        "fragment": t.fragment().name(),
    });
    Ok(Outcome::ok(print_theory(t), json))
}

fn morleyize_cmd(t: &Theory, target: TargetArg, extras: Option<&Path>, aliases: Option<&Path>) -> Result<Outcome> {
    let mut fs = Vec::new();
    if let Some(path) = extras {
        for (i, line) in read(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (_, f) = parse_formula_in_context(line, &t.signature).map_err(|e| anyhow!("{}:{}: {e}", path.display(), i + 1))?;
            fs.push(f);
        }
    }
    let target = match target {
        TargetArg::Regular => Target::Regular,
        TargetArg::Coherent => Target::Coherent,
    };
    let m = morleyize(t, &fs, target);
    let table = alias_table(&m.map);
    let table_json = serde_json::to_value(&table).expect("string map");
    if let Some(path) = aliases {
        let text = format!("{}\n", serde_json::to_string_pretty(&table_json).expect("string map"));
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let schemas = [
        Schema::Thry,
        Schema::Atom,
        Schema::True,
        Schema::Conj,
        Schema::Exist,
        Schema::Disj,
        Schema::False,
        Schema::Connective,
    ];
    let counts: serde_json::Map<String, Value> = schemas
        .iter()
        .map(|&s| (format!("{s:?}").to_lowercase(), json!(m.count(s))))
        .collect();
    let dsl = print_theory(&m.result);
    let json = json!({
        "target": target.name(),
        "theory": dsl,
        "aliases": table_json,
        "counts": counts,
    });
    Ok(Outcome::ok(dsl, json))
}

fn chase_cmd(t: &Theory, d: &Diagram, fuel: usize) -> Result<Outcome> {
    let p = cohere::chase::Program::compile(t)?;
    let r = chase_regular(&p, d, fuel)?;
    let text = format!(
        "status: {}\nfuel used: {}\nsteps: {}\ndiagram: {}\n",
        r.status.name(),
        r.fuel_used,
        r.trace.steps.len(),
        r.diagram.summary()
    );
    Ok(Outcome {
        text,
        json: r.to_json(),
        dot: None,
        positive: r.status != cohere::chase::ChaseStatus::FuelExhausted,
    })
}

fn prove_cmd(t: &Theory, s: &Sequent, depth: usize) -> Result<Outcome> {
    let v = prove(t, s, depth)?;
    let text = match &v {
        Proof::Proved(cs) => {
            let mut out = format!("proved: {s}\n");
            for (i, c) in cs.iter().enumerate() {
                out.push_str(&format!(
                    "  part {i}: {} nodes, {} bar leaves\n",
                    c.nodes.len(),
                    c.bar.len()
                ));
            }
            out
        }
        Proof::Unknown { depth, branch } => {
            let leaf = branch.diagrams.last().map(Diagram::summary).unwrap_or_default();
            format!("unknown at depth {depth}: {s}\n  open leaf (part {}): {leaf}\n", branch.part)
        }
    };
    Ok(Outcome {
        text,
        json: v.to_json(),
        dot: None,
        positive: v.is_proved(),
    })
}

fn force_cmd(t: &Theory, kind: KindArg, root: Option<Diagram>, depth: usize, query: &str, fuel: usize) -> Result<Outcome> {
    let (ctx, f) = parse_formula_in_context(query, &t.signature).map_err(|e| anyhow!("--query:{e}"))?;
    let mut engine = BethEngine::new(t, std::slice::from_ref(&f))?;
    engine.fuel = fuel;
    let root = root.unwrap_or_else(Diagram::untracked);
    let tree = build_beth_tree(&engine, &root, depth)?;
    let s = match kind {
        KindArg::Kripke => tree.structure.with_kind(Kind::Kripke),
        KindArg::BethStar => tree.structure,
    };
    let vars: Vec<Sym> = ctx.vars().to_vec();
    let mut forcer = Forcer::new(&s);
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    let mut root_verdict = Verdict::Forced;
    for (p, node) in s.nodes.iter().enumerate() {
        let reps: Vec<ElementId> = node.diagram.reps().collect();
        for tuple in tuples(&reps, vars.len()) {
            let mut env: Vec<(Sym, ElementId)> = vars.iter().cloned().zip(tuple.iter().copied()).collect();
            let v = forcer.force(p, &f, &mut env)?;
            if v == Verdict::Unknown {
                skipped += 1;
            }
            if p == 0 {
                root_verdict = root_verdict.and(v);
            }
            rows.push((p, node.level, tuple, v));
        }
    }
    let ids = |t: &[ElementId]| t.iter().map(ToString::to_string).collect::<Vec<_>>();
    let mut text = format!("{} at the root: {}\n", query_text(&f, &vars), root_verdict);
    for (p, level, tuple, v) in &rows {
        text.push_str(&format!("  node {p} (level {level}) [{}]: {v}\n", ids(tuple).join(",")));
    }
    text.push_str(&format!("unknown: {skipped}\n"));
    let json = json!({
        "kind": s.kind.name(),
        "query": f.to_string(),
        "context": vars.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "verdict": root_verdict.name(),
        "nodes": rows.iter().map(|(p, level, tuple, v)| json!({
            "node": p,
            "level": level,
            "tuple": ids(tuple),
            "verdict": v.name(),
        })).collect::<Vec<_>>(),
        "skipped": skipped,
        "unsaturated": tree.unsaturated,
        "structure": s.to_json(),
    });
    Ok(Outcome {
        text,
        json,
        dot: Some(s.to_dot()),
        positive: root_verdict == Verdict::Forced,
    })
}

fn query_text(f: &Formula, vars: &[Sym]) -> String {
    if vars.is_empty() {
        f.to_string()
    } else {
        let vs: Vec<&str> = vars.iter().map(|v| &**v).collect();
        format!("{f} [ctx {}]", vs.join(", "))
    }
}

/// Every `n`-tuple over `els` in lexicographic order.
fn tuples(els: &[ElementId], n: usize) -> Vec<Vec<ElementId>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                els.iter().map(move |&e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

fn oracle_cmd(t: &Theory, s: &Sequent, k: usize) -> Result<Outcome> {
    let found = refute(t, s, k)?;
    let (text, json) = match &found {
        None => (
            format!("valid in every model with at most {k} elements: {s}\n"),
            json!({"valid": true, "max_size": k}),
        ),
        Some((m, assignment)) => (
            format!(
                "refuted by a model with {} elements at [{}]: {}\n",
                m.size,
                assignment.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
                m.to_diagram().summary()
            ),
            json!({
                "valid": false,
                "max_size": k,
                "countermodel": m.to_diagram().to_json(),
                "assignment": assignment,
            }),
        ),
    };
    Ok(Outcome {
        text,
        json,
        dot: None,
        positive: found.is_none(),
    })
}

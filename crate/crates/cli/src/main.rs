//! `bcrlab` — command-line front end.
//!
//! Every subcommand prints one JSON document on stdout (and to `--out` when
//! given).  Failures print `{"error": kind, "message": …}` on stderr and exit
//! with 2 (invalid input), 1 (resource bound or internal error).

use anyhow::{anyhow, Context, Result};
use bcrlab_core::algebra::{quotient_dimension, relation_vectors, weight_w, RelationKind};
use bcrlab_core::alexander::{
    alexander_polynomial, alexander_polynomial_deleting, alpha_coefficients, raw_alexander_determinant,
    validate_presentation, wheel_presentation, RibbonPresentation,
};
use bcrlab_core::chord_map::{chord_diagram_of, is_chord_diagram, pairing_value, SingularDiskData};
use bcrlab_core::enumerate::{enumerate_connected, max_k};
use bcrlab_core::mc::{
    hopf_pair, linking_estimate, phi_difference_estimate, z2_estimate, Embedding, MCConfig, SpherePiece,
};
use bcrlab_core::schemes::{evaluate, evaluate_alexander, expand, Invariant, MarkedPresentation};
use bcrlab_core::{Error as CoreError, JacobiDiagram};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

/// Default seed for every randomized subcommand.
const DEFAULT_SEED: u64 = 42;
/// Default bound on wheel sizes for `--wheel`.
const DEFAULT_MAX_WHEEL: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "bcrlab", version, about = "Jacobi diagrams, ribbon-knot invariants and configuration-space Monte Carlo")]
struct Cli {
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jacobi diagram enumeration and weights.
    #[command(subcommand)]
    Diagrams(DiagramsCmd),
    /// The quotient A_k and its relations.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Normalized Alexander polynomial of a ribbon presentation.
    Alexander {
        #[command(flatten)]
        source: PresentationSource,
        /// Delete this column of the Alexander matrix (default 0).
        #[arg(long)]
        delete_column: Option<usize>,
    },
    /// α_2..α_order of a ribbon presentation.
    Alpha {
        #[command(flatten)]
        source: PresentationSource,
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
    /// k-schemes of marked presentations.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// The chord diagram Γ(γ) of a singular-disk datum and its pairing value.
    Chordmap {
        /// Marked presentation JSON (every crossing marked, star-like).
        #[arg(long)]
        marked: PathBuf,
    },
    /// Monte Carlo configuration-space integrals.
    Mc(McArgs),
}

#[derive(Subcommand, Debug)]
enum DiagramsCmd {
    /// Connected degree-k diagrams up to isomorphism.
    Enumerate {
        #[arg(long)]
        k: usize,
    },
    /// w_k of a diagram given as JSON.
    Weight {
        #[arg(long)]
        diagram: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum AlgebraCmd {
    /// dim A_k.
    QuotientDim {
        #[arg(long)]
        k: usize,
    },
    /// Generating relation instances in degree k.
    Relations {
        #[arg(long)]
        k: usize,
        /// Restrict to these kinds (ST, SU, STU, C); repeatable.
        #[arg(long = "kind")]
        kinds: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum SchemeCmd {
    /// Evaluate an invariant on the scheme [P; c_1..c_m].
    Eval {
        #[arg(long)]
        marked: PathBuf,
        /// `alexander` or `alpha:j`.
        #[arg(long)]
        invariant: String,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct PresentationSource {
    /// Presentation JSON file.
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Use the built-in wheel presentation W_k.
    #[arg(long)]
    wheel: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum McMode {
    Linking,
    PhiDiff,
    Z2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EmbeddingKind {
    Plane,
    Bump,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(value_enum)]
    mode: McMode,
    /// Knot dimension; only n = 3 (ambient ℝ⁵) is supported.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Wheel size (phi-diff).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Crossing index 1..=k (phi-diff).
    #[arg(long, default_value_t = 1)]
    j: usize,
    /// Geometry scale ε (phi-diff).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Sample count; accepts forms like 1e6.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Diagonal cutoff δ.
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 64)]
    batches: usize,
    /// Exchange the two embeddings (phi-diff).
    #[arg(long)]
    swapped: bool,
    /// Reverse the orientation of the second piece (linking).
    #[arg(long)]
    reverse: bool,
    /// Pieces as JSON `[sphereA, sphereB]` instead of the Hopf pair (linking).
    #[arg(long)]
    pieces: Option<PathBuf>,
    /// Embedding for z2.
    #[arg(long, value_enum, default_value_t = EmbeddingKind::Plane)]
    embedding: EmbeddingKind,
    /// Bump amplitude (z2 with --embedding bump).
    #[arg(long, default_value_t = 0.5)]
    amplitude: f64,
    /// Antithetic mirroring (z2).
    #[arg(long)]
    antithetic: bool,
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("not a non-negative integer count: {s}"))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_presentation(src: &PresentationSource) -> Result<RibbonPresentation> {
    let p = match (&src.presentation, src.wheel) {
        (Some(path), _) => read_json(path)?,
        (None, Some(k)) => {
            let bound = max_k(DEFAULT_MAX_WHEEL);
            if k < 1 {
                return Err(CoreError::Validation("wheel size must be ≥ 1".into()).into());
            }
            if k > bound {
                return Err(CoreError::Resource(format!("wheel size {k} exceeds the bound {bound} (BCRLAB_MAX_K)")).into());
            }
            wheel_presentation(k)
        }
        (None, None) => return Err(anyhow!("one of --presentation or --wheel is required")),
    };
    let report = validate_presentation(&p);
    if !report.ok {
        return Err(CoreError::Validation(format!("invalid presentation: {}", report.issues.join("; "))).into());
    }
    Ok(p)
}

fn laurent_json(p: &bcrlab_core::laurent::LaurentPolynomial) -> Value {
    json!({ "polynomial": p, "text": p.to_string() })
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Diagrams(DiagramsCmd::Enumerate { k }) => {
            let classes = enumerate_connected(*k)?;
            let oriented: usize = classes.iter().map(|c| c.oriented_count).sum();
            Ok(json!({
                "k": k,
                "count": classes.len(),
                "oriented_count": oriented,
                "classes": classes.iter().map(|c| json!({
                    "form": c.form.to_string(),
                    "aut": c.aut,
                    "zero_by_symmetry": c.orientation_reversing,
                    "oriented_classes": c.oriented_count,
                    "diagram": c.diagram,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::Diagrams(DiagramsCmd::Weight { diagram }) => {
            let d: JacobiDiagram = read_json(diagram)?;
            if !d.is_valid() {
                return Err(CoreError::Validation(format!("invalid diagram: {:?}", d.validate())).into());
            }
            Ok(json!({ "k": d.degree(), "weight": weight_w(&d)?.to_string(), "chord_diagram": is_chord_diagram(&d) }))
        }
        Command::Algebra(AlgebraCmd::QuotientDim { k }) => Ok(json!({ "k": k, "dim": quotient_dimension(*k)? })),
        Command::Algebra(AlgebraCmd::Relations { k, kinds }) => {
            let kinds: Vec<RelationKind> = if kinds.is_empty() {
                RelationKind::ALL.to_vec()
            } else {
                kinds.iter().map(|s| RelationKind::parse(s)).collect::<Result<_, _>>()?
            };
            let rels = relation_vectors(*k, &kinds)?;
            Ok(json!({ "k": k, "count": rels.len(), "relations": rels.to_json() }))
        }
        Command::Alexander { source, delete_column } => {
            let p = load_presentation(source)?;
            let col = delete_column.unwrap_or(0);
            let delta = alexander_polynomial_deleting(&p, col)?;
            let raw = raw_alexander_determinant(&p, col)?;
            debug_assert_eq!(delta, alexander_polynomial(&p)?);
            Ok(json!({ "delta": laurent_json(&delta), "raw_determinant": laurent_json(&raw), "deleted_column": col }))
        }
        Command::Alpha { source, order } => {
            if *order < 2 {
                return Err(CoreError::Validation("order must be ≥ 2".into()).into());
            }
            let p = load_presentation(source)?;
            let a = alpha_coefficients(&p, *order)?;
            let alpha: serde_json::Map<String, Value> =
                a.iter().enumerate().map(|(i, v)| (format!("{}", i + 2), Value::String(v.to_string()))).collect();
            Ok(json!({ "order": order, "alpha": alpha, "delta": laurent_json(&alexander_polynomial(&p)?) }))
        }
        Command::Scheme(SchemeCmd::Eval { marked, invariant }) => {
            let mp: MarkedPresentation = read_json(marked)?;
            mp.validate()?;
            let s = expand(&mp)?;
            let value = match invariant.as_str() {
                "alexander" => laurent_json(&evaluate_alexander(&s)?),
                other => {
                    let j = other
                        .strip_prefix("alpha:")
                        .and_then(|j| j.parse::<usize>().ok())
                        .filter(|j| *j >= 2)
                        .ok_or_else(|| CoreError::Validation(format!("unknown invariant {other:?}; use alexander or alpha:j (j ≥ 2)")))?;
                    Value::String(evaluate(|p| Invariant::Alpha(j).eval(p), &s)?.to_string())
                }
            };
            Ok(json!({ "invariant": invariant, "marks": mp.marks.len(), "terms": s.terms.len(), "value": value }))
        }
        Command::Chordmap { marked } => {
            let mp: MarkedPresentation = read_json(marked)?;
            let g = SingularDiskData::new(mp)?;
            let d = chord_diagram_of(&g)?;
            Ok(json!({
                "k": g.k(),
                "branch_lengths": g.branch_lengths(),
                "admissible": d.is_valid(),
                "diagram": d,
                "pairing_value": pairing_value(&g)?.to_string(),
            }))
        }
        Command::Mc(a) => run_mc(a),
    }
}

fn run_mc(a: &McArgs) -> Result<Value> {
    let cfg = MCConfig { samples: a.samples, seed: a.seed, delta: a.delta, batches: a.batches, antithetic: a.antithetic };
    cfg.validate()?;
    if a.n != 3 {
        return Err(CoreError::Validation(format!("only n = 3 is supported, got {}", a.n)).into());
    }
    match a.mode {
        McMode::Linking => {
            let (pa, mut pb) = match &a.pieces {
                Some(path) => {
                    let [x, y]: [SpherePiece; 2] = read_json(path)?;
                    (x, y)
                }
                None => hopf_pair(),
            };
            if a.reverse {
                pb.reversed = !pb.reversed;
            }
            let e = linking_estimate(&pa, &pb, &cfg)?;
            Ok(json!({ "mode": "linking", "config": cfg, "pieces": [pa, pb], "estimate": e }))
        }
        McMode::PhiDiff => {
            let e = phi_difference_estimate(a.k, a.j, a.eps, &cfg, a.swapped)?;
            Ok(json!({ "mode": "phi-diff", "config": cfg, "k": a.k, "j": a.j, "eps": a.eps, "swapped": a.swapped, "estimate": e }))
        }
        McMode::Z2 => {
            let emb = match a.embedding {
                EmbeddingKind::Plane => Embedding::StandardPlane { n: a.n },
                EmbeddingKind::Bump => Embedding::Bump { n: a.n, amplitude: a.amplitude },
            };
            let r = z2_estimate(&emb, &cfg)?;
            Ok(json!({ "mode": "z2", "config": cfg, "embedding": emb, "estimate": r.estimate, "terms": r.terms, "nonconvergent": r.nonconvergent }))
        }
    }
}

/// Exit code and error kind for a failure.
fn classify(e: &anyhow::Error) -> (i32, &'static str) {
    if let Some(c) = e.downcast_ref::<CoreError>() {
        return match c {
            CoreError::Validation(_) => (2, "validation"),
            CoreError::Resource(_) => (1, "resource"),
            CoreError::Structural(_) => (1, "structural"),
        };
    }
    // unreadable or malformed input files
    (2, "validation")
}

fn fail(kind: &str, message: String, code: i32) -> ! {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    std::process::exit(code);
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                print!("{e}");
                return;
            }
            _ => fail("usage", e.to_string(), 2),
        },
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            fail("validation", "--threads must be ≥ 1".into(), 2);
        }
        std::env::set_var("RAYON_NUM_THREADS", t.to_string());
    }
    match run(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    fail("io", format!("writing {}: {e}", path.display()), 1);
                }
            }
            use std::io::Write;
            // a closed pipe downstream is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
        Err(e) => {
            let (code, kind) = classify(&e);
            fail(kind, format!("{e:#}"), code);
        }
    }
}

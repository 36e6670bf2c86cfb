//! `mf`: exact measure-theory checks from the command line.
//!
//! All input and output is JSON (files or stdin/stdout); `--pretty` adds a
//! human summary on stderr. Exit codes: 0 all checks passed, 1 a verified
//! failure was found, 2 parse or precondition error.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use mf_core::exact::ExtReal;
use mf_core::gen::{
    gen_corrupted, gen_guillotine, gen_staircase, gen_weighted_space, gen_witness_instance,
    GenKind,
};
use mf_core::jsonio::{
    family_to_json, parse_certify_instance, parse_null_section_instance, parse_set, parse_space,
    parse_witness_instance, rect_to_json, space_to_json,
};
use mf_core::outer::outer_measure_with;
use mf_core::product::{product_measure, Rect};
use mf_core::spaces::SetExpr;
use mf_core::suite::{run_suite, SuiteConfig};
use mf_core::theorem::{
    certify_sigma_additivity, extract_witness, null_section_converse, null_section_forward,
};
use mf_core::{Error, Limits};

#[derive(Parser)]
#[command(
    name = "mf",
    version,
    about = "Exact semirings, measures, outer measures, and product-measure certificates"
)]
struct Cli {
    /// Pretty-print JSON output and write a human summary to stderr.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a space's family against the semiring / algebra axioms.
    ValidateSemiring {
        /// Space document (JSON file, or - for stdin).
        file: String,
    },
    /// Compute the generated outer measure of a target set.
    Outer {
        /// Space document (JSON file, or - for stdin).
        file: String,
        /// Target set as inline JSON, e.g. '[0,2]' or '[["0","1/2"]]'.
        #[arg(long)]
        target: String,
    },
    /// Certify sigma-additivity of a rectangle partition at level t.
    CertifyProduct {
        /// Instance document with space_x, space_y, whole, parts.
        file: String,
        /// Certification level (default: product * 1023/1024).
        #[arg(long)]
        t: Option<String>,
    },
    /// Extract a finite witness index set with r*s < sum over F.
    ExtractWitness {
        /// Instance document with space_x, space_y, d, cover.
        file: String,
        /// Section threshold (sections must exceed it on D^{>r}).
        #[arg(long)]
        r: String,
        /// Mass threshold on mu*_X(D^{>r}).
        #[arg(long)]
        s: String,
    },
    /// Check the null-section equivalence for D.
    NullSection {
        /// Instance document with space_x, space_y, d.
        file: String,
        /// forward, converse, or both.
        #[arg(long, default_value = "both")]
        direction: String,
    },
    /// Generate a seeded instance document.
    Gen {
        /// guillotine_partition, random_finite_space, dyadic_staircase,
        /// corrupted_measure, or random_rect_family.
        kind: String,
        #[arg(long)]
        seed: u64,
        /// Piece count for partitions (default 8).
        #[arg(long)]
        pieces: Option<u32>,
        /// Finite universe size (default 3).
        #[arg(long)]
        universe: Option<u32>,
        /// Corruption magnitude (default 1).
        #[arg(long)]
        magnitude: Option<String>,
    },
    /// Run verification suites, streaming one report per instance.
    Suite {
        /// Suite configuration file (default: every suite at full count).
        #[arg(long)]
        config: Option<String>,
        /// Seed when no config file is given (default 1).
        #[arg(long)]
        seed: Option<u64>,
        /// Zero wall times in the streamed reports, making reruns with the
        /// same seed byte-identical.
        #[arg(long)]
        canonical: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            let doc = json!({"error": e.to_string()});
            print_json(&doc, cli.pretty);
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_document(path: &str) -> mf_core::Result<Value> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse(format!("cannot read stdin: {}", e)))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {}", path, e)))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("invalid JSON in {}: {}", path, e)))
}

fn print_json(value: &Value, pretty: bool) {
    if pretty {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    } else {
        println!("{}", serde_json::to_string(value).expect("serializable"));
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cli: &Cli) -> mf_core::Result<ExitCode> {
    let limits = Limits::default();
    match &cli.command {
        Command::ValidateSemiring { file } => {
            let doc = read_document(file)?;
            let space = parse_space(&doc)?;
            let report = space.semiring().validate(space.universe())?;
            print_json(&to_value(&report), cli.pretty);
            if cli.pretty {
                eprintln!(
                    "semiring: {}  algebra: {}  sigma-algebra: {}  violations: {}",
                    report.is_semiring,
                    report.is_algebra,
                    report.is_sigma_algebra,
                    report.violations.len()
                );
            }
            Ok(if report.is_semiring {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Outer { file, target } => {
            let doc = read_document(file)?;
            let space = parse_space(&doc)?;
            let target_doc: Value = serde_json::from_str(target)
                .map_err(|e| Error::Parse(format!("invalid target JSON: {}", e)))?;
            let target = parse_set(&target_doc, space.universe())?;
            let outer = outer_measure_with(&space, &target, &limits)?;
            print_json(&to_value(&outer), cli.pretty);
            if cli.pretty {
                eprintln!("mu*({}) = {} ({:?})", target, outer.value, outer.exactness);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::CertifyProduct { file, t } => {
            let doc = read_document(file)?;
            let (space_x, space_y, whole, parts) = parse_certify_instance(&doc)?;
            let t = match t {
                Some(raw) => raw.parse::<ExtReal>()?,
                None => {
                    let product =
                        product_measure(space_x.measure(), space_y.measure(), &whole)?;
                    product.mul(&ExtReal::ratio(1023, 1024))
                }
            };
            match certify_sigma_additivity(&space_x, &space_y, &whole, &parts, &t, &limits) {
                Ok(report) => {
                    print_json(&to_value(&report), cli.pretty);
                    if cli.pretty {
                        eprintln!(
                            "certified: t = {} < witness sum {} <= product {}",
                            report.t, report.witness.rhs, report.product
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::CertificationFailed(failure)) => {
                    print_json(&json!({"certification_failed": to_value(&failure)}), cli.pretty);
                    if cli.pretty {
                        eprintln!("certification failed: {}", failure);
                    }
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e),
            }
        }
        Command::ExtractWitness { file, r, s } => {
            let doc = read_document(file)?;
            let (space_x, space_y, d, cover) = parse_witness_instance(&doc)?;
            let r: ExtReal = r.parse()?;
            let s: ExtReal = s.parse()?;
            let witness = extract_witness(&space_x, &space_y, &d, &cover, &r, &s, &limits)?;
            print_json(&to_value(&witness), cli.pretty);
            if cli.pretty {
                eprintln!(
                    "witness: F = {:?}, r*s = {} < {}",
                    witness.f_indices, witness.lhs, witness.rhs
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::NullSection { file, direction } => {
            let doc = read_document(file)?;
            let (space_x, space_y, d) = parse_null_section_instance(&doc)?;
            let mut out = serde_json::Map::new();
            let mut failed_verdict = false;
            let mut errors = 0;
            let mut ran = 0;
            if direction == "forward" || direction == "both" {
                ran += 1;
                match null_section_forward(&space_x, &space_y, &d, &limits) {
                    Ok(v) => {
                        failed_verdict |= !v.holds;
                        out.insert("forward".into(), to_value(&v));
                    }
                    Err(e) => {
                        errors += 1;
                        out.insert("forward".into(), json!({"error": e.to_string()}));
                    }
                }
            }
            if direction == "converse" || direction == "both" {
                ran += 1;
                match null_section_converse(&space_x, &space_y, &d, &limits) {
                    Ok(v) => {
                        failed_verdict |= !v.holds;
                        out.insert("converse".into(), to_value(&v));
                    }
                    Err(e) => {
                        errors += 1;
                        out.insert("converse".into(), json!({"error": e.to_string()}));
                    }
                }
            }
            if ran == 0 {
                return Err(Error::Parse(format!(
                    "unknown direction {:?}; expected forward, converse, or both",
                    direction
                )));
            }
            print_json(&Value::Object(out), cli.pretty);
            Ok(if failed_verdict {
                ExitCode::from(1)
            } else if errors == ran {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Gen {
            kind,
            seed,
            pieces,
            universe,
            magnitude,
        } => {
            let kind: GenKind = kind.parse()?;
            let doc = generate(kind, *seed, *pieces, *universe, magnitude.as_deref(), &limits)?;
            print_json(&doc, cli.pretty);
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite {
            config,
            seed,
            canonical,
        } => {
            let config = match config {
                Some(path) => {
                    let doc = read_document(path)?;
                    serde_json::from_value::<SuiteConfig>(doc)
                        .map_err(|e| Error::Parse(format!("invalid suite config: {}", e)))?
                }
                None => SuiteConfig::full(seed.unwrap_or(1)),
            };
            let pretty = cli.pretty;
            let canonical = *canonical;
            let mut emit = |report: mf_core::suite::RunReport| {
                if canonical {
                    println!("{}", report.canonical_json());
                } else {
                    println!("{}", serde_json::to_string(&report).expect("serializable"));
                }
                if pretty && !report.pass {
                    eprintln!(
                        "FAIL {} #{}: {}",
                        report.suite,
                        report.index,
                        serde_json::to_string(&report.checks).unwrap_or_default()
                    );
                }
            };
            let mut outcomes = run_suite(&config, &limits, &mut emit)?;
            let all_pass = outcomes.iter().all(|o| o.pass);
            if canonical {
                for o in &mut outcomes {
                    o.wall_time_ms = 0;
                }
            }
            print_json(&json!({"summary": to_value(&outcomes)}), cli.pretty);
            if cli.pretty {
                for o in &outcomes {
                    eprintln!(
                        "{}: {}/{} instances passed in {} ms",
                        o.suite,
                        o.instances - o.failures,
                        o.instances,
                        o.wall_time_ms
                    );
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn generate(
    kind: GenKind,
    seed: u64,
    pieces: Option<u32>,
    universe: Option<u32>,
    magnitude: Option<&str>,
    limits: &Limits,
) -> mf_core::Result<Value> {
    let line = || {
        json!({
            "universe": "interval",
            "semiring": "interval",
            "measure": "length",
        })
    };
    let unit_square = Rect::new(
        SetExpr::interval(mf_core::exact::rat(0, 1), mf_core::exact::rat(1, 1)),
        SetExpr::interval(mf_core::exact::rat(0, 1), mf_core::exact::rat(1, 1)),
    );
    Ok(match kind {
        GenKind::GuillotinePartition => {
            let parts = gen_guillotine(seed, pieces.unwrap_or(8), &unit_square, limits)?;
            json!({
                "space_x": line(),
                "space_y": line(),
                "whole": rect_to_json(&unit_square),
                "parts": family_to_json(&parts),
            })
        }
        GenKind::DyadicStaircase => {
            let parts = gen_staircase(seed, &unit_square)?;
            json!({
                "space_x": line(),
                "space_y": line(),
                "whole": rect_to_json(&unit_square),
                "parts": family_to_json(&parts),
            })
        }
        GenKind::RandomFiniteSpace => {
            let space = gen_weighted_space(seed, universe.unwrap_or(3), true)?;
            space_to_json(&space)
        }
        GenKind::CorruptedMeasure => {
            let base = gen_weighted_space(seed, universe.unwrap_or(3), false)?;
            let control = mf_core::gen::tabulate_point_mass(&base)?;
            let magnitude = match magnitude {
                Some(raw) => raw.parse::<ExtReal>()?,
                None => ExtReal::one(),
            };
            let (corrupted, info) = gen_corrupted(seed, &control, &magnitude)?;
            json!({
                "control": space_to_json(&control),
                "corrupted": space_to_json(&corrupted),
                "corruption": to_value(&info),
            })
        }
        GenKind::RandomRectFamily => {
            let inst = gen_witness_instance(seed, limits)?;
            json!({
                "space_x": space_to_json(&inst.space_x),
                "space_y": space_to_json(&inst.space_y),
                "d": family_to_json(&inst.d.family),
                "cover": family_to_json(&inst.cover),
                "r": inst.r.to_string(),
                "s": inst.s.to_string(),
            })
        }
    })
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diskmod::certificates::ClassTag;
use diskmod::config::RunConfig;
use diskmod::report::{self, emit_plot_data, Report};

#[derive(Parser)]
#[command(name = "diskmod", version, about = "Modulus-approximation certificates over the disk algebra")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Boundary grid size (power of two).
    #[arg(long = "n", global = true, default_value_t = 1024)]
    grid_n: usize,
    #[arg(long, global = true, default_value_t = 4)]
    oversample: usize,
    #[arg(long, global = true, default_value_t = 4096)]
    max_degree: usize,
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    /// Directory for the JSON report and, with --csv, plot data.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON report on stdout (the default when --out is absent).
    #[arg(long, global = true)]
    json: bool,
    /// Write CSV plot data into --out.
    #[arg(long, global = true, requires = "out")]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tag {
    #[value(name = "Q", alias = "q")]
    Q,
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "R_E", alias = "re")]
    RE,
}

#[derive(Subcommand)]
enum Command {
    /// Outer function with boundary modulus f.
    Outer {
        /// Builtin weight name or JSON file.
        f: String,
    },
    /// Generate and verify a certificate for f.
    Certify {
        #[arg(long, value_enum)]
        tag: Tag,
        f: String,
        /// Comma-separated eps schedule (R_E only).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Vec<f64>,
        /// Comma-separated peak-set angles; `pi` is accepted (R_E only).
        #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
        peak: Vec<f64>,
    },
    /// Decide whether A f1 and A f2 are isometric.
    Isometry { f1: String, f2: String },
    /// Gleason-part distance, and with --g the two-point dichotomy.
    Gleason {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w1: [f64; 2],
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w2: [f64; 2],
        /// `exp` or a JSON analytic element.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        schedule: Vec<usize>,
    },
    /// Obstruction chain for a Morita candidate over a two-point algebra.
    MoritaTwoPoint {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w1: [f64; 2],
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        w2: [f64; 2],
        #[arg(long, default_value = "exp")]
        g: String,
        /// `even`, `subequivalence` or a JSON file with H and K lists.
        #[arg(long, default_value = "even")]
        candidate: String,
        #[arg(long)]
        c: f64,
    },
    /// Picard-group record of A f under a Mobius map.
    Picard {
        f: String,
        #[arg(long, value_parser = parse_point, default_value = "0", allow_hyphen_values = true)]
        a: [f64; 2],
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda_angle: f64,
    },
    /// Rerun the shipped examples against the golden reports.
    Corpus {
        #[arg(long, conflicts_with = "write")]
        check: bool,
        #[arg(long)]
        write: bool,
        #[arg(long, default_value = report::GOLDEN_DIR)]
        dir: PathBuf,
    },
}

fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let pi = std::f64::consts::PI;
    match t {
        "pi" => Ok(pi),
        "-pi" => Ok(-pi),
        _ => t.parse().map_err(|e| format!("bad angle '{s}': {e}")),
    }
}

/// `re` or `re,im` (also `re:im`).
fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split([',', ':']).collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad point '{s}': {e}"));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(format!("bad point '{s}': expected re or re,im")),
    }
}

fn config(g: &Global) -> RunConfig {
    RunConfig {
        grid_n: g.grid_n,
        oversample: g.oversample,
        max_degree: g.max_degree,
        seed: g.seed,
        ..RunConfig::default()
    }
}

fn emit(report: &Report, g: &Global) -> Result<(), String> {
    let text = report.to_json_string();
    match &g.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
            let path = dir.join(format!("{}.json", report.command));
            std::fs::write(&path, &text).map_err(|e| e.to_string())?;
            if g.csv {
                emit_plot_data(report, dir).map_err(|e| e.to_string())?;
            }
            if g.json {
                print!("{text}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as INCONCLUSIVE
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = config(&cli.global);
    let report = match &cli.command {
        Command::Outer { f } => report::cmd_outer(f, &cfg),
        Command::Certify { tag, f, eps, peak } => {
            let tag = match tag {
                Tag::Q => ClassTag::Q,
                Tag::M => ClassTag::MTight,
                Tag::RE => ClassTag::RE,
            };
            let peak = (!peak.is_empty()).then_some(peak.as_slice());
            report::cmd_certify(tag, f, eps, peak, &cfg)
        }
        Command::Isometry { f1, f2 } => report::cmd_isometry(f1, f2, &cfg),
        Command::Gleason { w1, w2, g, schedule } => report::cmd_gleason(*w1, *w2, g.as_deref(), schedule, &cfg),
        Command::MoritaTwoPoint { w1, w2, g, candidate, c } => {
            report::cmd_morita_two_point(*w1, *w2, g, candidate, *c, &cfg)
        }
        Command::Picard { f, a, lambda_angle } => report::cmd_picard(f, *a, *lambda_angle, &cfg),
        Command::Corpus { check: _, write, dir } => {
            return match report::run_corpus(dir, *write) {
                Ok(entries) => {
                    let mut ok = true;
                    for e in &entries {
                        let status = match e.matches_golden {
                            None => "written",
                            Some(true) => "match",
                            Some(false) => {
                                ok = false;
                                "MISMATCH"
                            }
                        };
                        println!("{:<34} {:<12} {}", e.name, format!("{:?}", e.outcome), status);
                    }
                    if ok { ExitCode::SUCCESS } else { ExitCode::from(3) }
                }
                Err(e) => {
                    eprintln!("corpus: {e}");
                    ExitCode::from(4)
                }
            };
        }
    };
    if let Err(e) = emit(&report, &cli.global) {
        eprintln!("could not write report: {e}");
        return ExitCode::from(4);
    }
    ExitCode::from(report.outcome.exit_code() as u8)
}

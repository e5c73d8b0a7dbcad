use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use ph_metric::inclusion::{build_injection, verify_inclusion};
use ph_metric::persistence::{barcode, BarcodeJson};
use ph_metric::pipeline::analyze;
use ph_metric::verify::{self, Family, FuzzConfig};
use ph_metric::{DistanceKind, Filtration, Graph, IngestOptions, Matrix, NoteSequence};

/// Path-based distances and persistent homology on music graphs.
#[derive(Parser)]
#[command(name = "ph-metric-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a weighted graph from a note sequence (CSV or JSON).
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        ingest: IngestFlags,
    },
    /// Compute one all-pairs distance matrix.
    Dist {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        kind: DistanceKind,
        #[arg(long)]
        out: PathBuf,
        /// Also write a float copy for plotting.
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Persistence barcode of a distance matrix.
    Ph {
        /// Matrix CSV written by `dist`.
        #[arg(long, conflicts_with = "graph", required_unless_present = "graph")]
        matrix: Option<PathBuf>,
        /// Compute the matrix from a graph instead.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        kind: DistanceKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        diagram: Option<PathBuf>,
        /// Write the ordered filtration, one simplex per line.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Compare the d2, d3 and d1 barcodes of one graph.
    Compare {
        #[arg(long)]
        d1: PathBuf,
        #[arg(long)]
        d2: PathBuf,
        #[arg(long)]
        d3: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overlay diagram CSV: `type,kind,birth,death`.
        #[arg(long)]
        combined: Option<PathBuf>,
    },
    /// Run every stage and write all outputs into one directory.
    Pipeline {
        /// Note sequence to ingest.
        #[arg(
            long = "in",
            conflicts_with = "graph",
            required_unless_present = "graph"
        )]
        input: Option<PathBuf>,
        /// Start from a graph JSON instead.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        ingest: IngestFlags,
    },
    /// Check all invariants on random graphs.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value = "all")]
        family: Family,
        #[arg(long, default_value_t = 4)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Write the report and any counterexamples here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IngestFlags {
    /// Drop rest events; no edge crosses a dropped rest.
    #[arg(long)]
    drop_rests: bool,
    /// Keep the largest connected component instead of failing.
    #[arg(long)]
    largest_component: bool,
}

impl IngestFlags {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            drop_rests: self.drop_rests,
            largest_component: self.largest_component,
        }
    }
}

enum Outcome {
    Ok,
    Violated,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::from_json(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn ingest(path: &Path, flags: &IngestFlags) -> Result<Graph> {
    let seq = NoteSequence::from_path(path)
        .with_context(|| format!("reading notes {}", path.display()))?;
    let g: Graph = seq.build_graph(flags.options())?;
    info!(
        "{} events -> {} nodes, {} edges",
        seq.len(),
        g.vertex_count(),
        g.edge_count()
    );
    Ok(g)
}

fn load_barcode(path: &Path, kind: DistanceKind) -> Result<ph_metric::Barcode> {
    let doc = BarcodeJson::from_json(&read(path)?)
        .with_context(|| format!("parsing barcode {}", path.display()))?;
    if doc.kind.is_some_and(|k| k != kind) {
        bail!(
            "{} holds a {} barcode, expected {kind}",
            path.display(),
            doc.kind.unwrap()
        );
    }
    Ok(doc.to_barcode()?)
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Ingest {
            input,
            out,
            ingest: flags,
        } => {
            write(&out, &ingest(&input, &flags)?.to_json())?;
        }
        Command::Dist {
            graph,
            kind,
            out,
            heatmap,
        } => {
            let m = Matrix::compute(&load_graph(&graph)?, kind)?;
            write(&out, &m.to_csv())?;
            if let Some(h) = heatmap {
                write(&h, &m.to_heatmap_csv())?;
            }
        }
        Command::Ph {
            matrix,
            graph,
            kind,
            out,
            diagram,
            dump,
        } => {
            let m = match (matrix, graph) {
                (Some(path), _) => Matrix::from_csv(read(&path)?.as_bytes(), Some(kind))
                    .with_context(|| format!("parsing matrix {}", path.display()))?,
                (None, Some(path)) => Matrix::compute(&load_graph(&path)?, kind)?,
                (None, None) => bail!("one of --matrix or --graph is required"),
            };
            let b = barcode(&m);
            write(&out, &b.to_json())?;
            if let Some(d) = diagram {
                write(&d, &b.to_diagram_csv())?;
            }
            if let Some(d) = dump {
                write(&d, &Filtration::build(&m).dump())?;
            }
        }
        Command::Compare {
            d1,
            d2,
            d3,
            out,
            combined,
        } => {
            let b1 = load_barcode(&d1, DistanceKind::D1)?;
            let b2 = load_barcode(&d2, DistanceKind::D2)?;
            let b3 = load_barcode(&d3, DistanceKind::D3)?;
            let inclusion = verify_inclusion(&b2, &b3, &b1)?;
            let report = match build_injection(&b2, &b3, &b1) {
                Ok(r) => r,
                Err(e @ ph_metric::Error::UnmatchedPair(..)) => {
                    eprintln!("invariant violated: {e}");
                    return Ok(Outcome::Violated);
                }
                Err(e) => return Err(e.into()),
            };
            write(&out, &report.to_json())?;
            if let Some(c) = combined {
                write(&c, &report.to_combined_csv())?;
            }
            let [c2, c3, c1] = inclusion.cardinalities;
            println!("H1 bars: d2={c2} d3={c3} d1={c1}");
            if !inclusion.holds() || !report.is_clean() {
                for v in &report.violations {
                    eprintln!("invariant violated at {:?}: {}", v.birth_edge, v.message);
                }
                if !inclusion.holds() {
                    eprintln!(
                        "invariant violated: birth edges B2\\B3={:?} B3\\B1={:?}",
                        inclusion.b2_not_in_b3, inclusion.b3_not_in_b1
                    );
                }
                return Ok(Outcome::Violated);
            }
        }
        Command::Pipeline {
            input,
            graph,
            out_dir,
            ingest: flags,
        } => {
            let g = match (input, graph) {
                (Some(path), _) => ingest(&path, &flags)?,
                (None, Some(path)) => load_graph(&path)?,
                (None, None) => bail!("one of --in or --graph is required"),
            };
            let a = analyze(&g)?;
            a.write_to(&out_dir)
                .with_context(|| format!("writing outputs to {}", out_dir.display()))?;
            for (kind, r) in &a.metric {
                if !r.is_metric {
                    info!(
                        "{kind}: {} triangle inequality violations",
                        r.triangle_violations.len()
                    );
                }
            }
            if !a.violations.is_empty() {
                for v in &a.violations {
                    eprintln!("invariant violated: {v}");
                }
                return Ok(Outcome::Violated);
            }
        }
        Command::Verify {
            seed,
            trials,
            family,
            n_min,
            n_max,
            out_dir,
        } => {
            if n_min < 2 || n_max < n_min {
                bail!("need 2 <= --n-min <= --n-max");
            }
            let cfg = FuzzConfig {
                seed,
                trials: trials as usize,
                family,
                n_min,
                n_max,
                ..FuzzConfig::default()
            };
            let report = verify::run(&cfg);
            println!(
                "seed {seed}: {} of {} trials passed (H1 bars d2={} d3={} d1={})",
                report.passed, cfg.trials, report.h1_bars[0], report.h1_bars[1], report.h1_bars[2]
            );
            if let Some(dir) = &out_dir {
                write(&dir.join("verify_report.json"), &report.to_json())?;
                for f in &report.failed {
                    let name = format!("counterexample_{}.json", f.trial);
                    write(&dir.join(name), &f.counterexample.to_json())?;
                }
            }
            if !report.is_clean() {
                for f in &report.failed {
                    warn!("trial {} ({}) failed", f.trial, f.family);
                    for msg in &f.failures {
                        eprintln!("invariant violated in trial {}: {msg}", f.trial);
                    }
                }
                return Ok(Outcome::Violated);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

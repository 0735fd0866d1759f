//! `rsa`: command-line front end for the rsa-toolkit pipeline.
//!
//! Errors go to stderr as one JSON object per line. Exit codes: 0 success,
//! 2 usage, 3 data or validation, 4 I/O.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rsa_toolkit::io::{self, matrix::format_value, DendrogramFormat};
use rsa_toolkit::*;

#[derive(Parser)]
#[command(name = "rsa", version, about = "Representation similarity analysis for task-specific models")]
struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on this.
    #[arg(long, global = true, env = "RSA_JOBS", default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one RDM CSV per feature file.
    Rdm {
        #[arg(long, num_args = 1.., required = true)]
        features: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Degenerate::Error)]
        degenerate: Degenerate,
    },
    /// Build the task similarity matrix from RDM CSVs.
    Simmat {
        #[arg(long, num_args = 1.., required = true)]
        rdm: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster a similarity matrix into a dendrogram.
    Cluster {
        #[arg(long)]
        simmat: PathBuf,
        #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
        linkage: LinkageArg,
        /// Output file; `.json` selects JSON, anything else Newick.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Also write `<out stem>.clusters.csv` with this many clusters.
        #[arg(long)]
        cut: Option<usize>,
    },
    /// Rank candidate models by RDM similarity to a probe.
    Rank {
        #[arg(long)]
        probe_rdm: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        candidates: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, requires = "topk")]
        affinity: Option<PathBuf>,
        #[arg(long, requires = "affinity")]
        topk: Option<usize>,
    },
    /// Generate synthetic feature files from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Degenerate {
    Error,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkageArg {
    Average,
    Complete,
    Single,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Newick,
    Json,
}

/// A library error tagged with the file it came from.
struct Failure {
    error: Error,
    file: Option<PathBuf>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Self { error, file: None }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

trait WithFile<T> {
    fn file(self, path: &Path) -> Result<T, Failure>;
}

impl<T> WithFile<T> for Result<T> {
    fn file(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|error| Failure {
            error,
            file: Some(path.to_path_buf()),
        })
    }
}

fn report(class: &str, code: &str, message: &str, file: Option<&Path>) {
    let mut obj = serde_json::json!({ "class": class, "code": code, "message": message });
    if let Some(f) = file {
        obj["file"] = f.display().to_string().into();
    }
    eprintln!("{obj}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            report("usage", "usage", first.trim_start_matches("error: "), None);
            return ExitCode::from(2);
        }
    };
    if cli.jobs > 0 {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (class, code) = match f.error.class() {
                ErrorClass::Data => ("data", 3),
                ErrorClass::Io => ("io", 4),
            };
            report(class, f.error.code(), &f.error.to_string(), f.file.as_deref());
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Rdm {
            features,
            out_dir,
            degenerate,
        } => cmd_rdm(&features, &out_dir, degenerate),
        Command::Simmat { rdm, out } => cmd_simmat(&rdm, &out),
        Command::Cluster {
            simmat,
            linkage,
            out,
            format,
            cut,
        } => cmd_cluster(&simmat, linkage, &out, format, cut),
        Command::Rank {
            probe_rdm,
            candidates,
            out,
            affinity,
            topk,
        } => cmd_rank(&probe_rdm, &candidates, &out, affinity.as_deref().zip(topk)),
        Command::Synth { spec, out_dir } => cmd_synth(&spec, &out_dir),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_rdm(features: &[PathBuf], out_dir: &Path, degenerate: Degenerate) -> Result<(), Failure> {
    let policy = match degenerate {
        Degenerate::Error => DegeneratePolicy::Error,
        Degenerate::Max => DegeneratePolicy::MaxDissimilarity,
    };
    let mut targets = HashSet::new();
    for path in features {
        let name = format!("{}.rdm.csv", file_stem(path));
        if !targets.insert(name.clone()) {
            return Err(Error::InvalidInput(format!("two inputs map to the same output `{name}`"))).file(path);
        }
    }

    let results: Vec<Result<Rdm64, Failure>> = features
        .par_iter()
        .map(|path| {
            let fm: FeatureMatrix64 = io::read_features(path).file(path)?;
            compute_rdm(&fm, policy).file(path)
        })
        .collect();

    let mut rdms = Vec::with_capacity(results.len());
    for r in results {
        rdms.push(r?);
    }
    std::fs::create_dir_all(out_dir)?;
    for (path, rdm) in features.iter().zip(&rdms) {
        if !rdm.degenerate_conditions().is_empty() {
            let warning = serde_json::json!({
                "warning": "degenerate_conditions",
                "file": path.display().to_string(),
                "conditions": rdm.degenerate_conditions(),
            });
            eprintln!("{warning}");
        }
        let out = out_dir.join(format!("{}.rdm.csv", file_stem(path)));
        io::write_rdm(rdm, &out).file(&out)?;
    }
    Ok(())
}

fn read_rdms(paths: &[PathBuf]) -> Result<Vec<Rdm64>, Failure> {
    paths.iter().map(|p| io::read_rdm(p).file(p)).collect()
}

fn cmd_simmat(paths: &[PathBuf], out: &Path) -> Result<(), Failure> {
    let rdms = read_rdms(paths)?;
    let sim = similarity_matrix(&rdms)?;
    io::write_similarity(&sim, out).file(out)
}

fn cmd_cluster(
    simmat: &Path,
    linkage: LinkageArg,
    out: &Path,
    format: Option<FormatArg>,
    k: Option<usize>,
) -> Result<(), Failure> {
    let sim: SimilarityMatrix64 = io::read_similarity(simmat).file(simmat)?;
    let linkage = match linkage {
        LinkageArg::Average => Linkage::Average,
        LinkageArg::Complete => Linkage::Complete,
        LinkageArg::Single => Linkage::Single,
    };
    let dend = cluster(&sim, linkage).file(simmat)?;
    let format = match format {
        Some(FormatArg::Newick) => DendrogramFormat::Newick,
        Some(FormatArg::Json) => DendrogramFormat::Json,
        None if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => DendrogramFormat::Json,
        None => DendrogramFormat::Newick,
    };
    // Validate the cut before writing anything.
    let labels = k.map(|k| cut(&dend, k)).transpose()?;
    io::write_dendrogram(&dend, out, format).file(out)?;
    if let Some(labels) = labels {
        let path = out.with_file_name(format!("{}.clusters.csv", file_stem(out)));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_failure(e, &path))?;
        let rows = std::iter::once(["task".to_string(), "cluster".to_string()])
            .chain(labels.iter().map(|(t, c)| [t.to_string(), c.to_string()]));
        for row in rows {
            w.write_record(&row).map_err(|e| csv_failure(e, &path))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn csv_failure(e: csv::Error, path: &Path) -> Failure {
    Failure {
        error: Error::Io(e.into()),
        file: Some(path.to_path_buf()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_rank(
    probe: &Path,
    candidates: &[PathBuf],
    out: &Path,
    agreement: Option<(&Path, usize)>,
) -> Result<(), Failure> {
    let probe_rdm: Rdm64 = io::read_rdm(probe).file(probe)?;
    let rdms = read_rdms(candidates)?;
    let ranking = rank_by_similarity(&probe_rdm, &rdms)?;

    let mut text = String::from("task,score,rank\n");
    for (i, (task, score)) in ranking.ordered().iter().enumerate() {
        writeln!(text, "{},{},{}", csv_field(task.as_str()), format_value(*score), i + 1).unwrap();
    }
    if let Some((path, k)) = agreement {
        let table: AffinityTable64 = io::read_affinity(path).file(path)?;
        let agrees = topk_agreement(&ranking, &table, k).file(path)?;
        let transfer = table.oriented_ranking();
        let pearson = ranking_correlation(&ranking, &transfer, Method::Pearson).file(path)?;
        let spearman = ranking_correlation(&ranking, &transfer, Method::Spearman).file(path)?;
        writeln!(text, "topk_agreement,{k},{agrees}").unwrap();
        writeln!(text, "ranking_correlation,pearson,{}", format_value(pearson)).unwrap();
        writeln!(text, "ranking_correlation,spearman,{}", format_value(spearman)).unwrap();
    }
    std::fs::write(out, text).map_err(Error::from).file(out)
}

/// Task names become file names: anything outside `[A-Za-z0-9._-]` turns into `_`.
fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect()
}

fn cmd_synth(spec_path: &Path, out_dir: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(Error::from)
        .file(spec_path)?;
    let spec = SyntheticSpec::from_json(&text).file(spec_path)?;
    let mut names = HashSet::new();
    for (task, _) in spec.task_groups() {
        if !names.insert(sanitize(&task)) {
            return Err(Error::InvalidInput(format!("task `{task}` collides with another after file-name sanitizing")))
                .file(spec_path);
        }
    }
    let features: Vec<FeatureMatrix64> = generate(&spec).file(spec_path)?;
    std::fs::create_dir_all(out_dir)?;
    for fm in &features {
        let path = out_dir.join(format!("{}.rsaf", sanitize(fm.task().as_str())));
        io::write_features(fm, &path).file(&path)?;
    }
    Ok(())
}

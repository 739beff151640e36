use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use windqnn::circuit::{build_ansatz, build_z_feature_map, build_zz_feature_map};
use windqnn::data::{generate_synthetic, CsvSchema, N_FEATURES};
use windqnn::experiment::{run_experiment, ExperimentConfig, Stage};
use windqnn::qnn::{FeatureMapKind, QnnConfigId, QnnSettings};
use windqnn::report::{read_run_artifact, render_outputs, results_markdown, ExperimentReport};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_TRAINING: u8 = 4;

#[derive(Parser)]
#[command(
    name = "windqnn",
    version,
    about = "QNN and classical regressors for wind power prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic dataset in the ingestion CSV schema.
    GenData {
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the gate listing of a QNN configuration.
    InspectCircuit {
        /// QNN-1 .. QNN-12
        config_id: String,
        /// Read circuit settings from the [qnn] section of this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-render results.md and the SVG charts from a run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn print_summary(report: &ExperimentReport) {
    println!(
        "{:<8} {:<4} {:<20} {:>8} {:>10} {:>9}  status",
        "method", "map", "ansatz", "r2", "mae_kW", "time_s"
    );
    for m in &report.methods {
        println!(
            "{:<8} {:<4} {:<20} {:>8.4} {:>10.2} {:>9.2}  {}",
            m.config_id, m.feature_map, m.ansatz, m.r2, m.mae, m.wall_time_s, m.status
        );
    }
    for f in &report.failures {
        println!("{:<8} FAILED: {}", f.config_id, f.message);
    }
}

fn cmd_run(config: PathBuf) -> ExitCode {
    let config = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: config stage failed: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run_experiment(&config) {
        Ok(outcome) => {
            print_summary(&outcome.report);
            if outcome.dropped_rows > 0 {
                println!("dropped {} malformed input rows", outcome.dropped_rows);
            }
            println!("artifacts: {}", outcome.run_dir.display());
            if outcome.report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_TRAINING)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.stage {
                Stage::Config => EXIT_CONFIG,
                Stage::Load | Stage::Split | Stage::Scale => EXIT_DATA,
                Stage::Train | Stage::Evaluate => EXIT_TRAINING,
                Stage::Report => EXIT_FAILURE,
            })
        }
    }
}

fn cmd_gen_data(rows: usize, seed: u64, out: PathBuf) -> ExitCode {
    if rows == 0 {
        return usage_error("--rows must be at least 1");
    }
    let result =
        generate_synthetic(rows, seed).and_then(|d| d.write_csv(&out, &CsvSchema::default()));
    match result {
        Ok(()) => {
            println!("wrote {rows} rows to {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: gen-data failed: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn cmd_inspect_circuit(config_id: &str, config: Option<PathBuf>) -> ExitCode {
    let Ok(id) = config_id.parse::<QnnConfigId>() else {
        let valid: Vec<String> = QnnConfigId::all().map(|c| c.to_string()).collect();
        return usage_error(format!(
            "unknown config id `{config_id}`; valid ids: {}",
            valid.join(", ")
        ));
    };
    let settings = match config {
        Some(path) => match ExperimentConfig::load(&path) {
            Ok(c) => c.qnn,
            Err(e) => return usage_error(e),
        },
        None => QnnSettings::default(),
    };
    let n = N_FEATURES;
    let (map, entanglement) = match id.feature_map() {
        FeatureMapKind::Z => (
            build_z_feature_map(n, settings.feature_map_reps),
            String::new(),
        ),
        FeatureMapKind::Zz => (
            build_zz_feature_map(n, settings.feature_map_reps, settings.zz_entanglement),
            format!(", {} entanglement", settings.zz_entanglement.name()),
        ),
    };
    let ansatz = build_ansatz(n, settings.ansatz_reps, id.ansatz());
    let (map, ansatz) = match (map, ansatz) {
        (Ok(m), Ok(a)) => (m, a),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{id}: {} feature map + {} ansatz on {n} qubits",
        id.feature_map(),
        id.ansatz().name()
    );
    let _ = writeln!(
        out,
        "\n[feature map: {}, reps {}{entanglement}]",
        id.feature_map(),
        settings.feature_map_reps
    );
    out.push_str(&map.render());
    let _ = writeln!(
        out,
        "\n[ansatz: {}, reps {}]",
        id.ansatz().name(),
        settings.ansatz_reps
    );
    out.push_str(&ansatz.render());
    let gates = map.gates().len() + ansatz.gates().len();
    let _ = writeln!(
        out,
        "\ngates: {gates} (feature map {}, ansatz {})",
        map.gates().len(),
        ansatz.gates().len()
    );
    let _ = writeln!(out, "cx gates: {}", map.count_cx() + ansatz.count_cx());
    let _ = writeln!(out, "parameters: {}", ansatz.n_parameter_slots());
    let _ = writeln!(out, "features: {}", map.n_feature_slots());
    let _ = std::io::stdout().write_all(out.as_bytes());
    ExitCode::SUCCESS
}

fn cmd_report(run_dir: PathBuf) -> ExitCode {
    let report = match read_run_artifact(&run_dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: report stage failed: {e}");
            return ExitCode::from(EXIT_DATA);
        }
    };
    if let Err(e) = render_outputs(&report, &run_dir) {
        eprintln!("error: report stage failed: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    let _ = std::io::stdout().write_all(results_markdown(&report).as_bytes());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => cmd_run(config),
        Command::GenData { rows, seed, out } => cmd_gen_data(rows, seed, out),
        Command::InspectCircuit { config_id, config } => cmd_inspect_circuit(&config_id, config),
        Command::Report { run_dir } => cmd_report(run_dir),
    }
}

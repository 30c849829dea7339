use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use v2vsound::config::sha256_hex;
use v2vsound::error::{Error, Result};
use v2vsound::presets::resolve_scenario;
use v2vsound::process::{process, ProcessOptions};
use v2vsound::run::RunManifest;
use v2vsound::session;
use v2vsound::simulate::{simulate, SimulateOptions};
use v2vsound::validate::{validate, ValidateOptions, DEFAULT_TOLERANCE};
use v2vsound_core::record::CaptureMode;

#[derive(Parser)]
#[command(name = "v2vsound", version, about = "Simulated 28 GHz V2V directional channel sounder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cir,
    FullDwell,
}

impl From<Mode> for CaptureMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Cir => CaptureMode::Cir,
            Mode::FullDwell => CaptureMode::FullDwell,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a recording session from a scenario.
    Simulate {
        /// Scenario file, or the name of a built-in preset.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        duration_s: f64,
        /// Override the scenario's sweep repetition rate.
        #[arg(long)]
        sweep_rate_hz: Option<f64>,
        /// Override the scenario's capture mode.
        #[arg(long, value_enum)]
        capture_mode: Option<Mode>,
        /// Session directory to create.
        #[arg(long)]
        out: PathBuf,
        /// Drop a datagram of this frame in transit (repeatable).
        #[arg(long = "drop-frame")]
        drop_frames: Vec<u32>,
    },
    /// Estimate CIRs from a session and write the CSV reports.
    Process {
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Detection threshold above the noise floor, dB.
        #[arg(long)]
        threshold_db: Option<f64>,
        /// Sweep used for the stacked CIRs.
        #[arg(long, default_value_t = 0)]
        stack_sweep: usize,
    },
    /// Run the built-in self-tests.
    Validate {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Directory of golden files to check against instead of the built-in set.
        #[arg(long)]
        goldens: Option<PathBuf>,
        /// Also write the report and run manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cmd: Command) -> Result<()> {
    let start = Instant::now();
    match cmd {
        Command::Simulate {
            scenario,
            seed,
            duration_s,
            sweep_rate_hz,
            capture_mode,
            out,
            drop_frames,
        } => {
            let s = resolve_scenario(&scenario)?;
            let opts = SimulateOptions {
                seed,
                duration_s,
                repetition_hz: sweep_rate_hz,
                capture_mode: capture_mode.map(Into::into),
                drop_frames: drop_frames.iter().copied().collect(),
                ..Default::default()
            };
            let m = simulate(&s, &opts, &out)?;
            println!(
                "{}: {} sweeps, {} frames ({} bytes), {} lost",
                out.display(),
                m.sweeps,
                m.frame_count,
                m.byte_count,
                m.lost_frames.len()
            );
            let mut run = RunManifest::new("simulate")
                .param("duration_s", duration_s)
                .param("repetition_hz", m.sweep.repetition_hz)
                .param("capture_mode", format!("{:?}", m.sweep.capture_mode))
                .param("payload_bytes", opts.payload_bytes);
            if !drop_frames.is_empty() {
                let ids: Vec<String> = drop_frames.iter().map(u32::to_string).collect();
                run = run.param("drop_frames", ids.join(","));
            }
            run.config_path = Some(scenario);
            run.config_hash = Some(sha256_hex(s.source.as_bytes()));
            run.scene_hash = Some(s.scene_hash());
            run.seed = Some(seed);
            run.outputs = [
                session::MANIFEST_FILE,
                session::FRAMES_FILE,
                session::TRUTH_FILE,
                session::SCENARIO_FILE,
            ]
            .map(String::from)
            .to_vec();
            if out.join(session::DRIVE_STATS_FILE).is_file() {
                run.outputs.push(session::DRIVE_STATS_FILE.into());
            }
            run.wall_time_s = start.elapsed().as_secs_f64();
            run.write(&out)
        }
        Command::Process {
            session: dir,
            out,
            threshold_db,
            stack_sweep,
        } => {
            let opts = ProcessOptions {
                threshold_db,
                stack_sweep,
                ..Default::default()
            };
            let r = process(&dir, &out, &opts)?;
            println!(
                "{}: {} of {} frames processed, {} lost",
                out.display(),
                r.frames_processed,
                r.frames_expected,
                r.lost_count
            );
            if !r.lost_frames.is_empty() {
                let ids: Vec<String> = r.lost_frames.iter().map(u32::to_string).collect();
                eprintln!("warning: lost frames {}", ids.join(","));
            }
            if !r.corrupt_blocks.is_empty() {
                eprintln!("warning: {} corrupt frame blocks skipped", r.corrupt_blocks.len());
            }
            let mut run = RunManifest::new("process")
                .param("session", dir.display())
                .param("detection_threshold_db", r.detection_threshold_db)
                .param("stack_sweep", stack_sweep)
                .param("delay_spread_threshold_db", opts.delay_spread_threshold_db);
            run.outputs = r.outputs.clone();
            run.wall_time_s = start.elapsed().as_secs_f64();
            run.write(&out)
        }
        Command::Validate { tolerance, goldens, out } => {
            let r = validate(&ValidateOptions {
                tolerance,
                goldens: goldens.clone(),
            })?;
            for c in &r.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("tolerance {:e}", r.tolerance);
            if let Some(out) = out {
                session::create_dir(&out)?;
                session::write_json(&out.join("validate.json"), &r)?;
                let mut run = RunManifest::new("validate").param("tolerance", tolerance);
                if let Some(g) = &goldens {
                    run = run.param("goldens", g.display());
                }
                run.outputs = vec!["validate.json".into()];
                run.wall_time_s = start.elapsed().as_secs_f64();
                run.write(&out)?;
            }
            if r.passed {
                Ok(())
            } else {
                let names: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
                Err(Error::Validation(names.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Implementations of the workbench subcommands.

use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use y00_core::cryptanalysis::{CipherMode, CipherScenario, RecoveryResult, Scorer, SAMPLE_ENGLISH};
use y00_core::experiments::{
    default_alpha_grid, microscopic_threshold_alpha_sq, run_alpha_sweep, run_attack_experiment,
    run_key_recovery, run_paired_sessions,
};
use y00_core::eve::{detection_stats, RelationReport};
use y00_core::optics::{n_sigma, overlap};
use y00_core::session::{bob_error_count, run_session, write_transcript};
use y00_core::wheel::BaseClass;

use crate::config::{parse_mode, resolve, AuditArgs, Params, RecoverArgs, RunArgs, SweepArgs};
use crate::CliError;

fn init_workers(workers: usize) -> Result<(), CliError> {
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("cannot size worker pool: {e}")))?;
    }
    Ok(())
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(y00_core::Error::from)?;
    println!("{text}");
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut out = create_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(y00_core::Error::from)?;
    out.write_all(b"\n").map_err(y00_core::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct ParamsSummary {
    m: u32,
    alpha2: f64,
    n: usize,
    seed: u64,
    noiseless: bool,
    channel_noise: f64,
}

impl ParamsSummary {
    fn of(params: &Params) -> Self {
        ParamsSummary {
            m: params.m,
            alpha2: params.alpha2,
            n: params.n,
            seed: params.seed,
            noiseless: params.noiseless,
            channel_noise: params.channel_noise,
        }
    }
}

pub fn simulate(args: RunArgs) -> Result<(), CliError> {
    let (params, _) = resolve(&args.common)?;
    init_workers(params.workers)?;
    let cfg = params.session_config(params.n)?;
    let transcript = run_session(&cfg, None)?;
    let path = params.out.clone().unwrap_or_else(|| PathBuf::from("transcript.jsonl"));
    let mut out = create_output(&path)?;
    write_transcript(&mut out, &transcript)?;
    out.flush().map_err(y00_core::Error::from)?;

    #[derive(Serialize)]
    struct Summary {
        #[serde(flatten)]
        params: ParamsSummary,
        bob_errors: usize,
        bob_ber: f64,
        transcript: PathBuf,
    }
    print_json(&Summary {
        params: ParamsSummary::of(&params),
        bob_errors: bob_error_count(&transcript),
        bob_ber: bob_error_count(&transcript) as f64 / transcript.len() as f64,
        transcript: path,
    })
}

pub fn attack(args: RunArgs) -> Result<(), CliError> {
    let (params, _) = resolve(&args.common)?;
    init_workers(params.workers)?;
    let cfg = params.session_config(params.n)?;
    let (report, attacked) = run_attack_experiment(&cfg)?;
    let path = params.out.clone().unwrap_or_else(|| PathBuf::from("attack_transcript.jsonl"));
    let mut out = create_output(&path)?;
    write_transcript(&mut out, &attacked)?;
    out.flush().map_err(y00_core::Error::from)?;

    #[derive(Serialize)]
    struct Summary {
        #[serde(flatten)]
        params: ParamsSummary,
        relation: RelationReport,
        bob_errors_with_eve: usize,
        bob_errors_without_eve: usize,
        z_statistic: f64,
        transcript: PathBuf,
    }
    print_json(&Summary {
        params: ParamsSummary::of(&params),
        relation: report.relation,
        bob_errors_with_eve: report.detection.bob_errors_with_eve,
        bob_errors_without_eve: report.detection.bob_errors_without_eve,
        z_statistic: report.detection.z_statistic,
        transcript: path,
    })
}

pub fn ber(args: RunArgs) -> Result<(), CliError> {
    let (params, _) = resolve(&args.common)?;
    init_workers(params.workers)?;
    let cfg = params.session_config(params.n)?;
    let (honest, attacked) = run_paired_sessions(&cfg)?;
    let stats = detection_stats(&attacked, &honest)?;

    #[derive(Serialize)]
    struct Summary {
        #[serde(flatten)]
        params: ParamsSummary,
        bob_errors_with_eve: usize,
        bob_errors_without_eve: usize,
        ber_with_eve: f64,
        ber_without_eve: f64,
        z_statistic: f64,
    }
    let summary = Summary {
        params: ParamsSummary::of(&params),
        bob_errors_with_eve: stats.bob_errors_with_eve,
        bob_errors_without_eve: stats.bob_errors_without_eve,
        ber_with_eve: stats.bob_errors_with_eve as f64 / stats.n as f64,
        ber_without_eve: stats.bob_errors_without_eve as f64 / stats.n as f64,
        z_statistic: stats.z_statistic,
    };
    if let Some(path) = &params.out {
        write_json(&summary, path)?;
    }
    print_json(&summary)
}

pub fn sweep_alpha(args: SweepArgs) -> Result<(), CliError> {
    let (params, file) = resolve(&args.common)?;
    init_workers(params.workers)?;
    let grid = args.grid.or(file.grid).unwrap_or_else(default_alpha_grid);
    let repetitions = args.repetitions.or(file.repetitions).unwrap_or(1);
    let base = params.session_config(params.n)?;
    let points = run_alpha_sweep(&base, &grid, repetitions)?;

    let path = params.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let out = create_output(&path)?;
    let mut writer = csv::Writer::from_writer(out);
    for point in &points {
        writer.serialize(point).map_err(|e| CliError::Runtime(format!("cannot write CSV: {e}")))?;
    }
    writer.flush().map_err(y00_core::Error::from)?;

    #[derive(Serialize)]
    struct Summary {
        rows: usize,
        grid_points: usize,
        repetitions: u32,
        threshold_alpha2: f64,
        csv: PathBuf,
    }
    print_json(&Summary {
        rows: points.len(),
        grid_points: grid.len(),
        repetitions,
        threshold_alpha2: microscopic_threshold_alpha_sq(),
        csv: path,
    })
}

pub fn recover_key(args: RecoverArgs) -> Result<(), CliError> {
    let (params, file) = resolve(&args.common)?;
    init_workers(params.workers)?;
    let mode = parse_mode(args.mode.as_deref().or(file.mode.as_deref()))?;
    let plaintext = match args.plaintext.or(file.plaintext) {
        Some(path) => std::fs::read(&path)
            .map_err(|e| CliError::Usage(format!("cannot read plaintext {}: {e}", path.display())))?,
        None => match mode {
            CipherMode::OneTimePad => SAMPLE_ENGLISH.to_vec(),
            CipherMode::Block => SAMPLE_ENGLISH[..128].to_vec(),
        },
    };
    let scenario = match mode {
        CipherMode::OneTimePad => CipherScenario::one_time_pad(plaintext)?,
        CipherMode::Block => CipherScenario::block(plaintext)?,
    };
    let scorer = match args.crib.or(file.crib) {
        Some(known) => Scorer::Crib { known: known.into_bytes() },
        None => Scorer::English,
    };
    let cfg = params.session_config(scenario.n_symbols())?;
    let outcome = run_key_recovery(&cfg, &scenario, &scorer, false)?;

    #[derive(Serialize)]
    struct Report {
        mode: CipherMode,
        planted_key: u64,
        planted_key_hex: String,
        recovered_key_hex: String,
        recovered_matches_planted: bool,
        relation_error: f64,
        #[serde(flatten)]
        recovery: RecoveryResult,
    }
    let report = Report {
        mode,
        planted_key: outcome.planted_key,
        planted_key_hex: format!("0x{:04X}", outcome.planted_key),
        recovered_key_hex: format!("0x{:04X}", outcome.recovered.recovered_key),
        recovered_matches_planted: outcome.recovered_matches_planted,
        relation_error: outcome.relation.error_rate,
        recovery: outcome.recovered,
    };
    if report.recovery.margin == 0.0 {
        eprintln!("note: top score was a tie; ranking broke it toward the smaller key");
    }
    if let Some(path) = &params.out {
        write_json(&report, path)?;
    }
    print_json(&report)
}

pub fn wheel_audit(args: AuditArgs) -> Result<(), CliError> {
    let (params, _) = resolve(&args.common)?;
    let wheel = params.wheel()?;
    let m = wheel.m();
    let seams = wheel.seam_pairs();
    let cut0 = wheel.cut_base(0)?;
    let sigma_states = n_sigma(m, wheel.amplitude())?;
    let cut_overlap = overlap(0, m / 2, m, wheel.amplitude())?;
    let class_table: Vec<u8> =
        (0..m).map(|k| wheel.classify_global(k).map(BaseClass::keystream_bit)).collect::<Result<_, _>>()?;

    // Full cross-check is O(M^2); stride the anchors past M = 4096 so the
    // audit stays interactive at any wheel size.
    let anchor_stride = (m / 4096).max(1);
    let mut checked = 0usize;
    let mut agreements = 0usize;
    for anchor in (0..m).step_by(anchor_stride as usize) {
        let cut = wheel.cut_base(anchor)?;
        for b in 0..m {
            if b == cut {
                continue;
            }
            checked += 1;
            if wheel.classify_local(b, anchor)? == wheel.classify_global(b)? {
                agreements += 1;
            }
        }
    }

    println!("wheel audit: M={m}, |α|²={}", params.alpha2);
    let seam_text: Vec<String> = seams.iter().map(|(a, b)| format!("({a}, {b})")).collect();
    println!("seam pairs: {}", seam_text.join(", "));
    println!("cut base of 0: {cut0}");
    println!("N_sigma: {sigma_states:.4} states inside one fluctuation width");
    println!("cut-base overlap: {cut_overlap:.6}");
    if m <= 64 {
        let classes: String =
            class_table.iter().map(|&bit| if bit == 0 { '+' } else { '-' }).collect();
        println!("classes (base 0..{}): {classes}", m - 1);
    } else {
        println!(
            "classes: {} C+ bases, {} C- bases (alternating)",
            class_table.iter().filter(|&&b| b == 0).count(),
            class_table.iter().filter(|&&b| b == 1).count()
        );
    }
    println!("local vs global classification: {agreements}/{checked} agree away from the cut");

    #[derive(Serialize)]
    struct Audit {
        m: u32,
        alpha2: f64,
        seam_pairs: Vec<(u32, u32)>,
        cut_base_of_0: u32,
        n_sigma: f64,
        cut_overlap: f64,
        class_table: Vec<u8>,
        local_global_checked: usize,
        local_global_agreements: usize,
    }
    if let Some(path) = &params.out {
        write_json(
            &Audit {
                m,
                alpha2: params.alpha2,
                seam_pairs: seams,
                cut_base_of_0: cut0,
                n_sigma: sigma_states,
                cut_overlap,
                class_table,
                local_global_checked: checked,
                local_global_agreements: agreements,
            },
            path,
        )?;
    }
    Ok(())
}

use std::fmt::Write as _;

use polar_overlap::channel::{info_bit_errors, simulate_frames, FerResult, Frame, NoiseSpec};
use polar_overlap::efficiency::{efficiency_csv, efficiency_table, FrameSettings};
use polar_overlap::latency_models::{
    overhead_table, k_for_rate, list_depth, overhead_for, plcas_bounds, OverheadRow,
};
use polar_overlap::list_decoder::{ListDecoder, ListSettings};
use polar_overlap::overlap_sim::{OverlapSimulator, Scheme};
use polar_overlap::polar_code::CodeConfig;
use polar_overlap::sc_kernel::{sc_decode, LlrMode};

use crate::config::ExperimentConfig;
use crate::CliError;

const MODE: LlrMode = LlrMode::MinSum;

fn single_code(cfg: &ExperimentConfig) -> Result<CodeConfig, CliError> {
    Ok(CodeConfig::bec(cfg.n, cfg.k()?)?)
}

struct FrameOutcome {
    sc_bits: u64,
    list_bits: u64,
    overhead: u64,
    mismatch: bool,
}

/// SC and overlapped list decoding on the same frames; the overlapped output
/// must equal the golden list decoder on every frame.
pub fn run_fer(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let code = single_code(cfg)?;
    let scheme = cfg.scheme.unwrap_or(Scheme::Plain);
    let sim = OverlapSimulator::new(&code, cfg.l, scheme, MODE)?;
    let mut settings = ListSettings::new(cfg.l, MODE);
    if let Scheme::Adaptive(g) = scheme {
        settings = settings.with_gamma(g);
    }
    let golden = ListDecoder::new(&code, settings)?;

    let mut out = String::from(
        "snr_db,decoder,n,k,l,scheme,frames,frame_errors,bit_errors,fer,ber,mean_overhead_cycles\n",
    );
    for &snr in &cfg.snrs {
        let spec = NoiseSpec::new(snr, code.rate(), cfg.seed)?;
        let outcomes = simulate_frames(&code, &spec, cfg.trials, |frame: &Frame| {
            let sc = sc_decode(&frame.llr, &code, MODE)?;
            let reference = golden.decode(&frame.llr)?.best;
            let overlapped = sim.run(&frame.llr)?;
            Ok(FrameOutcome {
                sc_bits: info_bit_errors(&code, &frame.message, &sc),
                list_bits: info_bit_errors(&code, &frame.message, &overlapped.decoded),
                overhead: overlapped.report.l_m,
                mismatch: reference != overlapped.decoded,
            })
        })?;
        if let Some(i) = outcomes.iter().position(|o| o.mismatch) {
            return Err(CliError::Equivalence(format!(
                "overlapped decoder differs from list decoder at {snr} dB, frame {i}"
            )));
        }
        let frames = outcomes.len() as u64;
        let tally = |bits: fn(&FrameOutcome) -> u64| {
            let errors = outcomes.iter().filter(|o| bits(o) > 0).count() as u64;
            let bit_errors = outcomes.iter().map(bits).sum();
            FerResult::from_counts(frames, errors, bit_errors, code.k())
        };
        let mean_overhead = outcomes.iter().map(|o| o.overhead).sum::<u64>() as f64 / frames as f64;
        for (name, l, scheme_name, result, overhead) in [
            ("sc", 1, "-".to_string(), tally(|o| o.sc_bits), 0.0),
            (
                "overlapped-lsc",
                cfg.l,
                scheme.to_string(),
                tally(|o| o.list_bits),
                mean_overhead,
            ),
        ] {
            let _ = writeln!(
                out,
                "{snr},{name},{},{},{l},{scheme_name},{},{},{},{:.6e},{:.6e},{overhead:.3}",
                code.n(),
                code.k(),
                result.frames,
                result.frame_errors,
                result.bit_errors,
                result.fer,
                result.ber
            );
        }
    }
    Ok(out)
}

fn mean_overhead(
    code: &CodeConfig,
    cfg: &ExperimentConfig,
    scheme: Scheme,
) -> Result<Vec<u64>, CliError> {
    let sim = OverlapSimulator::new(code, cfg.l, scheme, MODE)?;
    let spec = NoiseSpec::new(cfg.snrs[0], code.rate(), cfg.seed)?;
    Ok(simulate_frames(code, &spec, cfg.trials, |frame| {
        Ok(sim.run(&frame.llr)?.report.l_m)
    })?)
}

/// Closed-form overhead per rate and scheme, each cross-checked against the
/// simulator. Data-dependent schemes report the mean simulated overhead.
pub fn run_latency(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let schemes = match cfg.scheme {
        Some(s) => vec![s],
        None => vec![
            Scheme::Plain,
            Scheme::MultiDecision(cfg.m),
            Scheme::Irregular(None),
        ],
    };
    let fixed: Vec<Scheme> = schemes
        .iter()
        .copied()
        .filter(|s| !s.is_data_dependent())
        .collect();
    let rates = cfg.rates();
    let rows = overhead_table(cfg.n, cfg.l, &rates, &fixed)?;
    let depth = list_depth(cfg.l)?;

    let mut out = String::from("rate,scheme,k,l,m_or_S,overhead_cycles\n");
    let mut fixed_rows = rows.iter();
    for &rate in &rates {
        let code = CodeConfig::bec(cfg.n, k_for_rate(cfg.n, rate)?)?;
        for &scheme in &schemes {
            if scheme.is_data_dependent() {
                let overheads = mean_overhead(&code, cfg, scheme)?;
                if scheme == Scheme::Plcas {
                    let b = plcas_bounds(code.k(), cfg.l)?;
                    if let Some(o) = overheads.iter().find(|&&o| o < b.lower || o > b.upper) {
                        return Err(CliError::Equivalence(format!(
                            "PLCAS overhead {o} outside [{}, {}] at rate {rate}",
                            b.lower, b.upper
                        )));
                    }
                }
                let mean = overheads.iter().sum::<u64>() as f64 / overheads.len() as f64;
                let param = match scheme {
                    Scheme::Adaptive(g) => g.to_string(),
                    _ => "1".into(),
                };
                let _ = writeln!(
                    out,
                    "{rate},{scheme},{},{},{param},{mean:.3}",
                    code.k(),
                    cfg.l
                );
                continue;
            }
            let row: &OverheadRow = fixed_rows.next().expect("one row per fixed scheme");
            if code.k() > depth {
                cross_check(&code, cfg, row)?;
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.rate, row.scheme, row.k, row.l, row.m_or_s, row.overhead
            );
        }
    }
    Ok(out)
}

fn cross_check(code: &CodeConfig, cfg: &ExperimentConfig, row: &OverheadRow) -> Result<(), CliError> {
    let spec = NoiseSpec::new(cfg.snrs[0], code.rate(), cfg.seed)?;
    let frame = Frame::generate(code, &spec, 0);
    let simulated = OverlapSimulator::new(code, cfg.l, row.scheme, MODE)?
        .run(&frame.llr)?
        .report
        .l_m;
    let (_, formula) = overhead_for(code, cfg.l, row.scheme)?;
    let agrees = match row.scheme {
        Scheme::Irregular(_) => simulated <= formula,
        _ => simulated == formula,
    };
    if !agrees {
        return Err(CliError::Equivalence(format!(
            "{} at rate {}: simulated overhead {simulated}, closed form {formula}",
            row.scheme, row.rate
        )));
    }
    Ok(())
}

pub fn run_efficiency(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let schemes = match cfg.scheme {
        Some(s) => vec![s],
        None => vec![
            Scheme::Plain,
            Scheme::MultiDecision(cfg.m),
            Scheme::Irregular(None),
            Scheme::Plcas,
            Scheme::Adaptive(cfg.gamma),
        ],
    };
    let frames = FrameSettings {
        snr_db: cfg.snrs[0],
        frames: cfg.trials,
        seed: cfg.seed,
        mode: MODE,
    };
    let rows = efficiency_table(cfg.n, cfg.l, &cfg.rates(), &schemes, &cfg.area, &frames)?;
    Ok(efficiency_csv(&rows))
}

/// Timetable of frame 0 at the first SNR point.
pub fn run_trace(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let code = single_code(cfg)?;
    let scheme = cfg.scheme.unwrap_or(Scheme::Plain);
    let spec = NoiseSpec::new(cfg.snrs[0], code.rate(), cfg.seed)?;
    let frame = Frame::generate(&code, &spec, 0);
    let out = OverlapSimulator::new(&code, cfg.l, scheme, MODE)?.run(&frame.llr)?;
    let r = out.report;
    Ok(format!(
        "# total_cycles={} baseline_cycles={} l_p={} l_w={} l_m={} occupancy={:?}\n{}",
        r.total_cycles,
        r.baseline_cycles,
        r.l_p,
        r.l_w,
        r.l_m,
        out.diagnostics.max_occupancy,
        out.trace.to_csv()
    ))
}

//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure.

use std::time::Instant;

use polar_overlap::channel::{simulate_frames, Frame, NoiseSpec};
use polar_overlap::efficiency::{efficiency_table, AreaModel, FrameSettings};
use polar_overlap::fastssc::{classify, decompose};
use polar_overlap::latency_models::{
    k_for_rate, overhead_plain, overhead_regular_md, plcas_bounds,
};
use polar_overlap::list_decoder::lsc_decode;
use polar_overlap::overlap_sim::{build_stage_plan, simulate, OverlapSimulator, Scheme};
use polar_overlap::polar_code::{encode, CodeConfig, MessageWord};
use polar_overlap::sc_kernel::{sc_decode, LlrMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

const SWEEP_N: [usize; 5] = [8, 16, 64, 256, 1024];
const SWEEP_L: [usize; 3] = [2, 4, 8];
const SWEEP_RATES: [f64; 7] = [0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0];

/// `(n, k, l)` triples where the list fills before the last information bit.
fn sweep_points() -> Vec<(usize, usize, usize)> {
    let mut points = Vec::new();
    for n in SWEEP_N {
        for l in SWEEP_L {
            let depth = l.trailing_zeros() as usize;
            for rate in SWEEP_RATES {
                let k = k_for_rate(n, rate).unwrap();
                if k > depth {
                    points.push((n, k, l));
                }
            }
        }
    }
    points
}

fn one_frame(config: &CodeConfig, snr: f64, seed: u64, index: u64) -> Frame {
    let spec = NoiseSpec::new(snr, config.rate(), seed).unwrap();
    Frame::generate(config, &spec, index)
}

fn latency_identity() -> Outcome {
    let points = sweep_points();
    for (n, l) in SWEEP_N.iter().flat_map(|&n| SWEEP_L.map(|l| (n, l))) {
        let rates = points.iter().filter(|p| p.0 == n && p.2 == l).count();
        ensure(rates >= 5, || format!("n={n} l={l}: only {rates} rates"))?;
    }
    let checked: Vec<Result<(), String>> = points
        .par_iter()
        .map(|&(n, k, l)| {
            let cfg = CodeConfig::bec(n, k).map_err(err)?;
            let frame = one_frame(&cfg, 2.0, 11, (n * 31 + k) as u64);
            let schemes = [
                (Scheme::Plain, overhead_plain(k, l).map_err(err)?),
                (
                    Scheme::MultiDecision(4),
                    overhead_regular_md(k, l, 4).map_err(err)?,
                ),
            ];
            for (scheme, expected) in schemes {
                let out = simulate(&frame.llr, &cfg, l, scheme).map_err(err)?;
                ensure(out.report.l_m == expected, || {
                    format!(
                        "({n},{k}) l={l} {scheme}: simulated {} vs {expected}",
                        out.report.l_m
                    )
                })?;
            }
            Ok(())
        })
        .collect();
    checked.into_iter().collect::<Result<(), String>>()?;
    Ok(format!(
        "{} (n,k,l) points, plain and md4, exact",
        points.len()
    ))
}

fn spot_values() -> Outcome {
    let plain = overhead_plain(512, 4).map_err(err)?;
    let md4 = overhead_regular_md(512, 4, 4).map_err(err)?;
    ensure(plain == 1530 && md4 == 384, || {
        format!("closed form {plain}, {md4}")
    })?;
    let cfg = CodeConfig::bec(1024, 512).map_err(err)?;
    let frame = one_frame(&cfg, 2.0, 5, 0);
    let sim_plain = simulate(&frame.llr, &cfg, 4, Scheme::Plain)
        .map_err(err)?
        .report
        .l_m;
    let sim_md4 = simulate(&frame.llr, &cfg, 4, Scheme::MultiDecision(4))
        .map_err(err)?
        .report
        .l_m;
    ensure(sim_plain == 1530 && sim_md4 == 384, || {
        format!("simulator {sim_plain}, {sim_md4}")
    })?;
    Ok("plain 1530, md4 384 (closed form and simulator)".into())
}

fn bit_exact() -> Outcome {
    const FRAMES: u64 = 10_000;
    let mut total = 0u64;
    for n in [64, 128] {
        let cfg = CodeConfig::bec(n, n / 2).map_err(err)?;
        for l in [2, 4] {
            let sim =
                OverlapSimulator::new(&cfg, l, Scheme::Plain, LlrMode::MinSum).map_err(err)?;
            for snr in [1.0, 2.0, 3.0] {
                let spec = NoiseSpec::new(snr, cfg.rate(), 2024).map_err(err)?;
                let mismatches: u64 = simulate_frames(&cfg, &spec, FRAMES, |frame| {
                    let golden = lsc_decode(&frame.llr, &cfg, l, LlrMode::MinSum)?;
                    let overlapped = sim.run(&frame.llr)?;
                    Ok(u64::from(golden.best != overlapped.decoded))
                })
                .map_err(err)?
                .into_iter()
                .sum();
                ensure(mismatches == 0, || {
                    format!("n={n} l={l} {snr} dB: {mismatches} mismatches")
                })?;
                total += FRAMES;
            }
        }
    }
    Ok(format!("{total} frames, 0 mismatches"))
}

fn ml_oracle() -> Outcome {
    let cfg = CodeConfig::bec(8, 4).map_err(err)?;
    let codebook: Vec<(MessageWord, Vec<bool>)> = (0..16u32)
        .map(|w| {
            let info: Vec<bool> = (0..4).map(|b| w >> b & 1 == 1).collect();
            let u = cfg.message_from_info(&info).unwrap();
            let x = encode(&u, &cfg).unwrap().bits().to_vec();
            (u, x)
        })
        .collect();
    let mut frames = 0;
    let mut ties = 0;
    for (s, snr) in [-1.0, 0.0, 1.0, 2.0, 3.0].into_iter().enumerate() {
        for i in 0..250 {
            let frame = one_frame(&cfg, snr, 40 + s as u64, i);
            let llr = frame.llr.values();
            let mut scored: Vec<(f64, &MessageWord)> = codebook
                .iter()
                .map(|(u, x)| {
                    let corr: f64 = x
                        .iter()
                        .zip(llr)
                        .map(|(&b, &v)| if b { -v } else { v })
                        .sum();
                    (corr, u)
                })
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            frames += 1;
            if scored[0].0 - scored[1].0 < 1e-9 {
                ties += 1;
                continue;
            }
            let ml = scored[0].1;
            let decoded = lsc_decode(&frame.llr, &cfg, 16, LlrMode::Exact)
                .map_err(err)?
                .best;
            let ml_error = *ml != frame.message;
            let list_error = decoded != frame.message;
            ensure(decoded == *ml && ml_error == list_error, || {
                format!("{snr} dB frame {i}: list and ML disagree")
            })?;
        }
    }
    Ok(format!(
        "{frames} frames, 0 disagreements, {ties} tie events"
    ))
}

fn plcas_bounds_hold() -> Outcome {
    let mut frames = 0u64;
    for (n, k, l, snr) in [(256, 128, 4, 2.0), (128, 96, 8, 3.0), (1024, 512, 4, 1.5)] {
        let cfg = CodeConfig::bec(n, k).map_err(err)?;
        let bounds = plcas_bounds(k, l).map_err(err)?;
        let sim = OverlapSimulator::new(&cfg, l, Scheme::Plcas, LlrMode::MinSum).map_err(err)?;
        let spec = NoiseSpec::new(snr, cfg.rate(), 99).map_err(err)?;
        let trials = 1000;
        let outside: u64 = simulate_frames(&cfg, &spec, trials, |frame| {
            let lm = sim.run(&frame.llr)?.report.l_m;
            Ok(u64::from(lm < bounds.lower || lm > bounds.upper))
        })
        .map_err(err)?
        .into_iter()
        .sum();
        ensure(outside == 0, || {
            format!("({n},{k}) l={l}: {outside} frames out of bounds")
        })?;
        frames += trials;
    }
    Ok(format!("{frames} frames within [l-1, (k-log2 l)(l-1)]"))
}

fn list_beats_sc() -> Outcome {
    let cfg = CodeConfig::bec(1024, 512).map_err(err)?;
    let mut summary = Vec::new();
    for snr in [1.0, 1.5, 2.0, 2.5] {
        let spec = NoiseSpec::new(snr, cfg.rate(), 7).map_err(err)?;
        let counts = simulate_frames(&cfg, &spec, 10_000, |frame| {
            let sc = sc_decode(&frame.llr, &cfg, LlrMode::MinSum)?;
            let list = lsc_decode(&frame.llr, &cfg, 4, LlrMode::MinSum)?.best;
            Ok((
                u64::from(sc != frame.message),
                u64::from(list != frame.message),
            ))
        })
        .map_err(err)?;
        let sc_errors: u64 = counts.iter().map(|c| c.0).sum();
        let list_errors: u64 = counts.iter().map(|c| c.1).sum();
        ensure(list_errors <= sc_errors, || {
            format!("{snr} dB: list {list_errors} > SC {sc_errors} frame errors")
        })?;
        summary.push(format!("{snr}dB {list_errors}<={sc_errors}"));
    }
    Ok(format!(
        "10^4 paired frames per SNR: {}",
        summary.join(", ")
    ))
}

fn efficiency_properties() -> Outcome {
    let rates = [0.25, 0.4, 0.5, 0.6, 0.75, 0.9];
    let schemes = [
        Scheme::Plain,
        Scheme::MultiDecision(4),
        Scheme::Irregular(None),
        Scheme::Plcas,
        Scheme::Adaptive(3.0),
    ];
    let rows = efficiency_table(
        1024,
        4,
        &rates,
        &schemes,
        &AreaModel::default(),
        &FrameSettings::default(),
    )
    .map_err(err)?;
    let curve = |s: Scheme| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.scheme == s)
            .map(|r| r.ratio_lower)
            .collect()
    };
    for r in &rows {
        ensure(r.ratio_lower > 1.0, || {
            format!(
                "(a) {} at rate {}: ratio {}",
                r.scheme, r.rate, r.ratio_lower
            )
        })?;
    }
    let plain = curve(Scheme::Plain);
    ensure(plain.windows(2).all(|w| w[1] < w[0]), || {
        format!("(b) {plain:?}")
    })?;
    let md4 = curve(Scheme::MultiDecision(4));
    ensure(md4.iter().zip(&plain).all(|(a, b)| a >= b), || {
        format!("(c) {md4:?}")
    })?;
    let adaptive = curve(Scheme::Adaptive(3.0));
    ensure(adaptive.iter().zip(&plain).all(|(a, b)| a >= b), || {
        format!("(d) {adaptive:?}")
    })?;
    Ok(format!(
        "plain ratio {:.2}..{:.2}, all schemes > 1, orderings hold",
        plain[0],
        plain[plain.len() - 1]
    ))
}

fn duplication_bound() -> Outcome {
    let points = sweep_points();
    let checked: Vec<Result<(), String>> = points
        .par_iter()
        .map(|&(n, k, l)| {
            let cfg = CodeConfig::bec(n, k).map_err(err)?;
            let plan = build_stage_plan(n, l).map_err(err)?;
            let frame = one_frame(&cfg, 2.0, 12, k as u64);
            for scheme in [Scheme::Plain, Scheme::MultiDecision(4), Scheme::Plcas] {
                let out = simulate(&frame.llr, &cfg, l, scheme).map_err(err)?;
                let occ = &out.diagnostics.max_occupancy;
                for (s, &o) in occ.iter().enumerate() {
                    ensure(o <= plan.instances(s + 1), || {
                        format!("({n},{k}) l={l} stage {}: occupancy {o}", s + 1)
                    })?;
                }
                ensure(
                    out.diagnostics.duplicated_stages_used() <= plan.duplicated_stages(),
                    || format!("({n},{k}) l={l}: too many duplicated stages"),
                )?;
            }
            Ok(())
        })
        .collect();
    checked.into_iter().collect::<Result<(), String>>()?;
    let cfg = CodeConfig::bec(8, 4).map_err(err)?;
    let out = simulate(&one_frame(&cfg, 2.0, 3, 0).llr, &cfg, 4, Scheme::Plain).map_err(err)?;
    let occ = &out.diagnostics.max_occupancy;
    ensure(
        occ[0] <= 2 && out.diagnostics.duplicated_stages_used() == 1,
        || format!("(8,4) l=4 occupancy {occ:?}"),
    )?;
    Ok(format!(
        "{} points within plan; (8,4) l=4 occupancy {occ:?}",
        points.len()
    ))
}

fn kronecker_encode(u: &[bool]) -> Vec<bool> {
    let n = u.len();
    let mut g = vec![vec![true]];
    while g.len() < n {
        let size = g.len();
        let mut next = vec![vec![false; 2 * size]; 2 * size];
        for r in 0..size {
            for c in 0..size {
                next[r][c] = g[r][c];
                next[r + size][c] = g[r][c];
                next[r + size][c + size] = g[r][c];
            }
        }
        g = next;
    }
    (0..n)
        .map(|c| (0..n).fold(false, |acc, r| acc ^ (u[r] & g[r][c])))
        .collect()
}

fn structural() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..1000 {
        let n = 2usize << rng.random_range(0..6);
        let k = rng.random_range(1..=n);
        let cfg = CodeConfig::bec(n, k).map_err(err)?;
        let info: Vec<bool> = (0..k).map(|_| rng.random()).collect();
        let u = cfg.message_from_info(&info).map_err(err)?;
        let x = encode(&u, &cfg).map_err(err)?;
        ensure(x.bits() == kronecker_encode(u.bits()).as_slice(), || {
            format!("encoder mismatch on trial {trial} (n={n})")
        })?;
    }
    for trial in 0..1000 {
        let n = 1usize << rng.random_range(0..10);
        let mask: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let tree = decompose(&mask, n).map_err(err)?;
        let mut next = 0;
        for leaf in tree.leaves() {
            let span = &mask[leaf.start..leaf.start + leaf.len];
            ensure(
                leaf.start == next && classify(span) == Some(leaf.kind),
                || format!("bad leaf on mask trial {trial}"),
            )?;
            if leaf.len < n {
                let parent_len = 2 * leaf.len;
                let parent_start = leaf.start / parent_len * parent_len;
                ensure(
                    classify(&mask[parent_start..parent_start + parent_len]).is_none(),
                    || format!("non-maximal leaf on mask trial {trial}"),
                )?;
            }
            next += leaf.len;
        }
        ensure(next == n, || {
            format!("leaves do not cover mask trial {trial}")
        })?;
    }
    let cfg = CodeConfig::bec(64, 32).map_err(err)?;
    let render = || -> Result<String, String> {
        let spec = NoiseSpec::new(1.5, cfg.rate(), 31).map_err(err)?;
        let rows = simulate_frames(&cfg, &spec, 200, |frame| {
            let out = simulate(&frame.llr, &cfg, 4, Scheme::Plcas)?;
            Ok(format!("{},{}\n", frame.index, out.report.csv_row()))
        })
        .map_err(err)?;
        let trace = simulate(&one_frame(&cfg, 1.5, 31, 0).llr, &cfg, 4, Scheme::Plain)
            .map_err(err)?
            .trace
            .to_csv();
        Ok(rows.concat() + &trace)
    };
    ensure(render()? == render()?, || "CSV reruns differ".into())?;
    Ok("encoder oracle 10^3, fastssc invariants 10^3, CSV reruns identical".into())
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 9] = [
        ("latency-formula identity", latency_identity),
        ("spot values", spot_values),
        ("bit-exact equivalence", bit_exact),
        ("ML-oracle equivalence", ml_oracle),
        ("PLCAS bounds", plcas_bounds_hold),
        ("list FER <= SC FER", list_beats_sc),
        ("efficiency-ratio properties", efficiency_properties),
        ("duplication bound", duplication_bound),
        ("structural suites", structural),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

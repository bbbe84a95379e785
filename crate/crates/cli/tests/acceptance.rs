//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p ini-lab-cli --test acceptance -- --nocapture` to
//! see every line; tolerances are pinned in the assertions.

use std::path::PathBuf;
use std::process::Command;

use ini_lab::analytic::{self, IniDirection, Victim};
use ini_lab::channel::{ChannelModel, Tap};
use ini_lab::numerology::{CpMode, MultiplexPair, ValidatedPair};
use ini_lab::simulate::{self, EnsembleOptions, RngSpec};
use ini_lab::waveform::{
    frame, map_nsn, map_wsn, rx_nsn, rx_wsn_common, rx_wsn_individual, FreqGrid, WsnBlock,
};
use ini_lab::Complex64;

fn verdict(ok: bool, label: &str, detail: &str) {
    println!("[{}] {label}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{label}: {detail}");
}

fn pair(n: usize, q: usize, eta: f64, cp_ratio: f64) -> ValidatedPair {
    MultiplexPair {
        n_fft: n,
        q,
        eta_nsn: eta,
        eta_wsn: 1.0 - eta,
        cp_ratio,
        ..MultiplexPair::default()
    }
    .validate()
    .unwrap()
}

fn defaults(q: usize) -> ValidatedPair {
    pair(128, q, 0.5, 1.0 / 16.0)
}

const MODES: [CpMode; 2] = [CpMode::Individual, CpMode::Common];
const DIRECTIONS: [IniDirection; 2] = [IniDirection::WsnToNsn, IniDirection::NsnToWsn];

#[test]
fn c01_oracle_equivalence() {
    // every closed-form entry vs the single-tone chain: 1e-9 relative,
    // 1e-15 absolute where the closed form is zero
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for q in [1usize, 2, 4, 8] {
        let p = defaults(q);
        for cp_mode in MODES {
            for direction in DIRECTIONS {
                let reference = analytic::ini_matrix(&p, direction, cp_mode);
                let measured = simulate::measure_ini_matrix(&p, cp_mode, direction);
                for (m, r) in measured.entries().iter().zip(reference.entries()) {
                    if r.abs() > 1e-15 {
                        worst_rel = worst_rel.max((m - r).abs() / r.abs());
                    } else {
                        worst_abs = worst_abs.max((m - r).abs());
                    }
                }
            }
        }
    }
    verdict(
        worst_rel <= 1e-9 && worst_abs <= 1e-15,
        "01 oracle-equivalence",
        &format!("max_rel_err={worst_rel:.3e} max_abs_err_on_zeros={worst_abs:.3e}"),
    );
}

#[test]
fn c02_null_case_q1() {
    let p = defaults(1);
    let mut worst = 0.0f64;
    for cp_mode in MODES {
        for direction in DIRECTIONS {
            for e in analytic::ini_matrix(&p, direction, cp_mode).entries() {
                worst = worst.max(e.abs());
            }
            for e in simulate::measure_ini_matrix(&p, cp_mode, direction).entries() {
                worst = worst.max(e.abs());
            }
            let opts = EnsembleOptions {
                trials: 200,
                ..Default::default()
            };
            let report = simulate::measure_ini_ensemble(&p, cp_mode, direction, &opts).unwrap();
            for e in &report.per_victim_ini {
                worst = worst.max(e.abs());
            }
        }
    }
    verdict(
        worst <= 1e-12,
        "02 null-case-q1",
        &format!("max_ini={worst:.3e} (both engines)"),
    );
}

#[test]
fn c03_cp_mode_equality_nsn_to_wsn() {
    let mut worst = 0.0f64;
    for q in [2usize, 4, 8] {
        let p = defaults(q);
        let a = analytic::ini_matrix(&p, IniDirection::NsnToWsn, CpMode::Individual);
        let b = analytic::ini_matrix(&p, IniDirection::NsnToWsn, CpMode::Common);
        for (x, y) in a.entries().iter().zip(b.entries()) {
            worst = worst.max((x - y).abs());
        }
    }
    verdict(
        worst <= 1e-12,
        "03 cp-mode-equality",
        &format!("max_elementwise_diff={worst:.3e}"),
    );
}

#[test]
fn c04_zero_ini_lattice() {
    let mut ok = true;
    let mut detail = String::new();
    for q in [2usize, 4, 8] {
        let p = defaults(q);
        let totals =
            analytic::ini_matrix(&p, IniDirection::WsnToNsn, CpMode::Common).per_victim_totals();
        let measured = simulate::measure_ini_matrix(&p, CpMode::Common, IniDirection::WsnToNsn)
            .per_victim_totals();
        let mut zero_count = 0;
        for (v, (&t, &m)) in totals.iter().zip(&measured).enumerate() {
            let is_lattice = v % q == 0;
            let analytic_zero = t <= 1e-12;
            let measured_zero = m <= 1e-12;
            if analytic_zero != is_lattice || measured_zero != is_lattice {
                ok = false;
            }
            if is_lattice {
                zero_count += 1;
            } else if t <= 0.0 {
                ok = false;
            }
        }
        if zero_count != p.nsn_active() / q {
            ok = false;
        }
        detail.push_str(&format!("q={q}:{zero_count}/{} ", p.nsn_active() / q));
    }
    verdict(
        ok,
        "04 zero-ini-lattice",
        &format!("zero victims per q at v=0 mod q: {detail}"),
    );
}

#[test]
fn c05_average_ini_structure() {
    let mut ok = true;
    let mut detail = String::new();
    for q in [2usize, 4, 8] {
        let p = defaults(q);
        let ind = analytic::average_metrics(&p, CpMode::Individual);
        let com = analytic::average_metrics(&p, CpMode::Common);
        let trio = [
            analytic::to_db(com.avg_ini_nsn),
            analytic::to_db(com.avg_ini_wsn),
            analytic::to_db(ind.avg_ini_wsn),
        ];
        let spread = trio.iter().fold(f64::MIN, |a, &b| a.max(b))
            - trio.iter().fold(f64::MAX, |a, &b| a.min(b));
        if spread > 0.1 {
            ok = false;
        }
        let nsn_ind = analytic::to_db(ind.avg_ini_nsn);
        let below = nsn_ind < trio[0];
        if q == 2 && !below {
            ok = false;
        }
        if q >= 4 && below {
            ok = false;
        }
        detail.push_str(&format!(
            "q={q}: trio_spread={spread:.2e}dB nsn_ind={nsn_ind:.2}dB trio={:.2}dB; ",
            trio[0]
        ));
    }
    verdict(ok, "05 average-ini-structure", detail.trim_end());
}

#[test]
fn c06_q_monotonicity() {
    let mut ok = true;
    let mut values = Vec::new();
    for q in [2usize, 4, 8] {
        let p = defaults(q);
        let ind = analytic::average_metrics(&p, CpMode::Individual);
        let com = analytic::average_metrics(&p, CpMode::Common);
        values.push([
            ind.avg_ini_nsn,
            ind.avg_ini_wsn,
            com.avg_ini_nsn,
            com.avg_ini_wsn,
        ]);
    }
    for step in values.windows(2) {
        for (smaller, larger) in step[0].iter().zip(&step[1]) {
            if smaller >= larger {
                ok = false;
            }
        }
    }
    verdict(
        ok,
        "06 q-monotonicity",
        &format!(
            "all four average-ini figures strictly increase over q=2,4,8 ({:.4}<{:.4}<{:.4} for nsn-individual)",
            values[0][0], values[1][0], values[2][0]
        ),
    );
}

#[test]
fn c07_sir_offset_linearity() {
    let offset_db = 7.25;
    let base = defaults(2);
    let mut shifted_cfg = base.config().clone();
    shifted_cfg.power_nsn = analytic::from_db(offset_db);
    let shifted = shifted_cfg.validate().unwrap();
    let mut worst = 0.0f64;
    for cp_mode in MODES {
        for (victim, sign) in [(Victim::Nsn, 1.0), (Victim::Wsn, -1.0)] {
            let a = analytic::sir_profile(&base, victim, cp_mode);
            let b = analytic::sir_profile(&shifted, victim, cp_mode);
            for (x, y) in a.sir_db().iter().zip(b.sir_db()) {
                if x.is_finite() {
                    worst = worst.max((y - x - sign * offset_db).abs());
                }
            }
        }
    }
    verdict(
        worst <= 1e-9,
        "07 sir-offset-linearity",
        &format!("offset={offset_db}dB max_shift_error={worst:.3e}dB"),
    );
}

#[test]
fn c08_ensemble_convergence() {
    let p = defaults(2);
    let opts = EnsembleOptions {
        trials: 10_000,
        rng: RngSpec { seed: 1 },
        ..Default::default()
    };
    let mut ok = true;
    let mut worst_sigmas = 0.0f64;
    for cp_mode in MODES {
        for direction in DIRECTIONS {
            let report = simulate::measure_ini_ensemble(&p, cp_mode, direction, &opts).unwrap();
            let reference = analytic::ini_matrix(&p, direction, cp_mode).per_victim_totals();
            let band = 5.0 / (report.trials as f64).sqrt();
            for ((m, s), r) in report
                .per_victim_ini
                .iter()
                .zip(&report.per_victim_sigma)
                .zip(&reference)
            {
                let sigmas = (m - r).abs() / (s.max(1e-12) / (report.trials as f64).sqrt()) / 5.0;
                worst_sigmas = worst_sigmas.max(sigmas * 5.0);
                if (m - r).abs() > band * s.max(1e-12) {
                    ok = false;
                }
            }
        }
    }
    verdict(
        ok,
        "08 ensemble-convergence",
        &format!(
            "10^4 bpsk trials, worst deviation {worst_sigmas:.2} of 5 allowed standard errors"
        ),
    );
}

#[test]
fn c09_round_trip_fidelity() {
    let p = defaults(2);
    let data_nsn: Vec<Complex64> = (0..p.nsn_active())
        .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let data_wsn: Vec<Complex64> = (0..p.wsn_active())
        .map(|i| Complex64::new(0.0, if i % 3 == 0 { 1.0 } else { -1.0 }))
        .collect();
    let mut worst_identity = 0.0f64;
    for cp_mode in MODES {
        let nsn = map_nsn(&data_nsn, &p).unwrap();
        let tx = frame(&nsn, &WsnBlock::silent(cp_mode, &p), &p).unwrap();
        for (a, b) in rx_nsn(&tx, &p).unwrap().active_bins().iter().zip(&data_nsn) {
            worst_identity = worst_identity.max((a - b).norm());
        }
        let grids: Vec<FreqGrid> = (0..p.q())
            .map(|_| map_wsn(&data_wsn, &p).unwrap())
            .collect();
        let wsn = WsnBlock::new(grids, cp_mode, &p).unwrap();
        let tx = frame(&FreqGrid::silent(p.n(), 0..p.nsn_active()), &wsn, &p).unwrap();
        for q in 0..p.q() {
            let rx = match cp_mode {
                CpMode::Individual => rx_wsn_individual(&tx, &p, q).unwrap(),
                CpMode::Common => rx_wsn_common(&tx, &p, q).unwrap(),
            };
            for (a, b) in rx.active_bins().iter().zip(&data_wsn) {
                worst_identity = worst_identity.max((a - b).norm());
            }
        }
    }

    // three taps, delays below M_CP = 4, ideal one-tap equalization
    let ch = ChannelModel::new(vec![
        Tap {
            delay: 0,
            gain: Complex64::new(0.85, 0.15),
        },
        Tap {
            delay: 1,
            gain: Complex64::new(-0.25, 0.1),
        },
        Tap {
            delay: 3,
            gain: Complex64::new(0.05, -0.08),
        },
    ])
    .unwrap();
    let mut worst_faded = 0.0f64;
    let nsn = map_nsn(&data_nsn, &p).unwrap();
    let tx = frame(&nsn, &WsnBlock::silent(CpMode::Individual, &p), &p).unwrap();
    let rx = ch
        .equalize(&rx_nsn(&ch.apply(&tx, &p).unwrap(), &p).unwrap())
        .unwrap();
    for (a, b) in rx.active_bins().iter().zip(&data_nsn) {
        worst_faded = worst_faded.max((a - b).norm());
    }
    let grids: Vec<FreqGrid> = (0..p.q())
        .map(|_| map_wsn(&data_wsn, &p).unwrap())
        .collect();
    let wsn = WsnBlock::new(grids, CpMode::Individual, &p).unwrap();
    let tx = frame(&FreqGrid::silent(p.n(), 0..p.nsn_active()), &wsn, &p).unwrap();
    let faded = ch.apply(&tx, &p).unwrap();
    for q in 0..p.q() {
        let rx = ch
            .equalize(&rx_wsn_individual(&faded, &p, q).unwrap())
            .unwrap();
        for (a, b) in rx.active_bins().iter().zip(&data_wsn) {
            worst_faded = worst_faded.max((a - b).norm());
        }
    }
    verdict(
        worst_identity <= 1e-12 && worst_faded <= 1e-9,
        "09 round-trip-fidelity",
        &format!("identity_evm={worst_identity:.3e} three-tap_equalized_evm={worst_faded:.3e}"),
    );
}

#[test]
fn c10_window_independence() {
    let p = defaults(4);
    let mut worst = 0.0f64;
    for cp_mode in MODES {
        for k in [0usize, 17, 40, 63] {
            let reference =
                simulate::measure_ini_single_tone(&p, cp_mode, IniDirection::NsnToWsn, k, Some(0))
                    .unwrap();
            for q in 1..p.q() {
                let other = simulate::measure_ini_single_tone(
                    &p,
                    cp_mode,
                    IniDirection::NsnToWsn,
                    k,
                    Some(q),
                )
                .unwrap();
                for (a, b) in reference.iter().zip(&other) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    verdict(
        worst <= 1e-12,
        "10 window-independence",
        &format!("max power difference across victim windows {worst:.3e}"),
    );
}

#[test]
fn c11_boundary_concentration() {
    let mut ok = true;
    let mut detail = String::new();
    let mut pairs = vec![defaults(2), defaults(4), defaults(8)];
    pairs.push(pair(64, 4, 0.25, 1.0 / 8.0));
    for p in &pairs {
        for cp_mode in MODES {
            let nsn = analytic::ini_matrix(p, IniDirection::WsnToNsn, cp_mode).per_victim_totals();
            let argmax = nsn
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(v, _)| v)
                .unwrap();
            if p.nsn_active() - argmax > p.q() {
                ok = false;
            }
            detail.push_str(&format!("nsn@{argmax}/{} ", p.nsn_active() - 1));
            let wsn = analytic::ini_matrix(p, IniDirection::NsnToWsn, cp_mode).per_victim_totals();
            let argmax = wsn
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            if argmax >= p.q() {
                ok = false;
            }
            detail.push_str(&format!("wsn@{argmax} "));
        }
    }
    verdict(
        ok,
        "11 boundary-concentration",
        &format!("argmax positions: {}", detail.trim_end()),
    );
}

fn run_cli(args: &[&str], threads: &str) -> (String, String) {
    let out_dir = std::env::temp_dir().join(format!(
        "ini_lab_accept_{}_{}",
        std::process::id(),
        threads.to_owned() + args.last().unwrap_or(&"")
    ));
    let _ = std::fs::remove_dir_all(&out_dir);
    let status = Command::new(env!("CARGO_BIN_EXE_ini-lab"))
        .args(args)
        .arg("--out")
        .arg(&out_dir)
        .env("INI_LAB_THREADS", threads)
        .output()
        .expect("binary runs");
    assert!(
        status.status.success(),
        "cli failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    let read = |suffix: &str| -> String {
        let path: PathBuf = out_dir.join(suffix);
        std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()))
    };
    let csv = read("montecarlo.csv");
    let summary = read("montecarlo_summary.txt");
    let _ = std::fs::remove_dir_all(&out_dir);
    (csv, summary)
}

#[test]
fn c12_reproducibility() {
    let args = [
        "montecarlo",
        "--n",
        "128",
        "--q",
        "2",
        "--trials",
        "1000",
        "--seed",
        "7",
        "--cp-mode",
        "common",
    ];
    let (csv_1, summary_1) = run_cli(&args, "1");
    let (csv_1b, summary_1b) = run_cli(&args, "1");
    let (csv_4, summary_4) = run_cli(&args, "4");
    let identical =
        csv_1 == csv_1b && csv_1 == csv_4 && summary_1 == summary_1b && summary_1 == summary_4;
    verdict(
        identical,
        "12 reproducibility",
        &format!(
            "montecarlo csv byte-identical across reruns and worker counts ({} bytes)",
            csv_1.len()
        ),
    );
}

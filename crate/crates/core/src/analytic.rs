//! Closed-form inter-numerology interference kernels, per-pair interference
//! matrices, and SIR / average-metric reductions.
//!
//! Conventions used throughout:
//!
//! * `k` is the interferer position, `v` the NSN victim subcarrier, `p` the
//!   WSN victim offset; WSN positions are expressed at NSN granularity, so
//!   `k` (leakage into NSN) and `p` are multiples of Q in `0..eta_wsn*N`.
//! * `theta = k - v + eta_nsn*N` is the spectral distance between a WSN
//!   interferer and an NSN victim; it lies in `1..N`, so the sine-ratio
//!   denominators never vanish and no singularity handling is needed.
//! * Every kernel is a ratio of sines at rational multiples of pi. They are
//!   evaluated through an integer-reduced sine so that lattice zeros come out
//!   as exact `0.0` rather than ~1e-16 residue.
//!
//! The leakage of one wide-numerology subcarrier into a narrow one is the
//! power sum of per-symbol capture windows: the narrow receiver's DFT window
//! slices each of the Q wide symbols into a run of consecutive samples, and
//! each run contributes the squared magnitude of a finite geometric series.
//! With the default framing the first window holds M + M_CP - N_CP samples
//! and the remaining Q-1 hold M + M_CP each. `kernel_wsn_to_nsn_individual`
//! evaluates the capture windows directly, which also stays exact for
//! aggressive CP ratios where the leading windows collapse to zero length.

use crate::error::{Error, Result};
use crate::numerology::{CpMode, ValidatedPair};

/// Which numerology leaks into which.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IniDirection {
    WsnToNsn,
    NsnToWsn,
}

impl IniDirection {
    pub fn label(self) -> &'static str {
        match self {
            IniDirection::WsnToNsn => "wsn_to_nsn",
            IniDirection::NsnToWsn => "nsn_to_wsn",
        }
    }
}

/// The numerology being interfered with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Victim {
    Nsn,
    Wsn,
}

impl Victim {
    pub fn label(self) -> &'static str {
        match self {
            Victim::Nsn => "nsn",
            Victim::Wsn => "wsn",
        }
    }
}

/// Power in dB; exact zero maps to -inf.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Inverse of [`to_db`].
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// |sin(pi * num / den)| with exact zeros at integer multiples.
///
/// The argument is reduced modulo `den` first (|sin| has period pi) and then
/// folded into the first quadrant, so results stay accurate for large `num`.
fn abs_sin_pi_ratio(num: i64, den: usize) -> f64 {
    let den_i = den as i64;
    let mut m = num.rem_euclid(den_i);
    if m == 0 {
        return 0.0;
    }
    if 2 * m > den_i {
        m = den_i - m;
    }
    (std::f64::consts::PI * m as f64 / den as f64).sin()
}

fn check_wsn_offset(pair: &ValidatedPair, k: usize, name: &str) -> Result<()> {
    let span = pair.wsn_active() * pair.q();
    if k >= span || !k.is_multiple_of(pair.q()) {
        return Err(Error::IndexOutOfRange(format!(
            "{name}={k} is not a multiple of Q={} in 0..{span}",
            pair.q()
        )));
    }
    Ok(())
}

fn check_nsn_index(pair: &ValidatedPair, v: usize, name: &str) -> Result<()> {
    if v >= pair.nsn_active() {
        return Err(Error::IndexOutOfRange(format!(
            "{name}={v} outside 0..{}",
            pair.nsn_active()
        )));
    }
    Ok(())
}

/// Squared-magnitude geometric-series ratio |sin(pi*len*theta/N) / sin(pi*theta/N)|^2.
fn window_gain_sq(len: i64, theta: i64, n: usize) -> f64 {
    let denom = abs_sin_pi_ratio(theta, n);
    debug_assert!(denom >= (std::f64::consts::PI / n as f64).sin() * 0.999999);
    let num = abs_sin_pi_ratio(len * theta, n);
    let ratio = num / denom;
    ratio * ratio
}

/// Leakage kernel of WSN offset `k` onto NSN victim `v`, individual CP:
/// the sum over the Q capture windows of the squared geometric-series gains.
pub fn kernel_wsn_to_nsn_individual(pair: &ValidatedPair, k: usize, v: usize) -> Result<f64> {
    check_wsn_offset(pair, k, "k")?;
    check_nsn_index(pair, v, "v")?;
    let n = pair.n();
    let theta = k as i64 - v as i64 + pair.nsn_active() as i64;
    let segment = (pair.m() + pair.m_cp()) as i64;
    let n_cp = pair.n_cp() as i64;
    let mut acc = 0.0;
    for q in 0..pair.q() as i64 {
        let cut = (n_cp - q * segment).max(0);
        let len = (segment - cut).max(0);
        if len > 0 {
            acc += window_gain_sq(len, theta, n);
        }
    }
    Ok(acc)
}

/// Reduced two-term form of the individual-CP kernel with the band-edge
/// offset folded out of the numerators. Its magnitude matches
/// [`kernel_wsn_to_nsn_individual`] only when eta_nsn*(M+M_CP) and
/// eta_nsn*(M+M_CP-N_CP) are integers; kept for comparison runs.
pub fn kernel_wsn_to_nsn_individual_reduced(
    pair: &ValidatedPair,
    k: usize,
    v: usize,
) -> Result<f64> {
    check_wsn_offset(pair, k, "k")?;
    check_nsn_index(pair, v, "v")?;
    let n = pair.n();
    let d = k as i64 - v as i64;
    let theta = d + pair.nsn_active() as i64;
    let denom = abs_sin_pi_ratio(theta, n);
    let first_len = (pair.m() + pair.m_cp()) as i64 - pair.n_cp() as i64;
    let rest_len = (pair.m() + pair.m_cp()) as i64;
    let first = abs_sin_pi_ratio(first_len * d, n) / denom;
    let rest = abs_sin_pi_ratio(rest_len * d, n) / denom;
    Ok(first * first + (pair.q() as f64 - 1.0) * rest * rest)
}

/// Leakage kernel of WSN offset `k` onto NSN victim `v`, common CP: the
/// squared gain of one bare M-sample window. Zero whenever `v` is a multiple
/// of Q, because the WSN tones live on the Q-lattice of the N-grid.
pub fn kernel_wsn_to_nsn_common(pair: &ValidatedPair, k: usize, v: usize) -> Result<f64> {
    check_wsn_offset(pair, k, "k")?;
    check_nsn_index(pair, v, "v")?;
    let theta = k as i64 - v as i64 + pair.nsn_active() as i64;
    Ok(window_gain_sq(pair.m() as i64, theta, pair.n()))
}

/// Leakage kernel of NSN subcarrier `k` onto WSN victim offset `p`; identical
/// for both CP modes. Zero when `k` lies on the victim's Q-lattice.
pub fn kernel_nsn_to_wsn(pair: &ValidatedPair, k: usize, p: usize) -> Result<f64> {
    check_nsn_index(pair, k, "k")?;
    check_wsn_offset(pair, p, "p")?;
    let phi = k as i64 - p as i64 - pair.nsn_active() as i64;
    Ok(window_gain_sq(pair.m() as i64, phi, pair.n()))
}

/// Which algebraic form of the individual-CP kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    /// Capture-window geometric series; exact against the time-domain chain.
    Exact,
    /// The folded two-term variant, for comparison only.
    Reduced,
}

/// Per-(interferer, victim) expected interference power map, linear scale.
#[derive(Debug, Clone, PartialEq)]
pub struct IniMatrix {
    pub direction: IniDirection,
    pub cp_mode: CpMode,
    /// Interferer positions: WSN offsets (multiples of Q) or NSN indices.
    pub interferer_indices: Vec<usize>,
    /// Victim positions: NSN indices or WSN offsets (multiples of Q).
    pub victim_indices: Vec<usize>,
    entries: Vec<f64>,
}

impl IniMatrix {
    fn new(
        direction: IniDirection,
        cp_mode: CpMode,
        interferer_indices: Vec<usize>,
        victim_indices: Vec<usize>,
    ) -> IniMatrix {
        let entries = vec![0.0; interferer_indices.len() * victim_indices.len()];
        IniMatrix {
            direction,
            cp_mode,
            interferer_indices,
            victim_indices,
            entries,
        }
    }

    /// Assemble a matrix from per-interferer rows (used by the measurement
    /// side so both engines share one layout).
    pub(crate) fn from_rows(
        direction: IniDirection,
        cp_mode: CpMode,
        interferer_indices: Vec<usize>,
        victim_indices: Vec<usize>,
        rows: Vec<Vec<f64>>,
    ) -> IniMatrix {
        assert_eq!(rows.len(), interferer_indices.len());
        let mut entries = Vec::with_capacity(interferer_indices.len() * victim_indices.len());
        for row in rows {
            assert_eq!(row.len(), victim_indices.len());
            entries.extend(row);
        }
        IniMatrix {
            direction,
            cp_mode,
            interferer_indices,
            victim_indices,
            entries,
        }
    }

    pub fn n_interferers(&self) -> usize {
        self.interferer_indices.len()
    }

    pub fn n_victims(&self) -> usize {
        self.victim_indices.len()
    }

    /// Entry by row/column position (not by subcarrier index).
    pub fn entry(&self, interferer: usize, victim: usize) -> f64 {
        self.entries[interferer * self.victim_indices.len() + victim]
    }

    fn set(&mut self, interferer: usize, victim: usize, value: f64) {
        self.entries[interferer * self.victim_indices.len() + victim] = value;
    }

    /// One interferer's leakage profile over all victims.
    pub fn row(&self, interferer: usize) -> &[f64] {
        let w = self.victim_indices.len();
        &self.entries[interferer * w..(interferer + 1) * w]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Total interference landing on each victim: column sums taken in
    /// ascending interferer order, a fixed order so results are reproducible.
    pub fn per_victim_totals(&self) -> Vec<f64> {
        let w = self.victim_indices.len();
        let mut totals = vec![0.0; w];
        for row in self.entries.chunks_exact(w) {
            for (total, entry) in totals.iter_mut().zip(row) {
                *total += entry;
            }
        }
        totals
    }
}

/// Column sums of an interference matrix (total interference per victim).
pub fn total_ini_per_victim(matrix: &IniMatrix) -> Vec<f64> {
    matrix.per_victim_totals()
}

/// Build the full interference matrix for one direction and CP mode.
///
/// Entry scaling, with rho the interferer's per-subcarrier linear power:
/// `rho/(N*M) * kernel` for individual-CP leakage into NSN and for both
/// leakage directions into WSN; `rho/M^2 * kernel` for common-CP leakage
/// into NSN (the Q-symbol power sum folded into the scale).
pub fn ini_matrix(pair: &ValidatedPair, direction: IniDirection, cp_mode: CpMode) -> IniMatrix {
    ini_matrix_with(pair, direction, cp_mode, KernelForm::Exact)
}

/// Same as [`ini_matrix`] but selecting the individual-CP kernel form.
pub fn ini_matrix_with(
    pair: &ValidatedPair,
    direction: IniDirection,
    cp_mode: CpMode,
    form: KernelForm,
) -> IniMatrix {
    let nm = (pair.n() * pair.m()) as f64;
    let mut matrix = match direction {
        IniDirection::WsnToNsn => IniMatrix::new(
            direction,
            cp_mode,
            pair.wsn_tone_offsets(),
            pair.active_indices_nsn(),
        ),
        IniDirection::NsnToWsn => IniMatrix::new(
            direction,
            cp_mode,
            pair.active_indices_nsn(),
            pair.wsn_tone_offsets(),
        ),
    };
    for (row, &k) in matrix.interferer_indices.clone().iter().enumerate() {
        for (col, &victim) in matrix.victim_indices.clone().iter().enumerate() {
            let value = match (direction, cp_mode) {
                (IniDirection::WsnToNsn, CpMode::Individual) => {
                    let kernel = match form {
                        KernelForm::Exact => kernel_wsn_to_nsn_individual(pair, k, victim),
                        KernelForm::Reduced => {
                            kernel_wsn_to_nsn_individual_reduced(pair, k, victim)
                        }
                    };
                    pair.power_wsn() / nm * kernel.expect("indices constructed in range")
                }
                (IniDirection::WsnToNsn, CpMode::Common) => {
                    let kernel = kernel_wsn_to_nsn_common(pair, k, victim)
                        .expect("indices constructed in range");
                    pair.power_wsn() / (pair.m() * pair.m()) as f64 * kernel
                }
                (IniDirection::NsnToWsn, _) => {
                    let kernel =
                        kernel_nsn_to_wsn(pair, k, victim).expect("indices constructed in range");
                    pair.power_nsn() / nm * kernel
                }
            };
            matrix.set(row, col, value);
        }
    }
    matrix
}

/// Per-victim signal-to-interference ratio. Victims that receive exactly zero
/// interference carry `f64::INFINITY` in the linear profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SirProfile {
    pub victim: Victim,
    pub cp_mode: CpMode,
    /// Victim positions, matching [`IniMatrix::victim_indices`].
    pub victim_indices: Vec<usize>,
    pub sir_linear: Vec<f64>,
}

impl SirProfile {
    /// 10*log10 of the linear profile; infinite entries stay infinite.
    pub fn sir_db(&self) -> Vec<f64> {
        self.sir_linear.iter().map(|&s| to_db(s)).collect()
    }

    /// Number of victims flagged with infinite SIR (zero interference).
    pub fn infinite_count(&self) -> usize {
        self.sir_linear.iter().filter(|s| s.is_infinite()).count()
    }

    /// Mean of the finite dB entries, with the excluded count.
    pub fn mean_db_finite(&self) -> (f64, usize) {
        let finite: Vec<f64> = self
            .sir_db()
            .into_iter()
            .filter(|d| d.is_finite())
            .collect();
        let excluded = self.sir_linear.len() - finite.len();
        if finite.is_empty() {
            (f64::INFINITY, excluded)
        } else {
            (finite.iter().sum::<f64>() / finite.len() as f64, excluded)
        }
    }
}

/// SIR of every victim subcarrier of one numerology under the given CP mode.
pub fn sir_profile(pair: &ValidatedPair, victim: Victim, cp_mode: CpMode) -> SirProfile {
    let (direction, own_power) = match victim {
        Victim::Nsn => (IniDirection::WsnToNsn, pair.power_nsn()),
        Victim::Wsn => (IniDirection::NsnToWsn, pair.power_wsn()),
    };
    let matrix = ini_matrix(pair, direction, cp_mode);
    let sir_linear = matrix
        .per_victim_totals()
        .iter()
        .map(|&total| {
            if total == 0.0 {
                f64::INFINITY
            } else {
                own_power / total
            }
        })
        .collect();
    SirProfile {
        victim,
        cp_mode,
        victim_indices: matrix.victim_indices,
        sir_linear,
    }
}

/// Scalar summaries of one configuration: mean interference per victim
/// numerology (linear) and mean SIR in dB. SIR means are taken over finite
/// entries only; the flagged counts say how many victims were excluded.
/// The system mean pools both numerologies' victims, so the side with more
/// subcarriers weighs more.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageMetrics {
    pub avg_ini_nsn: f64,
    pub avg_ini_wsn: f64,
    pub avg_sir_nsn_db: f64,
    pub avg_sir_wsn_db: f64,
    pub avg_sir_system_db: f64,
    pub infinite_sir_nsn: usize,
    pub infinite_sir_wsn: usize,
}

pub fn average_metrics(pair: &ValidatedPair, cp_mode: CpMode) -> AverageMetrics {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let nsn_totals = ini_matrix(pair, IniDirection::WsnToNsn, cp_mode).per_victim_totals();
    let wsn_totals = ini_matrix(pair, IniDirection::NsnToWsn, cp_mode).per_victim_totals();
    let nsn_sir = sir_profile(pair, Victim::Nsn, cp_mode);
    let wsn_sir = sir_profile(pair, Victim::Wsn, cp_mode);
    let (avg_sir_nsn_db, infinite_sir_nsn) = nsn_sir.mean_db_finite();
    let (avg_sir_wsn_db, infinite_sir_wsn) = wsn_sir.mean_db_finite();
    let pooled: Vec<f64> = nsn_sir
        .sir_db()
        .into_iter()
        .chain(wsn_sir.sir_db())
        .filter(|d| d.is_finite())
        .collect();
    let avg_sir_system_db = if pooled.is_empty() {
        f64::INFINITY
    } else {
        pooled.iter().sum::<f64>() / pooled.len() as f64
    };
    AverageMetrics {
        avg_ini_nsn: mean(&nsn_totals),
        avg_ini_wsn: mean(&wsn_totals),
        avg_sir_nsn_db,
        avg_sir_wsn_db,
        avg_sir_system_db,
        infinite_sir_nsn,
        infinite_sir_wsn,
    }
}

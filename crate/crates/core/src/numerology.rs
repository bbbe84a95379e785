//! Configuration, validation, and index geometry for a pair of multiplexed
//! numerologies.
//!
//! The model is two CP-OFDM users sharing one band: a narrow-subcarrier-spacing
//! numerology (NSN, DFT size N) and a wide one (WSN, DFT size M = N/Q), with
//! the spacing ratio Q a power of two. Everything downstream works on a
//! [`ValidatedPair`], which caches the integer grid quantities so the rest of
//! the library never re-derives them from floats.

use crate::error::{Error, Result};

/// How the Q wide-numerology symbols inside one alignment block are protected.
///
/// `Individual` attaches a cyclic prefix to each of the Q symbols; `Common`
/// protects the whole Q-symbol block with a single prefix of the same total
/// length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CpMode {
    Individual,
    Common,
}

impl CpMode {
    pub fn label(self) -> &'static str {
        match self {
            CpMode::Individual => "individual",
            CpMode::Common => "common",
        }
    }
}

impl std::str::FromStr for CpMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" => Ok(CpMode::Individual),
            "common" => Ok(CpMode::Common),
            other => Err(Error::BadConfig(format!(
                "cp_mode must be 'individual' or 'common', got '{other}'"
            ))),
        }
    }
}

/// One of the five scalable data-channel numerologies (normal CP).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerologyPreset {
    pub mu: u8,
    pub subcarrier_spacing_khz: f64,
    pub symbol_duration_us: f64,
    pub cp_duration_us: f64,
    pub slot_duration_ms: f64,
}

/// Standard numerology presets, indexed by mu = 0..=4.
pub const PRESETS: [NumerologyPreset; 5] = [
    NumerologyPreset {
        mu: 0,
        subcarrier_spacing_khz: 15.0,
        symbol_duration_us: 66.67,
        cp_duration_us: 4.69,
        slot_duration_ms: 1.0,
    },
    NumerologyPreset {
        mu: 1,
        subcarrier_spacing_khz: 30.0,
        symbol_duration_us: 33.33,
        cp_duration_us: 2.34,
        slot_duration_ms: 0.5,
    },
    NumerologyPreset {
        mu: 2,
        subcarrier_spacing_khz: 60.0,
        symbol_duration_us: 16.67,
        cp_duration_us: 1.17,
        slot_duration_ms: 0.25,
    },
    NumerologyPreset {
        mu: 3,
        subcarrier_spacing_khz: 120.0,
        symbol_duration_us: 8.33,
        cp_duration_us: 0.58,
        slot_duration_ms: 0.125,
    },
    NumerologyPreset {
        mu: 4,
        subcarrier_spacing_khz: 240.0,
        symbol_duration_us: 4.17,
        cp_duration_us: 0.29,
        slot_duration_ms: 0.0625,
    },
];

/// Look up the preset for a given mu index.
pub fn preset(mu: u8) -> Option<&'static NumerologyPreset> {
    PRESETS.get(mu as usize)
}

/// Full configuration of two multiplexed numerologies.
///
/// Powers are linear per-subcarrier powers; dB conversion happens only at the
/// I/O boundary. `delta_f1_khz` and `bandwidth_hz` are informational and never
/// enter interference computation, which depends on the spacing ratio only.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplexPair {
    /// NSN DFT size N.
    pub n_fft: usize,
    /// Subcarrier-spacing ratio Q = N/M, a power of two. Q = 1 denotes a
    /// single-numerology system.
    pub q: usize,
    /// Band share of the narrow numerology.
    pub eta_nsn: f64,
    /// Band share of the wide numerology; must complement `eta_nsn` to one.
    pub eta_wsn: f64,
    /// CP length as a fraction of the DFT size, identical for both sides.
    pub cp_ratio: f64,
    /// Per-subcarrier linear power of the narrow numerology.
    pub power_nsn: f64,
    /// Per-subcarrier linear power of the wide numerology.
    pub power_wsn: f64,
    pub cp_mode: CpMode,
    /// Narrow subcarrier spacing in kHz (informational).
    pub delta_f1_khz: f64,
    /// Occupied bandwidth in Hz (informational).
    pub bandwidth_hz: f64,
}

impl Default for MultiplexPair {
    fn default() -> Self {
        MultiplexPair {
            n_fft: 128,
            q: 2,
            eta_nsn: 0.5,
            eta_wsn: 0.5,
            cp_ratio: 1.0 / 16.0,
            power_nsn: 1.0,
            power_wsn: 1.0,
            cp_mode: CpMode::Individual,
            delta_f1_khz: 15.0,
            bandwidth_hz: 128.0 * 15e3,
        }
    }
}

fn exact_count(value: f64, what: &str) -> Result<usize> {
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 * value.abs().max(1.0) || rounded < 1.0 {
        return Err(Error::NonIntegerGrid(format!("{what} = {value}")));
    }
    Ok(rounded as usize)
}

impl MultiplexPair {
    /// Build a pair from two standard presets. The spacing ratio comes from
    /// the presets; the informational fields are filled from the narrow one.
    pub fn from_presets(
        nsn: &NumerologyPreset,
        wsn: &NumerologyPreset,
        n_fft: usize,
        eta_nsn: f64,
        cp_ratio: f64,
    ) -> Self {
        let q = (wsn.subcarrier_spacing_khz / nsn.subcarrier_spacing_khz).round() as usize;
        MultiplexPair {
            n_fft,
            q,
            eta_nsn,
            eta_wsn: 1.0 - eta_nsn,
            cp_ratio,
            delta_f1_khz: nsn.subcarrier_spacing_khz,
            bandwidth_hz: n_fft as f64 * nsn.subcarrier_spacing_khz * 1e3,
            ..MultiplexPair::default()
        }
    }

    /// Check every structural invariant and cache the integer grid geometry.
    pub fn validate(self) -> Result<ValidatedPair> {
        if !self.q.is_power_of_two() {
            return Err(Error::BadQ(self.q));
        }
        if self.n_fft == 0 {
            return Err(Error::NonIntegerGrid("n_fft = 0".into()));
        }
        for (eta, name) in [(self.eta_nsn, "eta_nsn"), (self.eta_wsn, "eta_wsn")] {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::BadShare(format!("{name} = {eta} is outside (0, 1)")));
            }
        }
        if (self.eta_nsn + self.eta_wsn - 1.0).abs() > 1e-9 {
            return Err(Error::BadShare(format!(
                "eta_nsn + eta_wsn = {} (must be 1)",
                self.eta_nsn + self.eta_wsn
            )));
        }
        if !(self.cp_ratio > 0.0 && self.cp_ratio < 1.0) {
            return Err(Error::BadConfig(format!(
                "cp_ratio = {} is outside (0, 1)",
                self.cp_ratio
            )));
        }
        for (p, name) in [(self.power_nsn, "power_nsn"), (self.power_wsn, "power_wsn")] {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::BadConfig(format!(
                    "{name} = {p} (must be finite and >= 0)"
                )));
            }
        }
        if !self.n_fft.is_multiple_of(self.q) {
            return Err(Error::NonIntegerGrid(format!(
                "M = N/Q = {}/{}",
                self.n_fft, self.q
            )));
        }
        let n = self.n_fft;
        let m = n / self.q;
        let n_cp = exact_count(self.cp_ratio * n as f64, "N_CP = CP_R*N")?;
        let m_cp = exact_count(self.cp_ratio * m as f64, "M_CP = CP_R*M")?;
        let nsn_active = exact_count(self.eta_nsn * n as f64, "eta_nsn*N")?;
        exact_count(self.eta_wsn * n as f64, "eta_wsn*N")?;
        let wsn_base_bin = exact_count(self.eta_nsn * m as f64, "eta_nsn*M")?;
        let wsn_active = exact_count(self.eta_wsn * m as f64, "eta_wsn*M")?;
        debug_assert_eq!(wsn_base_bin + wsn_active, m);
        Ok(ValidatedPair {
            config: self,
            m,
            n_cp,
            m_cp,
            nsn_active,
            wsn_active,
            wsn_base_bin,
        })
    }
}

/// A [`MultiplexPair`] whose invariants have been checked, with integer grid
/// geometry precomputed. All analysis and simulation entry points take this.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedPair {
    config: MultiplexPair,
    m: usize,
    n_cp: usize,
    m_cp: usize,
    nsn_active: usize,
    wsn_active: usize,
    wsn_base_bin: usize,
}

impl ValidatedPair {
    /// The raw configuration. Clone and re-validate to derive swept variants.
    pub fn config(&self) -> &MultiplexPair {
        &self.config
    }

    /// NSN DFT size N.
    pub fn n(&self) -> usize {
        self.config.n_fft
    }

    /// WSN DFT size M = N/Q.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Subcarrier-spacing ratio Q.
    pub fn q(&self) -> usize {
        self.config.q
    }

    /// NSN cyclic-prefix length in samples.
    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    /// WSN per-symbol cyclic-prefix length in samples.
    pub fn m_cp(&self) -> usize {
        self.m_cp
    }

    /// Number of active NSN subcarriers (eta_nsn * N).
    pub fn nsn_active(&self) -> usize {
        self.nsn_active
    }

    /// Number of active WSN subcarriers (eta_wsn * M).
    pub fn wsn_active(&self) -> usize {
        self.wsn_active
    }

    /// First active WSN bin on the M-grid (eta_nsn * M).
    pub fn wsn_base_bin(&self) -> usize {
        self.wsn_base_bin
    }

    /// First N-grid index of the WSN footprint (eta_nsn * N); the NSN/WSN
    /// spectral boundary.
    pub fn boundary_bin(&self) -> usize {
        self.nsn_active
    }

    pub fn cp_mode(&self) -> CpMode {
        self.config.cp_mode
    }

    pub fn power_nsn(&self) -> f64 {
        self.config.power_nsn
    }

    pub fn power_wsn(&self) -> f64 {
        self.config.power_wsn
    }

    /// Active NSN subcarrier indices: 0..eta_nsn*N.
    pub fn active_indices_nsn(&self) -> Vec<usize> {
        (0..self.nsn_active).collect()
    }

    /// Active WSN subcarrier indices on the M-grid: eta_nsn*M..M.
    pub fn active_indices_wsn(&self) -> Vec<usize> {
        (self.wsn_base_bin..self.m).collect()
    }

    /// Spectral offsets of the WSN tones above the boundary, at NSN
    /// granularity: {0, Q, 2Q, ..}. Offset k maps to WSN bin
    /// `wsn_base_bin() + k/Q` and to absolute N-grid position
    /// `boundary_bin() + k`.
    pub fn wsn_tone_offsets(&self) -> Vec<usize> {
        (0..self.wsn_active).map(|i| i * self.config.q).collect()
    }

    /// Sample counts of the aligned frame structures.
    pub fn geometry(&self) -> FrameGeometry {
        let n = self.n();
        FrameGeometry {
            lcm_block_samples: n + self.n_cp,
            nsn_symbol_samples: n + self.n_cp,
            wsn_symbol_samples_individual: self.m + self.m_cp,
            wsn_block_samples_common: self.n_cp + self.config.q * self.m,
        }
    }
}

/// Sample counts of one alignment block; both CP modes span the same total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGeometry {
    /// Samples per alignment block, CP included.
    pub lcm_block_samples: usize,
    /// N + N_CP.
    pub nsn_symbol_samples: usize,
    /// M + M_CP (one framed WSN symbol, individual mode).
    pub wsn_symbol_samples_individual: usize,
    /// N_CP + Q*M (the whole WSN block, common mode).
    pub wsn_block_samples_common: usize,
}

//! Time-domain transmitter and receiver chains: subcarrier mapping, unitary
//! DFT pair, both CP framings, composite-signal construction, and the victim
//! receiver windows.
//!
//! All buffers are one alignment block long; interference is block-periodic
//! by construction, so multi-block streaming adds nothing.

use std::cell::RefCell;
use std::ops::Range;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numerology::{CpMode, ValidatedPair};

/// Complex symbols per subcarrier of one OFDM symbol. Bins outside `active`
/// are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid {
    pub size: usize,
    pub bins: Vec<Complex64>,
    pub active: Range<usize>,
}

impl FreqGrid {
    /// Grid with every bin active.
    pub fn full(bins: Vec<Complex64>) -> FreqGrid {
        let size = bins.len();
        FreqGrid {
            size,
            bins,
            active: 0..size,
        }
    }

    /// All-zero grid with the given active range.
    pub fn silent(size: usize, active: Range<usize>) -> FreqGrid {
        FreqGrid {
            size,
            bins: vec![Complex64::new(0.0, 0.0); size],
            active,
        }
    }

    /// Keep `active` bins, zero the rest.
    pub fn restricted(mut self, active: Range<usize>) -> FreqGrid {
        for (i, bin) in self.bins.iter_mut().enumerate() {
            if !active.contains(&i) {
                *bin = Complex64::new(0.0, 0.0);
            }
        }
        self.active = active;
        self
    }

    /// |bin|^2 over the active range, in index order.
    pub fn active_powers(&self) -> Vec<f64> {
        self.active
            .clone()
            .map(|i| self.bins[i].norm_sqr())
            .collect()
    }

    /// Symbols over the active range, in index order.
    pub fn active_bins(&self) -> Vec<Complex64> {
        self.active.clone().map(|i| self.bins[i]).collect()
    }
}

/// Complex baseband samples. `origin` is the conceptual index of sample 0;
/// framed composites carry their cyclic prefix at negative indices, so for
/// them `origin = -(cp length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    pub samples: Vec<Complex64>,
    pub origin: i64,
}

impl TimeSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// The Q wide-numerology symbols of one alignment block, with independent
/// data per symbol, plus the framing they are destined for.
#[derive(Debug, Clone, PartialEq)]
pub struct WsnBlock {
    pub per_symbol_grids: Vec<FreqGrid>,
    pub framing: CpMode,
}

impl WsnBlock {
    /// Wrap Q grids, checking that they are consistent with the pair.
    pub fn new(
        per_symbol_grids: Vec<FreqGrid>,
        framing: CpMode,
        pair: &ValidatedPair,
    ) -> Result<WsnBlock> {
        if per_symbol_grids.len() != pair.q() {
            return Err(Error::FramingMismatch(format!(
                "expected {} per-symbol grids, got {}",
                pair.q(),
                per_symbol_grids.len()
            )));
        }
        let active = pair.wsn_base_bin()..pair.m();
        for grid in &per_symbol_grids {
            if grid.size != pair.m() || grid.active != active {
                return Err(Error::FramingMismatch(
                    "per-symbol grid does not match the pair's wide-numerology layout".into(),
                ));
            }
        }
        Ok(WsnBlock {
            per_symbol_grids,
            framing,
        })
    }

    /// Block of Q all-zero symbols.
    pub fn silent(framing: CpMode, pair: &ValidatedPair) -> WsnBlock {
        let active = pair.wsn_base_bin()..pair.m();
        let grids = (0..pair.q())
            .map(|_| FreqGrid::silent(pair.m(), active.clone()))
            .collect();
        WsnBlock {
            per_symbol_grids: grids,
            framing,
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let fft = if inverse {
            planner.borrow_mut().plan_fft_inverse(buf.len())
        } else {
            planner.borrow_mut().plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Localized mapping of NSN data onto the low eta_nsn*N bins of an N-grid.
pub fn map_nsn(data: &[Complex64], pair: &ValidatedPair) -> Result<FreqGrid> {
    if data.len() != pair.nsn_active() {
        return Err(Error::LengthMismatch {
            expected: pair.nsn_active(),
            got: data.len(),
        });
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); pair.n()];
    bins[..data.len()].copy_from_slice(data);
    Ok(FreqGrid {
        size: pair.n(),
        bins,
        active: 0..pair.nsn_active(),
    })
}

/// Localized mapping of WSN data onto the high eta_wsn*M bins of an M-grid.
pub fn map_wsn(data: &[Complex64], pair: &ValidatedPair) -> Result<FreqGrid> {
    if data.len() != pair.wsn_active() {
        return Err(Error::LengthMismatch {
            expected: pair.wsn_active(),
            got: data.len(),
        });
    }
    let mut bins = vec![Complex64::new(0.0, 0.0); pair.m()];
    bins[pair.wsn_base_bin()..].copy_from_slice(data);
    Ok(FreqGrid {
        size: pair.m(),
        bins,
        active: pair.wsn_base_bin()..pair.m(),
    })
}

/// Unitary inverse DFT (1/sqrt(size) scaling).
pub fn idft_unitary(grid: &FreqGrid) -> TimeSignal {
    let mut buf = grid.bins.clone();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / (grid.size as f64).sqrt();
    for s in &mut buf {
        *s *= scale;
    }
    TimeSignal {
        samples: buf,
        origin: 0,
    }
}

/// Unitary forward DFT of a window whose length must equal `size`.
pub fn dft_unitary(window: &[Complex64], size: usize) -> Result<FreqGrid> {
    if window.len() != size {
        return Err(Error::SizeMismatch {
            expected: size,
            got: window.len(),
        });
    }
    let mut buf = window.to_vec();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / (size as f64).sqrt();
    for s in &mut buf {
        *s *= scale;
    }
    Ok(FreqGrid::full(buf))
}

fn check_nsn_grid(grid: &FreqGrid, pair: &ValidatedPair) -> Result<()> {
    if grid.size != pair.n() {
        return Err(Error::SizeMismatch {
            expected: pair.n(),
            got: grid.size,
        });
    }
    Ok(())
}

/// CP-framed NSN stream: the last N_CP time samples copied in front.
fn framed_nsn_stream(nsn_grid: &FreqGrid, pair: &ValidatedPair) -> Vec<Complex64> {
    let y = idft_unitary(nsn_grid).samples;
    let n = pair.n();
    let n_cp = pair.n_cp();
    let mut stream = Vec::with_capacity(n + n_cp);
    stream.extend_from_slice(&y[n - n_cp..]);
    stream.extend_from_slice(&y);
    stream
}

/// Composite block with a CP on every WSN symbol.
pub fn frame_individual(
    nsn_grid: &FreqGrid,
    wsn_block: &WsnBlock,
    pair: &ValidatedPair,
) -> Result<TimeSignal> {
    if wsn_block.framing != CpMode::Individual {
        return Err(Error::FramingMismatch(
            "block was framed for common cp".into(),
        ));
    }
    check_nsn_grid(nsn_grid, pair)?;
    if wsn_block.per_symbol_grids.len() != pair.q() {
        return Err(Error::FramingMismatch(format!(
            "expected {} wsn symbols, got {}",
            pair.q(),
            wsn_block.per_symbol_grids.len()
        )));
    }
    let (m, m_cp) = (pair.m(), pair.m_cp());
    let mut composite = framed_nsn_stream(nsn_grid, pair);
    for (q, grid) in wsn_block.per_symbol_grids.iter().enumerate() {
        if grid.size != m {
            return Err(Error::SizeMismatch {
                expected: m,
                got: grid.size,
            });
        }
        let y = idft_unitary(grid).samples;
        let base = q * (m + m_cp);
        for (i, s) in y[m - m_cp..].iter().enumerate() {
            composite[base + i] += s;
        }
        for (i, s) in y.iter().enumerate() {
            composite[base + m_cp + i] += s;
        }
    }
    Ok(TimeSignal {
        samples: composite,
        origin: -(pair.n_cp() as i64),
    })
}

/// Composite block with a single CP protecting the whole WSN symbol train.
/// The prefix is the tail of the Q-symbol concatenation.
pub fn frame_common(
    nsn_grid: &FreqGrid,
    wsn_block: &WsnBlock,
    pair: &ValidatedPair,
) -> Result<TimeSignal> {
    if wsn_block.framing != CpMode::Common {
        return Err(Error::FramingMismatch(
            "block was framed for individual cp".into(),
        ));
    }
    check_nsn_grid(nsn_grid, pair)?;
    if wsn_block.per_symbol_grids.len() != pair.q() {
        return Err(Error::FramingMismatch(format!(
            "expected {} wsn symbols, got {}",
            pair.q(),
            wsn_block.per_symbol_grids.len()
        )));
    }
    let (m, n_cp) = (pair.m(), pair.n_cp());
    let mut concat = Vec::with_capacity(pair.q() * m);
    for grid in &wsn_block.per_symbol_grids {
        if grid.size != m {
            return Err(Error::SizeMismatch {
                expected: m,
                got: grid.size,
            });
        }
        concat.extend_from_slice(&idft_unitary(grid).samples);
    }
    let mut composite = framed_nsn_stream(nsn_grid, pair);
    for (i, s) in concat[concat.len() - n_cp..].iter().enumerate() {
        composite[i] += s;
    }
    for (i, s) in concat.iter().enumerate() {
        composite[n_cp + i] += s;
    }
    Ok(TimeSignal {
        samples: composite,
        origin: -(n_cp as i64),
    })
}

/// Frame a block according to its own `framing` tag.
pub fn frame(
    nsn_grid: &FreqGrid,
    wsn_block: &WsnBlock,
    pair: &ValidatedPair,
) -> Result<TimeSignal> {
    match wsn_block.framing {
        CpMode::Individual => frame_individual(nsn_grid, wsn_block, pair),
        CpMode::Common => frame_common(nsn_grid, wsn_block, pair),
    }
}

/// NSN receiver: drop the prefix, N-point DFT, keep the NSN active bins.
pub fn rx_nsn(signal: &TimeSignal, pair: &ValidatedPair) -> Result<FreqGrid> {
    let expected = pair.n() + pair.n_cp();
    if signal.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: signal.len(),
        });
    }
    let grid = dft_unitary(&signal.samples[pair.n_cp()..], pair.n())?;
    Ok(grid.restricted(0..pair.nsn_active()))
}

/// WSN receiver, individual framing: slice the q-th framed symbol, drop its
/// prefix, M-point DFT, keep the WSN active bins.
pub fn rx_wsn_individual(signal: &TimeSignal, pair: &ValidatedPair, q: usize) -> Result<FreqGrid> {
    if q >= pair.q() {
        return Err(Error::BadSymbolIndex {
            index: q,
            count: pair.q(),
        });
    }
    let expected = pair.n() + pair.n_cp();
    if signal.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: signal.len(),
        });
    }
    let (m, m_cp) = (pair.m(), pair.m_cp());
    let base = q * (m + m_cp);
    let grid = dft_unitary(&signal.samples[base + m_cp..base + m_cp + m], m)?;
    Ok(grid.restricted(pair.wsn_base_bin()..m))
}

/// WSN receiver, common framing: drop the single leading prefix, slice the
/// q-th bare symbol, M-point DFT, keep the WSN active bins.
pub fn rx_wsn_common(signal: &TimeSignal, pair: &ValidatedPair, q: usize) -> Result<FreqGrid> {
    if q >= pair.q() {
        return Err(Error::BadSymbolIndex {
            index: q,
            count: pair.q(),
        });
    }
    let expected = pair.n() + pair.n_cp();
    if signal.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: signal.len(),
        });
    }
    let m = pair.m();
    let start = pair.n_cp() + q * m;
    let grid = dft_unitary(&signal.samples[start..start + m], m)?;
    Ok(grid.restricted(pair.wsn_base_bin()..m))
}

/// Dump raw IQ as interleaved little-endian f64 (re, im) pairs, no header.
pub fn write_raw_iq(signal: &TimeSignal, path: &std::path::Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(signal.len() * 16);
    for s in &signal.samples {
        bytes.extend_from_slice(&s.re.to_le_bytes());
        bytes.extend_from_slice(&s.im.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

//! Static multipath channel and ideal one-tap equalization.
//!
//! The channel is time-invariant within an alignment block and noiseless;
//! per-subcarrier fading is flat, so a one-tap frequency-domain divide undoes
//! it completely as long as every tap delay is covered by the cyclic prefix.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerology::ValidatedPair;
use crate::waveform::{FreqGrid, TimeSignal};

/// One propagation path: integer sample delay and complex gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub gain: Complex64,
}

/// A discrete channel impulse response with strictly increasing tap delays.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    taps: Vec<Tap>,
}

impl ChannelModel {
    /// Single unit tap at delay zero.
    pub fn identity() -> ChannelModel {
        ChannelModel {
            taps: vec![Tap {
                delay: 0,
                gain: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn new(taps: Vec<Tap>) -> Result<ChannelModel> {
        if taps.is_empty() {
            return Err(Error::BadConfig("channel needs at least one tap".into()));
        }
        for pair in taps.windows(2) {
            if pair[1].delay <= pair[0].delay {
                return Err(Error::BadConfig(format!(
                    "tap delays must be strictly increasing, got {} then {}",
                    pair[0].delay, pair[1].delay
                )));
            }
        }
        Ok(ChannelModel { taps })
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn is_identity(&self) -> bool {
        self.taps.len() == 1
            && self.taps[0].delay == 0
            && self.taps[0].gain == Complex64::new(1.0, 0.0)
    }

    pub fn max_delay(&self) -> usize {
        self.taps.last().map(|t| t.delay).unwrap_or(0)
    }

    /// Every tap delay must fit inside the shorter of the two prefixes.
    pub fn check_cp(&self, pair: &ValidatedPair) -> Result<()> {
        let cp = pair.n_cp().min(pair.m_cp());
        if self.max_delay() >= cp {
            return Err(Error::DelayExceedsCp {
                delay: self.max_delay(),
                cp,
            });
        }
        Ok(())
    }

    /// Convolve the signal with the impulse response, truncated to the input
    /// length; the prefix absorbs the tail per `check_cp`.
    pub fn apply(&self, signal: &TimeSignal, pair: &ValidatedPair) -> Result<TimeSignal> {
        self.check_cp(pair)?;
        let x = &signal.samples;
        let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
        for tap in &self.taps {
            for r in tap.delay..x.len() {
                out[r] += tap.gain * x[r - tap.delay];
            }
        }
        Ok(TimeSignal {
            samples: out,
            origin: signal.origin,
        })
    }

    /// Channel frequency response at one bin of an `fft_size`-point grid.
    pub fn cfr(&self, fft_size: usize, bin: usize) -> Complex64 {
        let mut h = Complex64::new(0.0, 0.0);
        for tap in &self.taps {
            let phase = -2.0 * std::f64::consts::PI * (bin * tap.delay) as f64 / fft_size as f64;
            h += tap.gain * Complex64::from_polar(1.0, phase);
        }
        h
    }

    /// Divide the active bins by the channel frequency response.
    pub fn equalize(&self, grid: &FreqGrid) -> Result<FreqGrid> {
        let mut out = grid.clone();
        for bin in grid.active.clone() {
            let h = self.cfr(grid.size, bin);
            if h.norm() < 1e-12 {
                return Err(Error::SpectralNull { bin });
            }
            out.bins[bin] = grid.bins[bin] / h;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerology::{CpMode, MultiplexPair};
    use crate::waveform::{
        dft_unitary, frame_individual, map_nsn, map_wsn, rx_nsn, rx_wsn_individual, FreqGrid,
        WsnBlock,
    };

    fn pair() -> ValidatedPair {
        MultiplexPair::default().validate().unwrap()
    }

    fn three_tap() -> ChannelModel {
        ChannelModel::new(vec![
            Tap {
                delay: 0,
                gain: Complex64::new(0.9, 0.1),
            },
            Tap {
                delay: 1,
                gain: Complex64::new(-0.3, 0.2),
            },
            Tap {
                delay: 3,
                gain: Complex64::new(0.1, -0.05),
            },
        ])
        .unwrap()
    }

    #[test]
    fn identity_passes_through() {
        let p = pair();
        let sig = TimeSignal {
            samples: (0..136)
                .map(|i| Complex64::new(i as f64, -(i as f64)))
                .collect(),
            origin: -8,
        };
        let out = ChannelModel::identity().apply(&sig, &p).unwrap();
        for (a, b) in out.samples.iter().zip(&sig.samples) {
            assert_eq!(a.norm_sqr(), b.norm_sqr());
        }
        assert!(ChannelModel::identity().is_identity());
        assert!(!three_tap().is_identity());
    }

    #[test]
    fn single_delayed_tap_shifts_and_scales() {
        let p = pair();
        let mut samples = vec![Complex64::new(0.0, 0.0); 136];
        samples[10] = Complex64::new(2.0, 0.0);
        let sig = TimeSignal {
            samples,
            origin: -8,
        };
        let ch = ChannelModel::new(vec![Tap {
            delay: 2,
            gain: Complex64::new(0.5, 0.0),
        }])
        .unwrap();
        let out = ch.apply(&sig, &p).unwrap();
        assert_eq!(out.samples[12], Complex64::new(1.0, 0.0));
        assert!(out
            .samples
            .iter()
            .enumerate()
            .all(|(i, s)| i == 12 || s.norm_sqr() == 0.0));
    }

    #[test]
    fn delay_must_fit_in_the_wsn_prefix() {
        let p = pair(); // M_CP = 4
        let ch = ChannelModel::new(vec![Tap {
            delay: 4,
            gain: Complex64::new(1.0, 0.0),
        }])
        .unwrap();
        let sig = TimeSignal {
            samples: vec![Complex64::new(0.0, 0.0); 136],
            origin: -8,
        };
        assert!(matches!(
            ch.apply(&sig, &p),
            Err(Error::DelayExceedsCp { delay: 4, cp: 4 })
        ));
    }

    #[test]
    fn cfr_of_identity_is_one_everywhere() {
        let ch = ChannelModel::identity();
        for bin in 0..128 {
            assert!((ch.cfr(128, bin) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cfr_of_single_delay_is_a_phase_ramp() {
        let ch = ChannelModel::new(vec![Tap {
            delay: 3,
            gain: Complex64::new(1.0, 0.0),
        }])
        .unwrap();
        for bin in 0..64 {
            let h = ch.cfr(64, bin);
            assert!((h.norm() - 1.0).abs() < 1e-12);
            let expected = -2.0 * std::f64::consts::PI * (3 * bin) as f64 / 64.0;
            let diff = (h.arg() - expected).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(diff < 1e-9 || (2.0 * std::f64::consts::PI - diff) < 1e-9);
        }
    }

    #[test]
    fn cfr_matches_dft_of_zero_padded_impulse_response() {
        let ch = three_tap();
        let n = 32;
        let mut cir = vec![Complex64::new(0.0, 0.0); n];
        for tap in ch.taps() {
            cir[tap.delay] = tap.gain;
        }
        // independent reference: naive DFT sum
        for bin in 0..n {
            let mut expected = Complex64::new(0.0, 0.0);
            for (i, c) in cir.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (bin * i) as f64 / n as f64;
                expected += c * Complex64::from_polar(1.0, phase);
            }
            assert!((ch.cfr(n, bin) - expected).norm() < 1e-12);
        }
        // and against the library DFT (unitary scale folded back)
        let spec = dft_unitary(&cir, n).unwrap();
        let scale = (n as f64).sqrt();
        for bin in 0..n {
            assert!((ch.cfr(n, bin) - spec.bins[bin] * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn equalizer_reports_spectral_nulls() {
        // two equal taps half a period apart null every odd bin
        let ch = ChannelModel::new(vec![
            Tap {
                delay: 0,
                gain: Complex64::new(1.0, 0.0),
            },
            Tap {
                delay: 8,
                gain: Complex64::new(1.0, 0.0),
            },
        ])
        .unwrap();
        let grid = FreqGrid::full(vec![Complex64::new(1.0, 0.0); 16]);
        assert!(matches!(
            ch.equalize(&grid),
            Err(Error::SpectralNull { .. })
        ));
    }

    #[test]
    fn multipath_round_trip_with_equalization() {
        let p = pair();
        let ch = three_tap();
        let data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let nsn = map_nsn(&data, &p).unwrap();
        let tx = frame_individual(&nsn, &WsnBlock::silent(CpMode::Individual, &p), &p).unwrap();
        let rx = rx_nsn(&ch.apply(&tx, &p).unwrap(), &p).unwrap();
        let eq = ch.equalize(&rx).unwrap();
        let evm = eq
            .active_bins()
            .iter()
            .zip(&data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(evm < 1e-9, "nsn evm = {evm}");

        // same through the wide-numerology path, every symbol
        let wdata: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new(0.0, if i % 3 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let grids: Vec<FreqGrid> = (0..2).map(|_| map_wsn(&wdata, &p).unwrap()).collect();
        let wsn = WsnBlock::new(grids, CpMode::Individual, &p).unwrap();
        let silent_nsn = FreqGrid::silent(p.n(), 0..p.nsn_active());
        let tx = frame_individual(&silent_nsn, &wsn, &p).unwrap();
        let faded = ch.apply(&tx, &p).unwrap();
        for q in 0..2 {
            let rx = rx_wsn_individual(&faded, &p, q).unwrap();
            let eq = ch.equalize(&rx).unwrap();
            let evm = eq
                .active_bins()
                .iter()
                .zip(&wdata)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(evm < 1e-9, "wsn q={q} evm = {evm}");
        }
    }

    #[test]
    fn ini_is_bit_identical_with_and_without_identity_channel() {
        let p = pair();
        let data: Vec<Complex64> = (0..32)
            .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        let wsn =
            WsnBlock::new(vec![map_wsn(&data, &p).unwrap(); 2], CpMode::Individual, &p).unwrap();
        let nsn = FreqGrid::silent(p.n(), 0..p.nsn_active());
        let tx = frame_individual(&nsn, &wsn, &p).unwrap();
        let direct = rx_nsn(&tx, &p).unwrap().active_powers();
        let through = rx_nsn(&ChannelModel::identity().apply(&tx, &p).unwrap(), &p)
            .unwrap()
            .active_powers();
        assert_eq!(direct, through);
    }
}

//! Plain-text run configuration: one `key = value` per line, `#` comments.
//!
//! Recognized keys: n_fft, q, eta_nsn, eta_wsn, cp_ratio, power_nsn_db,
//! power_wsn_db, cp_mode (individual|common), trials, seed, modulation
//! (bpsk), channel (identity|taps:<delay:gain_re:gain_im;..>). Absent keys
//! keep their defaults; powers are given in dB and stored linear.

use rustfft::num_complex::Complex64;

use crate::analytic::from_db;
use crate::channel::{ChannelModel, Tap};
use crate::error::{Error, Result};
use crate::numerology::MultiplexPair;
use crate::simulate::Modulation;

/// Everything one run needs: the pair plus engine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pair: MultiplexPair,
    pub trials: usize,
    pub seed: u64,
    pub modulation: Modulation,
    pub channel: ChannelModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pair: MultiplexPair::default(),
            trials: 10_000,
            seed: 1,
            modulation: Modulation::Bpsk,
            channel: ChannelModel::identity(),
        }
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::BadConfig(format!("cannot parse {key} = '{value}'")))
}

/// Parse `identity` or `taps:<delay:gain_re:gain_im;..>`.
pub fn parse_channel_spec(spec: &str) -> Result<ChannelModel> {
    if spec == "identity" {
        return Ok(ChannelModel::identity());
    }
    let Some(body) = spec.strip_prefix("taps:") else {
        return Err(Error::BadConfig(format!(
            "channel must be 'identity' or 'taps:<delay:gain_re:gain_im;..>', got '{spec}'"
        )));
    };
    let mut taps = Vec::new();
    for part in body.split(';').filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(Error::BadConfig(format!(
                "bad tap '{part}' (want delay:gain_re:gain_im)"
            )));
        }
        taps.push(Tap {
            delay: parse_number("tap delay", fields[0])?,
            gain: Complex64::new(
                parse_number("tap gain_re", fields[1])?,
                parse_number("tap gain_im", fields[2])?,
            ),
        });
    }
    ChannelModel::new(taps)
}

/// Render a channel back into the config string form.
pub fn channel_spec_string(channel: &ChannelModel) -> String {
    if channel.is_identity() {
        return "identity".into();
    }
    let taps: Vec<String> = channel
        .taps()
        .iter()
        .map(|t| format!("{}:{}:{}", t.delay, t.gain.re, t.gain.im))
        .collect();
    format!("taps:{}", taps.join(";"))
}

/// Parse a config file's text. Unknown keys are rejected; `eta_wsn` defaults
/// to the complement of `eta_nsn` when absent.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut eta_nsn_set = false;
    let mut eta_wsn_set = false;
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::BadConfig(format!(
                "line {}: expected 'key = value', got '{raw}'",
                line_no + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "n_fft" => config.pair.n_fft = parse_number(key, value)?,
            "q" => config.pair.q = parse_number(key, value)?,
            "eta_nsn" => {
                config.pair.eta_nsn = parse_number(key, value)?;
                eta_nsn_set = true;
            }
            "eta_wsn" => {
                config.pair.eta_wsn = parse_number(key, value)?;
                eta_wsn_set = true;
            }
            "cp_ratio" => config.pair.cp_ratio = parse_number(key, value)?,
            "power_nsn_db" => config.pair.power_nsn = from_db(parse_number(key, value)?),
            "power_wsn_db" => config.pair.power_wsn = from_db(parse_number(key, value)?),
            "cp_mode" => config.pair.cp_mode = value.parse()?,
            "trials" => config.trials = parse_number(key, value)?,
            "seed" => config.seed = parse_number(key, value)?,
            "modulation" => config.modulation = value.parse()?,
            "channel" => config.channel = parse_channel_spec(value)?,
            other => return Err(Error::BadConfig(format!("unknown key '{other}'"))),
        }
    }
    if eta_nsn_set && !eta_wsn_set {
        config.pair.eta_wsn = 1.0 - config.pair.eta_nsn;
    }
    if eta_wsn_set && !eta_nsn_set {
        config.pair.eta_nsn = 1.0 - config.pair.eta_wsn;
    }
    Ok(config)
}

/// Read and parse a config file.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

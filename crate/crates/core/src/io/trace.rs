//! Binary trace format.
//!
//! A fixed 98-byte little-endian header followed by `n_samples` interleaved
//! `(re, im)` f64 pairs:
//!
//! ```text
//! 0   magic "TWDPTRC1"       8 bytes
//! 8   version                u16 (= 1)
//! 10  v1, v2, diffuse_power, omega, aoa1, aoa2, doppler_hz, sample_period_s  f64 each
//! 74  n_sinusoids            u32
//! 78  trial_index            u32
//! 82  seed                   u64
//! 90  n_samples              u64
//! ```

use std::io::{self, Read, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{scenario_digest, ChannelParams, ParamError, ValidatedScenario};
use crate::sos::FadingTrace;

pub const MAGIC: &[u8; 8] = b"TWDPTRC1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 98;

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("not a trace file (bad magic)")]
    BadMagic,
    #[error("unsupported trace format version {0}")]
    UnsupportedVersion(u16),
    #[error("trace file truncated: expected {expected} bytes of {what}, got {got}")]
    Truncated {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("trace does not belong to the given scenario")]
    ScenarioMismatch,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<ParamError> for TraceFileError {
    fn from(e: ParamError) -> Self {
        TraceFileError::InvalidHeader(e.to_string())
    }
}

/// Everything the header records.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub params: ChannelParams,
    pub aoa1: f64,
    pub aoa2: f64,
    pub doppler_hz: f64,
    pub sample_period_s: f64,
    pub n_sinusoids: u32,
    pub trial_index: u32,
    pub seed: u64,
    pub n_samples: u64,
}

impl TraceHeader {
    pub fn digest(&self) -> u64 {
        scenario_digest(
            &self.params,
            self.aoa1,
            self.aoa2,
            self.doppler_hz,
            self.sample_period_s,
            self.n_sinusoids as usize,
            self.seed,
            self.n_samples as usize,
        )
    }

    fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut buf = [0u8; HEADER_LEN];
        buf[..8].copy_from_slice(MAGIC);
        buf[8..10].copy_from_slice(&VERSION.to_le_bytes());
        let p = &self.params;
        let floats = [
            p.v1(),
            p.v2(),
            p.diffuse_power(),
            p.omega(),
            self.aoa1,
            self.aoa2,
            self.doppler_hz,
            self.sample_period_s,
        ];
        for (i, x) in floats.iter().enumerate() {
            buf[10 + 8 * i..18 + 8 * i].copy_from_slice(&x.to_le_bytes());
        }
        buf[74..78].copy_from_slice(&self.n_sinusoids.to_le_bytes());
        buf[78..82].copy_from_slice(&self.trial_index.to_le_bytes());
        buf[82..90].copy_from_slice(&self.seed.to_le_bytes());
        buf[90..98].copy_from_slice(&self.n_samples.to_le_bytes());
        buf
    }

    fn from_bytes(buf: &[u8; HEADER_LEN]) -> Result<TraceHeader, TraceFileError> {
        if &buf[..8] != MAGIC {
            return Err(TraceFileError::BadMagic);
        }
        let version = u16::from_le_bytes([buf[8], buf[9]]);
        if version != VERSION {
            return Err(TraceFileError::UnsupportedVersion(version));
        }
        let f = |i: usize| f64::from_le_bytes(buf[10 + 8 * i..18 + 8 * i].try_into().unwrap());
        let params = ChannelParams::from_parts(f(0), f(1), f(2), f(3))?;
        Ok(TraceHeader {
            params,
            aoa1: f(4),
            aoa2: f(5),
            doppler_hz: f(6),
            sample_period_s: f(7),
            n_sinusoids: u32::from_le_bytes(buf[74..78].try_into().unwrap()),
            trial_index: u32::from_le_bytes(buf[78..82].try_into().unwrap()),
            seed: u64::from_le_bytes(buf[82..90].try_into().unwrap()),
            n_samples: u64::from_le_bytes(buf[90..98].try_into().unwrap()),
        })
    }
}

/// A trace read back from disk together with its header.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredTrace {
    pub header: TraceHeader,
    pub trace: FadingTrace,
}

/// Writes `trace`, a trial of `scenario`, to `sink`.
pub fn write_trace<W: Write>(
    trace: &FadingTrace,
    scenario: &ValidatedScenario,
    mut sink: W,
) -> Result<(), TraceFileError> {
    if trace.scenario_digest != scenario.digest() {
        return Err(TraceFileError::ScenarioMismatch);
    }
    let cfg = scenario.config();
    let too_big = |what: &str| TraceFileError::InvalidHeader(format!("{what} does not fit in 32 bits"));
    let header = TraceHeader {
        params: cfg.params,
        aoa1: cfg.aoa1,
        aoa2: cfg.aoa2,
        doppler_hz: cfg.doppler_hz,
        sample_period_s: trace.sample_period_s,
        n_sinusoids: u32::try_from(cfg.n_sinusoids).map_err(|_| too_big("n_sinusoids"))?,
        trial_index: u32::try_from(trace.trial_index).map_err(|_| too_big("trial_index"))?,
        seed: trace.seed,
        n_samples: trace.len() as u64,
    };
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * trace.len());
    buf.extend_from_slice(&header.to_bytes());
    for z in &trace.samples {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    sink.write_all(&buf)?;
    sink.flush()?;
    Ok(())
}

fn read_full<R: Read>(source: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Reads one trace. The scenario digest is recomputed from the header.
pub fn read_trace<R: Read>(mut source: R) -> Result<StoredTrace, TraceFileError> {
    let mut head = [0u8; HEADER_LEN];
    let got = read_full(&mut source, &mut head)?;
    if got < 8 || &head[..8] != MAGIC {
        return Err(TraceFileError::BadMagic);
    }
    if got < HEADER_LEN {
        return Err(TraceFileError::Truncated {
            what: "header",
            expected: HEADER_LEN,
            got,
        });
    }
    let header = TraceHeader::from_bytes(&head)?;
    let n = usize::try_from(header.n_samples)
        .ok()
        .filter(|n| n.checked_mul(16).is_some())
        .ok_or_else(|| TraceFileError::InvalidHeader(format!("n_samples {} is too large", header.n_samples)))?;
    // Read incrementally so a bogus length cannot force a huge allocation.
    let mut payload = Vec::new();
    let got = source.by_ref().take(16 * n as u64).read_to_end(&mut payload)?;
    if got < 16 * n {
        return Err(TraceFileError::Truncated {
            what: "payload",
            expected: 16 * n,
            got,
        });
    }
    let samples = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let trace = FadingTrace {
        samples,
        sample_period_s: header.sample_period_s,
        scenario_digest: header.digest(),
        trial_index: header.trial_index as usize,
        seed: header.seed,
    };
    Ok(StoredTrace { header, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate_scenario, ScenarioConfig};
    use crate::sos::generate_trace;

    fn scenario(n_samples: usize) -> ValidatedScenario {
        let mut cfg = ScenarioConfig::standard(ChannelParams::from_k_gamma(10.0, 1.0, 1.0).unwrap());
        cfg.n_samples = n_samples;
        cfg.seed = 99;
        validate_scenario(cfg).unwrap()
    }

    fn encoded(n_samples: usize) -> (FadingTrace, Vec<u8>) {
        let s = scenario(n_samples);
        let t = generate_trace(&s, 3);
        let mut buf = Vec::new();
        write_trace(&t, &s, &mut buf).unwrap();
        (t, buf)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (t, buf) = encoded(1000);
        assert_eq!(buf.len(), HEADER_LEN + 16_000);
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.trace, t);
        assert_eq!(back.header.trial_index, 3);
        assert_eq!(back.header.seed, 99);
        assert_eq!(back.header.n_sinusoids, 8);
    }

    #[test]
    fn header_layout() {
        let (_, buf) = encoded(5);
        assert_eq!(&buf[..8], b"TWDPTRC1");
        assert_eq!(u16::from_le_bytes([buf[8], buf[9]]), 1);
        assert_eq!(u64::from_le_bytes(buf[90..98].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(buf[78..82].try_into().unwrap()), 3);
    }

    #[test]
    fn corrupted_magic() {
        let (_, mut buf) = encoded(10);
        buf[0] = b'X';
        assert!(matches!(read_trace(buf.as_slice()), Err(TraceFileError::BadMagic)));
        assert!(matches!(read_trace(&b"TW"[..]), Err(TraceFileError::BadMagic)));
    }

    #[test]
    fn version_mismatch() {
        let (_, mut buf) = encoded(10);
        buf[8] = 2;
        assert!(matches!(read_trace(buf.as_slice()), Err(TraceFileError::UnsupportedVersion(2))));
    }

    #[test]
    fn truncated_payload_and_header() {
        let (_, mut buf) = encoded(10);
        buf[90..98].copy_from_slice(&11u64.to_le_bytes());
        assert!(matches!(
            read_trace(buf.as_slice()),
            Err(TraceFileError::Truncated { what: "payload", expected: 176, got: 160 })
        ));
        assert!(matches!(
            read_trace(&buf[..50]),
            Err(TraceFileError::Truncated { what: "header", .. })
        ));
    }

    #[test]
    fn invalid_params_in_header() {
        let (_, mut buf) = encoded(10);
        buf[34..42].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(matches!(read_trace(buf.as_slice()), Err(TraceFileError::InvalidHeader(_))));
    }

    #[test]
    fn refuses_foreign_scenario() {
        let s = scenario(10);
        let t = generate_trace(&s, 0);
        let other = s.with_seed(1);
        assert!(matches!(write_trace(&t, &other, Vec::new()), Err(TraceFileError::ScenarioMismatch)));
    }
}
